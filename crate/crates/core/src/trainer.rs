//! Cross-entropy method loop.
//!
//! Each generation samples `batch_size` fresh construction episodes from the
//! policy, pools them with the survivors of the previous generation, trains
//! the policy on the elite part of the pool and keeps the best few episodes
//! as the next survivors.
//!
//! Every episode draws from its own ChaCha stream keyed by
//! `(generation, index)`, and rewards come back in index order, so a run
//! depends only on its configuration and seed, never on the worker count.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::is_minus_inf;
use crate::env::Trajectory;
use crate::error::{Error, Result};
use crate::graph::{pair_count, Graph};
use crate::graph6::to_graph6;
use crate::policy::{sample_action, ActionDistribution, PolicyNet, Scratch};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub n: usize,
    pub batch_size: usize,
    pub num_generations: usize,
    pub percent_learn: f64,
    pub percent_survive: f64,
    pub neurons: Vec<usize>,
    pub learning_rate: f64,
    pub act_rndness_init: f64,
    pub act_rndness_wait: usize,
    pub act_rndness_mult: f64,
    pub act_rndness_max: f64,
    pub verbose: bool,
    pub output_best_graph_rate: usize,
    pub seed: u64,
    /// Parallel rollout width; 0 picks the number of available cores.
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n: 20,
            batch_size: 200,
            num_generations: 1000,
            percent_learn: 90.0,
            percent_survive: 97.5,
            neurons: vec![72, 12],
            learning_rate: 0.003,
            act_rndness_init: 0.005,
            act_rndness_wait: 10,
            act_rndness_mult: 1.1,
            act_rndness_max: 0.025,
            verbose: true,
            output_best_graph_rate: 25,
            seed: 0,
            workers: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidInput(msg));
        if !(2..=crate::graph::MAX_ORDER).contains(&self.n) {
            return fail(format!("n must be in 2..={}, got {}", crate::graph::MAX_ORDER, self.n));
        }
        if self.batch_size == 0 {
            return fail("batch_size must be positive".into());
        }
        if !(0.0 < self.percent_learn
            && self.percent_learn < self.percent_survive
            && self.percent_survive < 100.0)
        {
            return fail(format!(
                "need 0 < percent_learn < percent_survive < 100, got {} and {}",
                self.percent_learn, self.percent_survive
            ));
        }
        if self.neurons.contains(&0) {
            return fail("hidden layer sizes must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(0.0 < self.act_rndness_init
            && self.act_rndness_init <= self.act_rndness_max
            && self.act_rndness_max < 1.0)
        {
            return fail(format!(
                "need 0 < act_rndness_init <= act_rndness_max < 1, got {} and {}",
                self.act_rndness_init, self.act_rndness_max
            ));
        }
        if !(self.act_rndness_mult > 1.0 && self.act_rndness_mult.is_finite()) {
            return fail(format!("act_rndness_mult must exceed 1, got {}", self.act_rndness_mult));
        }
        if self.act_rndness_wait == 0 {
            return fail("act_rndness_wait must be positive".into());
        }
        Ok(())
    }
}

/// Nearest-rank percentile of `rewards` and every index at or above it.
///
/// The threshold is the `⌈P·N/100⌉`-th smallest reward; ties with it are
/// all selected.
pub fn select_elites(rewards: &[f64], percent: f64) -> Result<(Vec<usize>, f64)> {
    if rewards.is_empty() {
        return Err(Error::InvalidInput("cannot select from an empty batch".into()));
    }
    if !(0.0..=100.0).contains(&percent) {
        return Err(Error::InvalidInput(format!("percentile must be in [0, 100], got {percent}")));
    }
    let mut sorted = rewards.to_vec();
    sorted.sort_by(f64::total_cmp);
    let threshold = sorted[nearest_rank(rewards.len(), percent) - 1];
    let picked = (0..rewards.len()).filter(|&i| rewards[i] >= threshold).collect();
    Ok((picked, threshold))
}

fn nearest_rank(len: usize, percent: f64) -> usize {
    ((percent / 100.0 * len as f64).ceil() as usize).clamp(1, len)
}

/// act_rndness schedule: reset on improvement, multiplied after
/// `wait` stagnant generations, capped at `max`.
#[derive(Clone, Debug, PartialEq)]
pub struct ActRndness {
    pub value: f64,
    stagnant: usize,
    init: f64,
    wait: usize,
    mult: f64,
    max: f64,
}

impl ActRndness {
    pub fn new(init: f64, wait: usize, mult: f64, max: f64) -> Self {
        ActRndness {
            value: init,
            stagnant: 0,
            init,
            wait,
            mult,
            max,
        }
    }

    fn from_config(c: &TrainConfig) -> Self {
        ActRndness::new(
            c.act_rndness_init,
            c.act_rndness_wait,
            c.act_rndness_mult,
            c.act_rndness_max,
        )
    }

    pub fn update(&mut self, improved: bool) -> f64 {
        if improved {
            self.value = self.init;
            self.stagnant = 0;
        } else {
            self.stagnant += 1;
            if self.stagnant >= self.wait {
                self.value = (self.value * self.mult).min(self.max);
                self.stagnant = 0;
            }
        }
        self.value
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationStats {
    /// 1-based.
    pub generation: usize,
    pub max_reward_alltime: f64,
    pub max_reward_gen: f64,
    pub learn_threshold: f64,
    pub survive_threshold: f64,
    /// Value used while sampling this generation.
    pub act_rndness: f64,
    pub elapsed: Duration,
    pub best_graph: Graph,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Best {
    pub reward: f64,
    pub graph: Graph,
}

pub struct TrainOutcome {
    /// `None` only when no generation ran.
    pub best: Option<Best>,
    pub generations: usize,
    pub policy: PolicyNet,
}

/// Stepwise trainer; [`train`] drives it to completion.
pub struct Trainer<F> {
    config: TrainConfig,
    reward: F,
    net: PolicyNet,
    survivors: Vec<Trajectory>,
    best: Option<Trajectory>,
    act: ActRndness,
    generation: usize,
    pool: rayon::ThreadPool,
}

impl<F> Trainer<F>
where
    F: Fn(&Graph) -> Result<f64> + Sync,
{
    pub fn new(config: TrainConfig, reward: F) -> Result<Self> {
        config.validate()?;
        let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
        let net = PolicyNet::for_order(config.n, &config.neurons, &mut init_rng)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
        Ok(Trainer {
            act: ActRndness::from_config(&config),
            config,
            reward,
            net,
            survivors: Vec::new(),
            best: None,
            generation: 0,
            pool,
        })
    }

    pub fn policy(&self) -> &PolicyNet {
        &self.net
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn best(&self) -> Option<Best> {
        self.best.as_ref().map(|t| Best {
            reward: t.reward,
            graph: t.graph(),
        })
    }

    pub fn survivors(&self) -> &[Trajectory] {
        &self.survivors
    }

    /// Runs one generation.
    pub fn step(&mut self) -> Result<GenerationStats> {
        let started = Instant::now();
        self.generation += 1;
        let act_rndness = self.act.value;
        let fresh = self.sample_batch(act_rndness)?;
        let max_reward_gen = fresh.iter().map(|t| t.reward).fold(f64::NEG_INFINITY, f64::max);

        let mut pool = fresh;
        pool.append(&mut self.survivors);
        let rewards: Vec<f64> = pool.iter().map(|t| t.reward).collect();

        let mut improved = false;
        for t in &pool {
            if self.best.as_ref().is_none_or(|b| t.reward > b.reward) {
                self.best = Some(t.clone());
                improved = true;
            }
        }

        let (learn, learn_threshold) = select_elites(&rewards, self.config.percent_learn)?;
        let elites: Vec<&[u8]> = learn
            .iter()
            .filter(|&&i| !is_minus_inf(rewards[i]))
            .map(|&i| pool[i].actions())
            .collect();
        if !elites.is_empty() {
            let (loss, grad) = self.net.episodes_loss_and_gradient(&elites)?;
            self.net.apply_gradient(loss, &grad, self.config.learning_rate)?;
        }

        let (keep, survive_threshold) = select_survivors(&rewards, self.config.percent_survive);
        let mut pool: Vec<Option<Trajectory>> = pool.into_iter().map(Some).collect();
        self.survivors = keep
            .into_iter()
            .filter(|&i| !is_minus_inf(rewards[i]))
            .map(|i| pool[i].take().expect("indices are distinct"))
            .collect();

        self.act.update(improved);
        let best = self.best.as_ref().expect("a generation has at least one episode");
        Ok(GenerationStats {
            generation: self.generation,
            max_reward_alltime: best.reward,
            max_reward_gen,
            learn_threshold,
            survive_threshold,
            act_rndness,
            elapsed: started.elapsed(),
            best_graph: best.graph(),
        })
    }

    fn sample_batch(&self, act_rndness: f64) -> Result<Vec<Trajectory>> {
        let n = self.config.n;
        let c = pair_count(n);
        let net = &self.net;
        let reward = &self.reward;
        let seed = self.config.seed;
        let generation = self.generation as u64;
        self.pool.install(|| {
            (0..self.config.batch_size)
                .into_par_iter()
                .map_init(
                    || Scratch::new(net),
                    |scratch, i| {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        rng.set_stream(generation << 32 | i as u64);
                        let mut z = net.initial_preactivation();
                        let mut actions = Vec::with_capacity(c);
                        for t in 0..c {
                            let logits = net.logits_from_preactivation(&z, scratch);
                            let a = sample_action(
                                ActionDistribution::from_logits(logits),
                                &mut rng,
                                act_rndness,
                            );
                            actions.push(a);
                            net.advance_preactivation(&mut z, t, a);
                        }
                        let g = Graph::from_edge_bits(n, &actions)?;
                        let r = reward(&g)?;
                        Trajectory::new(n, actions, r)
                    },
                )
                .collect()
        })
    }
}

/// The nominal survivor count at the nearest-rank position, best first;
/// ties at the cut are broken by pool position.
fn select_survivors(rewards: &[f64], percent: f64) -> (Vec<usize>, f64) {
    let len = rewards.len();
    let count = len + 1 - nearest_rank(len, percent);
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| rewards[b].total_cmp(&rewards[a]));
    order.truncate(count);
    let threshold = rewards[*order.last().expect("count is at least 1")];
    (order, threshold)
}

/// Runs `config.num_generations` generations, handing each generation's
/// stats to `on_generation`; it returns `false` to stop early.
pub fn train<F, C>(config: TrainConfig, reward: F, mut on_generation: C) -> Result<TrainOutcome>
where
    F: Fn(&Graph) -> Result<f64> + Sync,
    C: FnMut(&GenerationStats) -> Result<bool>,
{
    let total = config.num_generations;
    let mut trainer = Trainer::new(config, reward)?;
    while trainer.generation() < total {
        let stats = trainer.step()?;
        if !on_generation(&stats)? {
            break;
        }
    }
    Ok(TrainOutcome {
        best: trainer.best(),
        generations: trainer.generation(),
        policy: trainer.net,
    })
}

pub const STATS_HEADER: [&str; 8] = [
    "gen",
    "max_all",
    "max_gen",
    "learn_thr",
    "survive_thr",
    "act_rndness",
    "ms",
    "best_g6",
];

/// Writes a run's files into one directory: `stats.csv` (flushed every
/// generation), `snapshots/best_<gen>.{g6,dot}` and, at the end, `best.g6`
/// and the policy checkpoint `policy.bin`.
///
/// The `ms` column stays empty unless `record_time` is set, so that equal
/// runs give byte-identical stats.
pub struct RunRecorder {
    dir: PathBuf,
    stats: csv::Writer<File>,
    snapshot_rate: usize,
    record_time: bool,
}

impl RunRecorder {
    pub fn create(dir: &Path, snapshot_rate: usize, record_time: bool) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let mut stats = csv::Writer::from_path(dir.join("stats.csv"))?;
        stats.write_record(STATS_HEADER)?;
        stats.flush()?;
        Ok(RunRecorder {
            dir: dir.to_path_buf(),
            stats,
            snapshot_rate,
            record_time,
        })
    }

    pub fn record(&mut self, s: &GenerationStats) -> Result<()> {
        let ms = if self.record_time {
            s.elapsed.as_millis().to_string()
        } else {
            String::new()
        };
        let g6 = to_graph6(&s.best_graph);
        self.stats.write_record([
            s.generation.to_string(),
            s.max_reward_alltime.to_string(),
            s.max_reward_gen.to_string(),
            s.learn_threshold.to_string(),
            s.survive_threshold.to_string(),
            s.act_rndness.to_string(),
            ms,
            g6.clone(),
        ])?;
        self.stats.flush()?;
        if self.snapshot_rate > 0 && s.generation % self.snapshot_rate == 0 {
            let snaps = self.dir.join("snapshots");
            fs::create_dir_all(&snaps)?;
            fs::write(snaps.join(format!("best_{}.g6", s.generation)), format!("{g6}\n"))?;
            fs::write(snaps.join(format!("best_{}.dot", s.generation)), s.best_graph.to_dot())?;
        }
        Ok(())
    }

    pub fn finish(mut self, outcome: &TrainOutcome) -> Result<()> {
        self.stats.flush()?;
        if let Some(best) = &outcome.best {
            fs::write(self.dir.join("best.g6"), format!("{}\n", to_graph6(&best.graph)))?;
        }
        outcome
            .policy
            .save(BufWriter::new(File::create(self.dir.join("policy.bin"))?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_selection() {
        let rewards: Vec<f64> = (1..=10).map(f64::from).collect();
        let (idx, thr) = select_elites(&rewards, 90.0).unwrap();
        assert_eq!(thr, 9.0);
        assert_eq!(idx, vec![8, 9]);

        let (idx, thr) = select_elites(&[4.0; 7], 90.0).unwrap();
        assert_eq!(thr, 4.0);
        assert_eq!(idx.len(), 7);

        assert!(select_elites(&[], 90.0).is_err());
        let (idx, _) = select_elites(&[3.0, 1.0, 2.0], 100.0).unwrap();
        assert_eq!(idx, vec![0]);
    }

    #[test]
    fn elite_selection_matches_sort_oracle() {
        // oracle: sort descending, keep everything tied with the k-th best,
        // k = N − ⌈P·N/100⌉ + 1
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 40) % 50
        };
        for len in 1..60 {
            let rewards: Vec<f64> = (0..len).map(|_| next() as f64).collect();
            for p in [50.0, 90.0, 97.5] {
                let (idx, thr) = select_elites(&rewards, p).unwrap();
                let mut desc = rewards.clone();
                desc.sort_by(|a, b| b.partial_cmp(a).unwrap());
                let k = len - (p / 100.0 * len as f64).ceil() as usize + 1;
                assert_eq!(thr, desc[k - 1]);
                let expected: Vec<usize> = (0..len).filter(|&i| rewards[i] >= desc[k - 1]).collect();
                assert_eq!(idx, expected);
            }
        }
    }

    #[test]
    fn survivors_are_capped_at_the_nominal_count() {
        let (keep, thr) = select_survivors(&[1.0; 205], 97.5);
        assert_eq!(keep, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(thr, 1.0);
        let rewards: Vec<f64> = (0..200).map(f64::from).collect();
        let (keep, thr) = select_survivors(&rewards, 97.5);
        assert_eq!(keep, vec![199, 198, 197, 196, 195, 194]);
        assert_eq!(thr, 194.0);
        assert_eq!(select_elites(&rewards, 97.5).unwrap().1, thr);
    }

    #[test]
    fn act_rndness_schedule() {
        let mut a = ActRndness::new(0.005, 10, 1.1, 0.025);
        for _ in 0..9 {
            assert_eq!(a.update(false), 0.005);
        }
        assert!((a.update(false) - 0.0055).abs() < 1e-15);
        assert_eq!(a.update(true), 0.005);
        for _ in 0..1000 {
            a.update(false);
            assert!((0.005..=0.025).contains(&a.value));
        }
        assert_eq!(a.value, 0.025);
        assert_eq!(a.update(true), 0.005);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = [
            TrainConfig { n: 1, ..Default::default() },
            TrainConfig { batch_size: 0, ..Default::default() },
            TrainConfig { percent_learn: 98.0, ..Default::default() },
            TrainConfig { percent_survive: 100.0, ..Default::default() },
            TrainConfig { act_rndness_mult: 1.0, ..Default::default() },
            TrainConfig { act_rndness_init: 0.03, ..Default::default() },
            TrainConfig { neurons: vec![72, 0], ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    fn small(seed: u64) -> TrainConfig {
        TrainConfig {
            n: 6,
            num_generations: 150,
            seed,
            workers: 1,
            ..Default::default()
        }
    }

    #[test]
    fn saturates_on_edge_count() {
        let out = train(small(3), |g| Ok(g.edge_count() as f64), |_| Ok(true)).unwrap();
        let best = out.best.unwrap();
        assert_eq!(best.reward, 15.0);
        assert_eq!(best.graph, Graph::complete(6).unwrap());
    }

    #[test]
    fn finds_the_empty_graph_on_negated_edge_count() {
        let out = train(small(4), |g| Ok(-(g.edge_count() as f64)), |_| Ok(true)).unwrap();
        assert_eq!(out.best.unwrap().reward, 0.0);
    }

    #[test]
    fn all_minus_inf_generations_are_legal() {
        let mut t = Trainer::new(small(5), |_| Ok(crate::bounds::MINUS_INF)).unwrap();
        let before = t.policy().clone();
        let s = t.step().unwrap();
        assert_eq!(s.max_reward_alltime, crate::bounds::MINUS_INF);
        assert_eq!(t.policy(), &before);
        assert!(t.survivors().is_empty());
    }

    #[test]
    fn stats_invariants_and_worker_independence() {
        let run = |workers| {
            let cfg = TrainConfig {
                n: 7,
                batch_size: 60,
                num_generations: 30,
                seed: 11,
                workers,
                ..Default::default()
            };
            let bound = crate::bounds::lookup(31).unwrap();
            let mut stats = Vec::new();
            train(cfg, |g| bound.reward(g), |s| {
                let mut s = s.clone();
                s.elapsed = Duration::ZERO;
                stats.push(s);
                Ok(true)
            })
            .unwrap();
            stats
        };
        let one = run(1);
        assert_eq!(one, run(3));
        let mut prev = f64::NEG_INFINITY;
        for s in &one {
            assert!(s.max_reward_alltime >= prev);
            prev = s.max_reward_alltime;
            assert!(s.survive_threshold >= s.learn_threshold);
            assert!((0.005..=0.025).contains(&s.act_rndness));
        }
    }

    #[test]
    fn early_stop_and_zero_generations() {
        let cfg = TrainConfig { num_generations: 0, ..small(1) };
        let out = train(cfg, |g| Ok(g.edge_count() as f64), |_| Ok(true)).unwrap();
        assert!(out.best.is_none());
        assert_eq!(out.generations, 0);
        let out = train(small(1), |g| Ok(g.edge_count() as f64), |s| Ok(s.generation < 3)).unwrap();
        assert_eq!(out.generations, 3);
    }
}
