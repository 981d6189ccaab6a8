//! Acceptance suite. Each test prints one line
//! `acceptance criterion <k> (<name>): PASS|FAIL - <detail>`
//! and fails when the criterion is not met.
//!
//! Criteria 3 and 4 run for minutes; run them all with
//! `cargo test -p cemagraph-cli --test acceptance -- --include-ignored --nocapture`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cemagraph::bounds::{lookup, registry, Formula};
use cemagraph::enumerate::enumerate_connected;
use cemagraph::graph6::{from_graph6, to_graph6};
use cemagraph::linalg::{lap_spectral_radius, laplacian, sym_eigenvalues, DEFAULT_TOLERANCE};
use cemagraph::policy::PolicyNet;
use cemagraph::{generate_star, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A reward above this is a violation.
const REWARD_TOLERANCE: f64 = 1e-9;
const MU_TOLERANCE: f64 = 1e-4;
const IDENTITY_TOLERANCE: f64 = 1e-9;
const ZERO_EIGENVALUE: f64 = 1e-6;
const SPECTRAL_RADIUS_TOLERANCE: f64 = 1e-9;
const GRADIENT_RELATIVE_ERROR: f64 = 1e-4;
const FINITE_DIFFERENCE_STEP: f64 = 1e-5;
const CALIBRATION_TOLERANCE: f64 = 1e-9;
const SYMMETRY_TOLERANCE: f64 = 1e-12;

const SQ_STAR_BOUNDS: [u32; 23] = [
    2, 3, 15, 28, 29, 31, 32, 36, 43, 49, 52, 53, 54, 55, 57, 58, 59, 60, 61, 62, 63, 64, 67,
];
const SQ_STAR_MU: f64 = 7.41421;
const SINGLE_WITNESSES: [(u32, f64); 3] = [(17, 7.37228), (50, 7.06459), (66, 5.60286)];
const RL_BOUNDS: [u32; 3] = [31, 65, 68];
const RL_ORDER: usize = 20;
const RL_SEEDS: u64 = 5;

fn verdict(k: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance criterion {k} ({name}): {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {k} ({name}) failed: {detail}");
}

fn cemagraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cemagraph"))
        .args(args)
        .output()
        .expect("binary runs")
}

struct Row {
    bound: u32,
    g6: String,
    mu: f64,
    reward: f64,
}

fn read_report(path: &Path) -> Vec<Row> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bound_id,g6,mu,rhs,reward,source"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Row {
                bound: f[0].parse().unwrap(),
                g6: f[1].to_string(),
                mu: f[2].parse().unwrap(),
                reward: f[4].parse().unwrap(),
            }
        })
        .collect()
}

fn describe(rows: &[Row]) -> String {
    let mut by_bound: BTreeMap<u32, (usize, f64, &str)> = BTreeMap::new();
    for r in rows {
        let e = by_bound.entry(r.bound).or_insert((0, f64::NEG_INFINITY, ""));
        e.0 += 1;
        if r.reward > e.1 {
            e.1 = r.reward;
            e.2 = &r.g6;
        }
    }
    by_bound
        .iter()
        .map(|(b, (count, worst, g6))| format!("bound {b}: {count} graphs, max reward {worst:.4} on {g6}"))
        .collect::<Vec<_>>()
        .join("; ")
}

#[test]
fn criterion_1_exhaustive_soundness() {
    let dir = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    let mut scanned = Vec::new();
    for k in 2..=8 {
        let report = dir.path().join(format!("n{k}.csv"));
        let out = cemagraph(&["scan", "--n", &k.to_string(), "--report", report.to_str().unwrap()]);
        assert!(matches!(out.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&out.stderr));
        let stderr = String::from_utf8_lossy(&out.stderr);
        scanned.push(format!("n={k}: {}", stderr.lines().next().unwrap_or("")));
        let rows = read_report(&report);
        if !rows.is_empty() {
            failures.push(format!("n={k}: {}", describe(&rows)));
        }
    }
    let detail = if failures.is_empty() {
        format!("no reward above {REWARD_TOLERANCE:e} for n = 2..8")
    } else {
        failures.join(" | ")
    };
    println!("{}", scanned.join("\n"));
    verdict(1, "exhaustive soundness n<=8", failures.is_empty(), &detail);
}

#[test]
fn criterion_2_stars_and_windmills() {
    let out = cemagraph(&["families", "--stars", "50", "--windmills", "24"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let stderr = String::from_utf8_lossy(&out.stderr);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("families.csv");
    fs::write(&path, stdout.as_bytes()).unwrap();
    let rows = read_report(&path);
    let pass = out.status.code() == Some(0) && rows.is_empty();
    let detail = if pass {
        stderr.lines().next().unwrap_or("").to_string()
    } else {
        format!("exit {:?}; {}", out.status.code(), describe(&rows))
    };
    verdict(2, "stars and windmills", pass, &detail);
}

#[test]
#[ignore = "exhaustive n=12 subquartic scan, several minutes"]
fn criterion_3_subquartic_reproduction() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("sq12.csv");
    let out = cemagraph(&["scan", "--n", "12", "--max-degree", "4", "--report", report.to_str().unwrap()]);
    assert!(matches!(out.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_report(&report);

    let mut graphs: BTreeMap<&str, (BTreeSet<u32>, f64)> = BTreeMap::new();
    for r in &rows {
        let e = graphs.entry(&r.g6).or_insert((BTreeSet::new(), r.mu));
        e.0.insert(r.bound);
    }
    let target: BTreeSet<u32> = SQ_STAR_BOUNDS.into_iter().collect();
    let sq_star: Vec<(&str, f64)> = graphs
        .iter()
        .filter(|(_, (set, mu))| *set == target && (mu - SQ_STAR_MU).abs() <= MU_TOLERANCE)
        .map(|(g6, (_, mu))| (*g6, *mu))
        .collect();
    let mut details = vec![format!(
        "{} violating graphs; {} with exactly the 23 bounds and mu {SQ_STAR_MU}: {:?}",
        graphs.len(),
        sq_star.len(),
        sq_star
    )];
    let mut pass = !sq_star.is_empty();
    for (bound, mu) in SINGLE_WITNESSES {
        let hit = rows
            .iter()
            .find(|r| r.bound == bound && (r.mu - mu).abs() <= MU_TOLERANCE);
        pass &= hit.is_some();
        details.push(match hit {
            Some(r) => format!("bound {bound}: {} mu {:.5}", r.g6, r.mu),
            None => format!("bound {bound}: no violation with mu {mu}"),
        });
    }
    verdict(3, "subquartic n=12 reproduction", pass, &details.join("; "));
}

#[test]
#[ignore = "up to 15 training runs of 1000 generations"]
fn criterion_4_rl_discovery() {
    let dir = tempfile::tempdir().unwrap();
    let mut details = Vec::new();
    let mut pass = true;
    for bound in RL_BOUNDS {
        let mut found = None;
        for seed in 0..RL_SEEDS {
            let out_dir = dir.path().join(format!("b{bound}s{seed}"));
            let out = cemagraph(&[
                "train",
                "--bound",
                &bound.to_string(),
                "--n",
                &RL_ORDER.to_string(),
                "--seed",
                &seed.to_string(),
                "--verbose",
                "false",
                "--out-dir",
                out_dir.to_str().unwrap(),
            ]);
            assert!(matches!(out.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&out.stderr));
            let g6 = fs::read_to_string(out_dir.join("best.g6")).unwrap();
            let reward = lookup(bound)
                .unwrap()
                .reward(&from_graph6(g6.trim()).unwrap())
                .unwrap();
            if out.status.code() == Some(0) && reward > REWARD_TOLERANCE {
                found = Some((seed, reward, g6.trim().to_string()));
                break;
            }
        }
        pass &= found.is_some();
        details.push(match found {
            Some((seed, r, g6)) => format!("bound {bound}: seed {seed} reward {r:.5} ({g6})"),
            None => format!("bound {bound}: no positive reward in {RL_SEEDS} seeds"),
        });
    }
    verdict(4, "RL counterexample discovery", pass, &details.join("; "));
}

#[test]
fn criterion_5_eigensolver_properties() {
    let mut graphs: Vec<Graph> = (2..=7)
        .flat_map(|n| enumerate_connected(n, None).unwrap())
        .collect();
    let connected = graphs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.random_range(1..=16);
        let p: f64 = rng.random_range(0.05..0.9);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        graphs.push(Graph::from_edges(n, &edges).unwrap());
    }
    let mut bad = Vec::new();
    for g in &graphs {
        let l = laplacian(g);
        let eig = sym_eigenvalues(&l, DEFAULT_TOLERANCE).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        let trace_ok = rel(eig.iter().sum(), l.trace()) <= IDENTITY_TOLERANCE;
        let frob_ok = rel(eig.iter().map(|x| x * x).sum(), l.frobenius_norm_sq()) <= IDENTITY_TOLERANCE;
        let zeros = eig.iter().filter(|x| x.abs() < ZERO_EIGENVALUE).count();
        if !(trace_ok && frob_ok && zeros == g.num_components()) {
            bad.push(to_graph6(g));
        }
    }
    for n in 2..=12 {
        let k = lap_spectral_radius(&Graph::complete(n).unwrap()).unwrap();
        if (k - n as f64).abs() > SPECTRAL_RADIUS_TOLERANCE {
            bad.push(format!("K{n}"));
        }
        if n >= 3 {
            let s = lap_spectral_radius(&generate_star(n).unwrap()).unwrap();
            if (s - n as f64).abs() > SPECTRAL_RADIUS_TOLERANCE {
                bad.push(format!("K1,{}", n - 1));
            }
        }
    }
    let detail = format!(
        "{connected} connected graphs n<=7 + 200 random n<=16, K_n and stars n<=12; {} failures {:?}",
        bad.len(),
        bad
    );
    verdict(5, "eigensolver properties", bad.is_empty(), &detail);
}

#[test]
fn criterion_6_policy_gradient_check() {
    let mut worst: f64 = 0.0;
    let mut coords = 0;
    let mut seed = 0;
    while coords < 100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        seed += 1;
        let mut net = PolicyNet::new(&[6, 4, 2], &mut rng).unwrap();
        let pairs: Vec<(Vec<f64>, u8)> = (0..10)
            .map(|_| ((0..6).map(|_| rng.random_range(-1.0..1.0)).collect(), rng.random_range(0..2)))
            .collect();
        let (_, grad) = net.loss_and_gradient(&pairs).unwrap();
        for k in 0..net.parameters().len() {
            let orig = net.parameters()[k];
            net.parameters_mut()[k] = orig + FINITE_DIFFERENCE_STEP;
            let up = net.loss_and_gradient(&pairs).unwrap().0;
            net.parameters_mut()[k] = orig - FINITE_DIFFERENCE_STEP;
            let down = net.loss_and_gradient(&pairs).unwrap().0;
            net.parameters_mut()[k] = orig;
            let numeric = (up - down) / (2.0 * FINITE_DIFFERENCE_STEP);
            let err = (numeric - grad[k]).abs() / numeric.abs().max(grad[k].abs()).max(1e-7);
            worst = worst.max(err);
            coords += 1;
        }
    }
    verdict(
        6,
        "policy gradient check",
        worst < GRADIENT_RELATIVE_ERROR,
        &format!("{coords} coordinates on [6,4,2] networks, max relative error {worst:.2e}"),
    );
}

#[test]
fn criterion_7_calibration() {
    let mut bad = Vec::new();
    for x in [1usize, 2, 3, 5, 10] {
        let g = Graph::complete(x + 1).unwrap();
        for b in registry() {
            let rhs = b.rhs(&g).unwrap();
            if (rhs - 2.0 * x as f64).abs() > CALIBRATION_TOLERANCE {
                bad.push(format!("bound {} on K{}: {rhs}", b.id, x + 1));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut tuples = 0;
    for b in registry() {
        let Formula::Edge(f) = b.formula else { continue };
        for _ in 0..100 {
            let di = rng.random_range(1..=30) as f64;
            let dj = rng.random_range(1..=30) as f64;
            let mi = rng.random_range(1.0..30.0);
            let mj = rng.random_range(1.0..30.0);
            let (a, c) = (f(di, mi, dj, mj), f(dj, mj, di, mi));
            tuples += 1;
            if !((a.is_nan() && c.is_nan()) || (a - c).abs() <= SYMMETRY_TOLERANCE) {
                bad.push(format!("bound {} asymmetric at ({di},{mi},{dj},{mj})", b.id));
            }
        }
    }
    verdict(
        7,
        "calibration and edge symmetry",
        bad.is_empty(),
        &format!("68 bounds on K2,K3,K4,K6,K11; {tuples} swapped edge tuples; failures {bad:?}"),
    );
}

#[test]
fn criterion_8_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out_dir = dir.path().join(name);
        let out = cemagraph(&[
            "--workers",
            workers,
            "train",
            "--bound",
            "31",
            "--n",
            "9",
            "--num-generations",
            "40",
            "--seed",
            "7",
            "--verbose",
            "false",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert!(matches!(out.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read(out_dir.join("stats.csv")).unwrap()
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "3");
    let lines = String::from_utf8_lossy(&a).lines().count();
    verdict(
        8,
        "deterministic stats",
        a == b && a == c && lines == 41,
        &format!("{lines} stats lines; same flags equal: {}; workers 1 vs 3 equal: {}", a == b, a == c),
    );
}

#[test]
fn criterion_9_codec() {
    let mut count = 0;
    let mut bad = Vec::new();
    for n in 2..=8 {
        for g in enumerate_connected(n, None).unwrap() {
            let s = to_graph6(&g);
            if from_graph6(&s).ok().as_ref() != Some(&g) {
                bad.push(s);
            }
            count += 1;
        }
    }
    let literals = to_graph6(&Graph::complete(3).unwrap()) == "Bw"
        && from_graph6("Bw").unwrap() == Graph::complete(3).unwrap()
        && to_graph6(&Graph::empty(2).unwrap()) == "A?"
        && from_graph6("A?").unwrap() == Graph::empty(2).unwrap();
    verdict(
        9,
        "graph6 codec",
        bad.is_empty() && literals,
        &format!("{count} connected graphs n<=8 round-trip, {} failures; literal vectors ok: {literals}", bad.len()),
    );
}
