//! Simple-graph construction environment.
//!
//! An episode for order `n` consists of exactly `C(n,2)` binary decisions,
//! one per entry of the upper triangle in row-wise order. The observation
//! is the partial edge list followed by a one-hot cursor marking the entry
//! decided next; the cursor disappears once the last entry is set.
//! Intermediate rewards are zero and the final reward comes from a
//! user-supplied function of the finished graph.

use crate::error::{Error, Result};
use crate::graph::{pair_count, Graph};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    edges: Vec<u8>,
    cursor: Option<usize>,
}

/// Result of one environment step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub reward: f64,
    pub terminal: bool,
}

impl Observation {
    pub fn initial(n: usize) -> Result<Self> {
        if !(2..=crate::graph::MAX_ORDER).contains(&n) {
            return Err(Error::InvalidInput(format!(
                "environment order must be in 2..={}, got {n}",
                crate::graph::MAX_ORDER
            )));
        }
        Ok(Observation {
            edges: vec![0; pair_count(n)],
            cursor: Some(0),
        })
    }

    /// The observation seen before deciding entry `cursor`, given the
    /// actions taken so far.
    pub(crate) fn at(actions: &[u8], cursor: usize) -> Self {
        let mut edges = vec![0; actions.len()];
        edges[..cursor].copy_from_slice(&actions[..cursor]);
        Observation {
            edges,
            cursor: Some(cursor),
        }
    }

    pub fn edge_part(&self) -> &[u8] {
        &self.edges
    }

    pub fn cursor(&self) -> Option<usize> {
        self.cursor
    }

    pub fn is_terminal(&self) -> bool {
        self.cursor.is_none()
    }

    /// One-hot cursor part, all zeros when terminal.
    pub fn cursor_part(&self) -> Vec<u8> {
        let mut c = vec![0; self.edges.len()];
        if let Some(k) = self.cursor {
            c[k] = 1;
        }
        c
    }

    /// The flat `n(n−1)`-wide network input: edge part then cursor part.
    pub fn to_input(&self) -> Vec<f64> {
        let width = self.edges.len();
        let mut x = Vec::with_capacity(2 * width);
        x.extend(self.edges.iter().map(|&b| b as f64));
        x.resize(2 * width, 0.0);
        if let Some(k) = self.cursor {
            x[width + k] = 1.0;
        }
        x
    }

    /// Records `action` at the cursor and advances it.
    pub fn step(&mut self, action: u8) -> Result<Step> {
        let k = self
            .cursor
            .ok_or_else(|| Error::Protocol("step on a finished episode".into()))?;
        check_action(action)?;
        self.edges[k] = action;
        self.cursor = (k + 1 < self.edges.len()).then_some(k + 1);
        Ok(Step {
            reward: 0.0,
            terminal: self.cursor.is_none(),
        })
    }
}

impl std::fmt::Display for Observation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.edges {
            write!(f, "{b}")?;
        }
        f.write_str(" ")?;
        for b in self.cursor_part() {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

fn check_action(action: u8) -> Result<()> {
    if action > 1 {
        return Err(Error::InvalidInput(format!(
            "action must be 0 or 1, got {action}"
        )));
    }
    Ok(())
}

/// A finished episode: the actions taken (equal to the row-wise edge bits
/// of the graph built) and its final reward.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    n: usize,
    actions: Vec<u8>,
    pub reward: f64,
}

impl Trajectory {
    pub fn new(n: usize, actions: Vec<u8>, reward: f64) -> Result<Self> {
        if actions.len() != pair_count(n) {
            return Err(Error::InvalidInput(format!(
                "trajectory of order {n} needs {} actions, got {}",
                pair_count(n),
                actions.len()
            )));
        }
        actions.iter().try_for_each(|&a| check_action(a))?;
        Ok(Trajectory { n, actions, reward })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn actions(&self) -> &[u8] {
        &self.actions
    }

    /// Observations at which each action was taken, in order.
    pub fn observations(&self) -> impl Iterator<Item = Observation> + '_ {
        (0..self.actions.len()).map(|t| Observation::at(&self.actions, t))
    }

    pub fn terminal_observation(&self) -> Observation {
        Observation {
            edges: self.actions.clone(),
            cursor: None,
        }
    }

    pub fn graph(&self) -> Graph {
        Graph::from_edge_bits(self.n, &self.actions).expect("actions validated on construction")
    }
}

/// Plays one episode with `policy` choosing every action.
pub fn rollout<P, R>(n: usize, mut policy: P, reward_fn: R) -> Result<Trajectory>
where
    P: FnMut(&Observation) -> u8,
    R: Fn(&Graph) -> Result<f64>,
{
    let mut obs = Observation::initial(n)?;
    loop {
        let action = policy(&obs);
        if obs.step(action)?.terminal {
            break;
        }
    }
    let actions = obs.edges;
    let g = Graph::from_edge_bits(n, &actions)?;
    let reward = reward_fn(&g)?;
    Ok(Trajectory { n, actions, reward })
}

/// A batch of episodes advanced in lockstep; every episode sits at the
/// same cursor position.
#[derive(Clone, Debug)]
pub struct BatchEnv {
    n: usize,
    actions: Vec<Vec<u8>>,
    cursor: usize,
}

impl BatchEnv {
    pub fn new(n: usize, batch_size: usize) -> Result<Self> {
        Observation::initial(n)?;
        Ok(BatchEnv {
            n,
            actions: vec![vec![0; pair_count(n)]; batch_size],
            cursor: 0,
        })
    }

    pub fn batch_size(&self) -> usize {
        self.actions.len()
    }

    /// Position decided by the next step, `None` once every episode is done.
    pub fn cursor(&self) -> Option<usize> {
        (self.cursor < pair_count(self.n)).then_some(self.cursor)
    }

    pub fn observation(&self, episode: usize) -> Observation {
        match self.cursor() {
            Some(k) => Observation::at(&self.actions[episode], k),
            None => Observation {
                edges: self.actions[episode].clone(),
                cursor: None,
            },
        }
    }

    /// Applies one action per episode.
    pub fn step(&mut self, actions: &[u8]) -> Result<Step> {
        let k = self
            .cursor()
            .ok_or_else(|| Error::Protocol("step on a finished batch".into()))?;
        if actions.len() != self.actions.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} actions, got {}",
                self.actions.len(),
                actions.len()
            )));
        }
        for (episode, &a) in self.actions.iter_mut().zip(actions) {
            check_action(a)?;
            episode[k] = a;
        }
        self.cursor += 1;
        Ok(Step {
            reward: 0.0,
            terminal: self.cursor().is_none(),
        })
    }

    /// Scores every finished episode with `reward_fn`.
    pub fn finish<R>(self, reward_fn: R) -> Result<Vec<Trajectory>>
    where
        R: Fn(&Graph) -> Result<f64>,
    {
        if self.cursor().is_some() {
            return Err(Error::Protocol("batch is not finished".into()));
        }
        let n = self.n;
        self.actions
            .into_iter()
            .map(|actions| {
                let reward = reward_fn(&Graph::from_edge_bits(n, &actions)?)?;
                Ok(Trajectory { n, actions, reward })
            })
            .collect()
    }
}
