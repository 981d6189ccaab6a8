//! Exhaustive and streamed bound verification.
//!
//! Graphs come from the built-in generator, a graph6 stream or the star and
//! windmill families. Each graph gets μ and its degree profile once, then
//! every requested bound; rewards above [`VIOLATION_TOLERANCE`] are reported
//! to a sink as soon as their chunk is done, in input order.

use std::fmt;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::bounds::{lookup, BoundSpec, Evaluation};
use crate::enumerate::enumerate_connected;
use crate::error::{Error, Result};
use crate::graph::{generate_star, generate_windmill, Graph};
use crate::graph6::{from_graph6, read_graph6_lines, to_graph6};
use crate::linalg::lap_spectral_radius;

/// A reward counts as a violation only above this; exactly tight graphs
/// come out a few ulps positive.
pub const VIOLATION_TOLERANCE: f64 = 1e-9;

const CHUNK: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Enumerated,
    Stream,
    Family,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Enumerated => "enumerated",
            Source::Stream => "stream",
            Source::Family => "family",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ViolationReport {
    pub bound_id: u32,
    pub g6: String,
    pub mu: f64,
    pub rhs: f64,
    pub reward: f64,
    pub source: Source,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScanSummary {
    pub scanned: u64,
    /// Disconnected, single-vertex or (non-strict) malformed inputs.
    pub skipped: u64,
    /// Part of `skipped`.
    pub malformed: u64,
    /// (graph, bound) pairs where the bound had no real-valued term.
    pub undefined: u64,
    pub violations: u64,
    /// Largest reward seen per requested bound, `-inf` if none evaluated.
    pub max_reward: Vec<(u32, f64)>,
}

#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    /// 0 picks the number of available cores.
    pub workers: usize,
    /// Abort on the first malformed graph6 line instead of skipping it.
    pub strict: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            workers: 0,
            strict: true,
        }
    }
}

/// Resolves bound ids, sorted and without duplicates.
pub fn resolve_bounds(ids: &[u32]) -> Result<Vec<&'static BoundSpec>> {
    if ids.is_empty() {
        return Err(Error::InvalidInput("no bounds selected".into()));
    }
    let mut ids = ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter().map(lookup).collect()
}

struct Scanner<'a, S> {
    specs: Vec<&'static BoundSpec>,
    source: Source,
    pool: rayon::ThreadPool,
    summary: ScanSummary,
    chunk: Vec<Graph>,
    sink: &'a mut S,
}

struct GraphResult {
    reports: Vec<ViolationReport>,
    rewards: Vec<Option<f64>>,
}

impl<'a, S> Scanner<'a, S>
where
    S: FnMut(ViolationReport) -> Result<()>,
{
    fn new(ids: &[u32], source: Source, workers: usize, sink: &'a mut S) -> Result<Self> {
        let specs = resolve_bounds(ids)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
        let summary = ScanSummary {
            max_reward: specs.iter().map(|s| (s.id, f64::NEG_INFINITY)).collect(),
            ..Default::default()
        };
        Ok(Scanner {
            specs,
            source,
            pool,
            summary,
            chunk: Vec::with_capacity(CHUNK),
            sink,
        })
    }

    fn push(&mut self, g: Graph) -> Result<()> {
        if g.order() < 2 || !g.is_connected() {
            self.summary.skipped += 1;
            return Ok(());
        }
        self.chunk.push(g);
        if self.chunk.len() == CHUNK {
            self.flush()?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        let specs = &self.specs;
        let source = self.source;
        let chunk = std::mem::take(&mut self.chunk);
        let results: Vec<GraphResult> = self.pool.install(|| {
            chunk
                .par_iter()
                .map(|g| evaluate_graph(specs, g, source))
                .collect::<Result<_>>()
        })?;
        for r in results {
            self.summary.scanned += 1;
            for ((_, best), reward) in self.summary.max_reward.iter_mut().zip(&r.rewards) {
                match reward {
                    Some(x) => *best = best.max(*x),
                    None => self.summary.undefined += 1,
                }
            }
            for report in r.reports {
                self.summary.violations += 1;
                (self.sink)(report)?;
            }
        }
        self.chunk = chunk;
        self.chunk.clear();
        Ok(())
    }

    fn finish(mut self) -> Result<ScanSummary> {
        self.flush()?;
        Ok(self.summary)
    }
}

fn evaluate_graph(specs: &[&BoundSpec], g: &Graph, source: Source) -> Result<GraphResult> {
    let mu = lap_spectral_radius(g)?;
    let profile = g.degree_profile()?;
    let mut reports = Vec::new();
    let mut rewards = Vec::with_capacity(specs.len());
    let mut g6 = None;
    for s in specs {
        let rhs = match s.rhs_with_profile(g, &profile) {
            Ok(x) => x,
            Err(Error::UndefinedInvariant(_)) => {
                rewards.push(None);
                continue;
            }
            Err(e) => return Err(e),
        };
        let reward = mu - rhs;
        rewards.push(Some(reward));
        if reward > VIOLATION_TOLERANCE {
            reports.push(ViolationReport {
                bound_id: s.id,
                g6: g6.get_or_insert_with(|| to_graph6(g)).clone(),
                mu,
                rhs,
                reward,
                source,
            });
        }
    }
    Ok(GraphResult { reports, rewards })
}

/// Checks every connected graph of order `n` (maximum degree at most
/// `max_degree`) against the bounds `ids`.
pub fn exhaustive_scan<S>(
    ids: &[u32],
    n: usize,
    max_degree: Option<usize>,
    options: ScanOptions,
    mut sink: S,
) -> Result<ScanSummary>
where
    S: FnMut(ViolationReport) -> Result<()>,
{
    let graphs = enumerate_connected(n, max_degree)?;
    let mut scanner = Scanner::new(ids, Source::Enumerated, options.workers, &mut sink)?;
    for g in graphs {
        scanner.push(g)?;
    }
    scanner.finish()
}

/// As [`exhaustive_scan`] over newline-delimited graph6 input. Blank lines
/// are ignored; every other line is either scanned or skipped.
pub fn stream_scan<R, S>(ids: &[u32], input: R, options: ScanOptions, mut sink: S) -> Result<ScanSummary>
where
    R: BufRead,
    S: FnMut(ViolationReport) -> Result<()>,
{
    let mut scanner = Scanner::new(ids, Source::Stream, options.workers, &mut sink)?;
    for (_, parsed) in read_graph6_lines(input) {
        match parsed {
            Ok(g) => scanner.push(g)?,
            Err(e @ Error::Parse { .. }) if options.strict => return Err(e),
            Err(Error::Parse { .. }) => {
                scanner.summary.skipped += 1;
                scanner.summary.malformed += 1;
            }
            Err(e) => return Err(e),
        }
    }
    scanner.finish()
}

/// Stars `K_{1,n−1}` for `n = 3..=max_star_order` and windmills with
/// `k = 1..=max_windmill_blades` triangles.
pub fn family_scan<S>(
    ids: &[u32],
    max_star_order: usize,
    max_windmill_blades: usize,
    options: ScanOptions,
    mut sink: S,
) -> Result<ScanSummary>
where
    S: FnMut(ViolationReport) -> Result<()>,
{
    let mut scanner = Scanner::new(ids, Source::Family, options.workers, &mut sink)?;
    for n in 3..=max_star_order {
        scanner.push(generate_star(n)?)?;
    }
    for k in 1..=max_windmill_blades {
        scanner.push(generate_windmill(k)?)?;
    }
    scanner.finish()
}

/// [`exhaustive_scan`] collecting the reports.
pub fn exhaustive_check(
    ids: &[u32],
    n: usize,
    max_degree: Option<usize>,
) -> Result<(Vec<ViolationReport>, ScanSummary)> {
    let mut reports = Vec::new();
    let summary = exhaustive_scan(ids, n, max_degree, ScanOptions::default(), |r| {
        reports.push(r);
        Ok(())
    })?;
    Ok((reports, summary))
}

/// [`stream_scan`] collecting the reports.
pub fn stream_check<R: BufRead>(
    ids: &[u32],
    input: R,
    strict: bool,
) -> Result<(Vec<ViolationReport>, ScanSummary)> {
    let mut reports = Vec::new();
    let options = ScanOptions { workers: 0, strict };
    let summary = stream_scan(ids, input, options, |r| {
        reports.push(r);
        Ok(())
    })?;
    Ok((reports, summary))
}

/// μ, right-hand side and reward of each bound on one connected graph.
pub fn check_single(g6: &str, ids: &[u32]) -> Result<Vec<(u32, Evaluation)>> {
    let g = from_graph6(g6.trim())?;
    let specs = resolve_bounds(ids)?;
    let evals = crate::bounds::evaluate_many(&specs, &g)?;
    Ok(specs.iter().map(|s| s.id).zip(evals).collect())
}

pub const REPORT_HEADER: [&str; 6] = ["bound_id", "g6", "mu", "rhs", "reward", "source"];

/// CSV report file, flushed after every row.
pub struct ReportWriter<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> ReportWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut out = csv::Writer::from_writer(out);
        out.write_record(REPORT_HEADER)?;
        out.flush()?;
        Ok(ReportWriter { out })
    }

    pub fn write(&mut self, r: &ViolationReport) -> Result<()> {
        self.out.write_record([
            r.bound_id.to_string(),
            r.g6.clone(),
            r.mu.to_string(),
            r.rhs.to_string(),
            r.reward.to_string(),
            r.source.to_string(),
        ])?;
        self.out.flush()?;
        Ok(())
    }
}
