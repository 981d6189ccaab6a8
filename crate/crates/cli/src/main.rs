use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{error::ErrorKind, Args, Parser, Subcommand};

use cemagraph::bounds::{lookup, registry, BOUND_COUNT};
use cemagraph::graph6::to_graph6;
use cemagraph::Error;
use cemagraph::search::{
    check_single, exhaustive_scan, family_scan, stream_scan, ReportWriter, ScanOptions,
    ScanSummary, ViolationReport, VIOLATION_TOLERANCE,
};
use cemagraph::trainer::{train, RunRecorder, TrainConfig};

const FOUND: u8 = 0;
const NOT_FOUND: u8 = 1;
const FAILURE: u8 = 2;
const USAGE: u8 = 64;

const EXAMPLES: &str = "\
Examples:
  cemagraph list-bounds
  cemagraph check Bw --bound 1
  cemagraph scan --n 6 --bound 1,2,3
  cemagraph families --stars 50 --windmills 24
  cemagraph train --bound 31 --n 12 --num-generations 20 --seed 7 --out-dir run31

Exit status: 0 when a counterexample is found (check, scan, train) or the
family check passes, 1 otherwise, 2 on errors, 64 on usage errors.
Every flag can also be set through an environment variable named
CEMAGRAPH_<FLAG>, e.g. CEMAGRAPH_SEED=7.";

#[derive(Parser, Debug)]
#[command(
    name = "cemagraph",
    version,
    about = "Search for counterexamples to Laplacian spectral radius bounds",
    after_help = EXAMPLES
)]
struct Cli {
    /// Parallel evaluation width (0 = all cores).
    #[arg(long, global = true, default_value_t = 0, env = "CEMAGRAPH_WORKERS")]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train the cross-entropy agent against one bound.
    Train(TrainArgs),
    /// Evaluate bounds on a single graph given in graph6.
    Check {
        graph6: String,
        #[command(flatten)]
        bounds: BoundList,
    },
    /// Check bounds on every connected graph of a family or a graph6 stream.
    Scan(ScanArgs),
    /// Check bounds on stars and windmills.
    Families {
        /// Stars on 3..=N vertices.
        #[arg(long, default_value_t = 50, env = "CEMAGRAPH_STARS")]
        stars: usize,
        /// Windmills with 1..=K triangles.
        #[arg(long, default_value_t = 24, env = "CEMAGRAPH_WINDMILLS")]
        windmills: usize,
        #[command(flatten)]
        bounds: BoundList,
    },
    /// Print the built-in bounds.
    ListBounds,
}

#[derive(Args, Debug)]
struct BoundList {
    /// Bound ids, comma separated (default: all).
    #[arg(
        long = "bound",
        value_delimiter = ',',
        value_parser = clap::value_parser!(u32).range(1..=BOUND_COUNT as i64),
        env = "CEMAGRAPH_BOUND"
    )]
    ids: Vec<u32>,
}

impl BoundList {
    fn resolved(&self) -> Vec<u32> {
        if self.ids.is_empty() {
            (1..=BOUND_COUNT).collect()
        } else {
            self.ids.clone()
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Bound to attack (1..=68).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=BOUND_COUNT as i64), env = "CEMAGRAPH_BOUND")]
    bound: u32,
    #[arg(long, default_value_t = 20, env = "CEMAGRAPH_N")]
    n: usize,
    #[arg(long, default_value_t = 200, env = "CEMAGRAPH_BATCH_SIZE")]
    batch_size: usize,
    #[arg(long, default_value_t = 1000, env = "CEMAGRAPH_NUM_GENERATIONS")]
    num_generations: usize,
    #[arg(long, default_value_t = 90.0, env = "CEMAGRAPH_PERCENT_LEARN")]
    percent_learn: f64,
    #[arg(long, default_value_t = 97.5, env = "CEMAGRAPH_PERCENT_SURVIVE")]
    percent_survive: f64,
    /// Hidden layer widths.
    #[arg(long, value_delimiter = ',', default_value = "72,12", env = "CEMAGRAPH_NEURONS")]
    neurons: Vec<usize>,
    #[arg(long, default_value_t = 0.003, env = "CEMAGRAPH_LEARNING_RATE")]
    learning_rate: f64,
    #[arg(long, default_value_t = 0.005, env = "CEMAGRAPH_ACT_RNDNESS_INIT")]
    act_rndness_init: f64,
    #[arg(long, default_value_t = 10, env = "CEMAGRAPH_ACT_RNDNESS_WAIT")]
    act_rndness_wait: usize,
    #[arg(long, default_value_t = 1.1, env = "CEMAGRAPH_ACT_RNDNESS_MULT")]
    act_rndness_mult: f64,
    #[arg(long, default_value_t = 0.025, env = "CEMAGRAPH_ACT_RNDNESS_MAX")]
    act_rndness_max: f64,
    /// Print one summary line per generation.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, env = "CEMAGRAPH_VERBOSE")]
    verbose: bool,
    /// Snapshot the best graph every this many generations (0 = never).
    #[arg(long, default_value_t = 25, env = "CEMAGRAPH_OUTPUT_BEST_GRAPH_RATE")]
    output_best_graph_rate: usize,
    #[arg(long, default_value_t = 0, env = "CEMAGRAPH_SEED")]
    seed: u64,
    #[arg(long, default_value = "run", env = "CEMAGRAPH_OUT_DIR")]
    out_dir: PathBuf,
    /// Fill the `ms` column of stats.csv (makes the file run-dependent).
    #[arg(long, env = "CEMAGRAPH_RECORD_TIME")]
    record_time: bool,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("family").required(true).args(["n", "stdin", "input"])))]
struct ScanArgs {
    /// Order of the enumerated graphs.
    #[arg(long, env = "CEMAGRAPH_N")]
    n: Option<usize>,
    /// Maximum degree of the enumerated graphs.
    #[arg(long, requires = "n", env = "CEMAGRAPH_MAX_DEGREE")]
    max_degree: Option<usize>,
    /// Read graph6 lines from standard input.
    #[arg(long)]
    stdin: bool,
    /// Read graph6 lines from a file.
    #[arg(long, env = "CEMAGRAPH_INPUT")]
    input: Option<PathBuf>,
    /// Write violations here instead of standard output.
    #[arg(long, env = "CEMAGRAPH_REPORT")]
    report: Option<PathBuf>,
    /// Skip malformed graph6 lines instead of stopping.
    #[arg(long, env = "CEMAGRAPH_LENIENT")]
    lenient: bool,
    #[command(flatten)]
    bounds: BoundList,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(USAGE),
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(FAILURE)
        }
    }
}

fn run(cli: Cli) -> cemagraph::Result<u8> {
    let workers = cli.workers;
    match cli.command {
        Command::Train(args) => cmd_train(args, workers),
        Command::Check { graph6, bounds } => cmd_check(&graph6, &bounds.resolved()),
        Command::Scan(args) => cmd_scan(args, workers),
        Command::Families {
            stars,
            windmills,
            bounds,
        } => cmd_families(stars, windmills, &bounds.resolved(), workers),
        Command::ListBounds => cmd_list_bounds(),
    }
}

fn cmd_train(a: TrainArgs, workers: usize) -> cemagraph::Result<u8> {
    let bound = lookup(a.bound)?;
    let config = TrainConfig {
        n: a.n,
        batch_size: a.batch_size,
        num_generations: a.num_generations,
        percent_learn: a.percent_learn,
        percent_survive: a.percent_survive,
        neurons: a.neurons,
        learning_rate: a.learning_rate,
        act_rndness_init: a.act_rndness_init,
        act_rndness_wait: a.act_rndness_wait,
        act_rndness_mult: a.act_rndness_mult,
        act_rndness_max: a.act_rndness_max,
        verbose: a.verbose,
        output_best_graph_rate: a.output_best_graph_rate,
        seed: a.seed,
        workers,
    };
    config.validate()?;

    let stop = Arc::new(AtomicBool::new(false));
    {
        let stop = Arc::clone(&stop);
        // without a handler Ctrl-C just kills the run
        let _ = ctrlc::set_handler(move || stop.store(true, Ordering::SeqCst));
    }

    let mut recorder = RunRecorder::create(&a.out_dir, a.output_best_graph_rate, a.record_time)?;
    let verbose = config.verbose;
    let outcome = train(config, |g| bound.reward(g), |s| {
        recorder.record(s)?;
        if verbose {
            println!(
                "gen {}: max reward {:.6}, generation max {:.6}, survive threshold {:.6}, \
                 learn threshold {:.6}, act_rndness {:.5}, {} ms",
                s.generation,
                s.max_reward_alltime,
                s.max_reward_gen,
                s.survive_threshold,
                s.learn_threshold,
                s.act_rndness,
                s.elapsed.as_millis()
            );
        }
        Ok(!stop.load(Ordering::SeqCst))
    })?;
    if stop.load(Ordering::SeqCst) {
        eprintln!("interrupted after {} generations", outcome.generations);
    }
    recorder.finish(&outcome)?;
    match &outcome.best {
        Some(best) => {
            println!("best reward {}", best.reward);
            println!("best graph {}", to_graph6(&best.graph));
            Ok(if best.reward > VIOLATION_TOLERANCE {
                FOUND
            } else {
                NOT_FOUND
            })
        }
        None => Ok(NOT_FOUND),
    }
}

fn cmd_check(g6: &str, ids: &[u32]) -> cemagraph::Result<u8> {
    let rows = check_single(g6, ids)?;
    let mut out = io::stdout().lock();
    let mut found = false;
    for (id, e) in rows {
        writeln!(
            out,
            "bound {id:>2}: mu={} rhs={} reward={}",
            e.mu, e.rhs, e.reward
        )?;
        found |= e.reward > VIOLATION_TOLERANCE;
    }
    Ok(if found { FOUND } else { NOT_FOUND })
}

fn cmd_scan(a: ScanArgs, workers: usize) -> cemagraph::Result<u8> {
    let ids = a.bounds.resolved();
    let options = ScanOptions {
        workers,
        strict: !a.lenient,
    };
    let out: Box<dyn Write> = match &a.report {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut report = ReportWriter::new(out)?;
    let sink = |r: ViolationReport| report.write(&r);
    let summary = if let Some(n) = a.n {
        exhaustive_scan(&ids, n, a.max_degree, options, sink)?
    } else if let Some(path) = &a.input {
        stream_scan(&ids, BufReader::new(File::open(path)?), options, sink)?
    } else {
        stream_scan(&ids, io::stdin().lock(), options, sink)?
    };
    print_summary(&summary);
    Ok(if summary.violations > 0 { FOUND } else { NOT_FOUND })
}

fn cmd_families(stars: usize, windmills: usize, ids: &[u32], workers: usize) -> cemagraph::Result<u8> {
    let options = ScanOptions {
        workers,
        strict: true,
    };
    let mut report = ReportWriter::new(io::stdout().lock())?;
    let summary = family_scan(ids, stars, windmills, options, |r| report.write(&r))?;
    print_summary(&summary);
    Ok(if summary.violations == 0 { FOUND } else { NOT_FOUND })
}

fn print_summary(s: &ScanSummary) {
    eprintln!(
        "scanned {} graphs, skipped {} ({} malformed), {} violations, {} undefined evaluations",
        s.scanned, s.skipped, s.malformed, s.violations, s.undefined
    );
    let worst = s
        .max_reward
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1));
    if let Some((id, r)) = worst.filter(|w| w.1.is_finite()) {
        eprintln!("largest reward {r} (bound {id})");
    }
}

fn cmd_list_bounds() -> cemagraph::Result<u8> {
    let mut out = io::stdout().lock();
    writeln!(out, "id\tfamily\tstatus\twitness\trhs")?;
    for b in registry() {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            b.id,
            b.family(),
            b.status,
            b.subquartic_witness.unwrap_or("-"),
            b.expression
        )?;
    }
    Ok(FOUND)
}
