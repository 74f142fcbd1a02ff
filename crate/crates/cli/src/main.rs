//! `emst`: generate point sets, run the pipeline, verify invariants, benchmark.

mod commands;
mod error;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mpc_emst::gen::{Generator, DEFAULT_PATH_SPACING};
use mpc_emst::verify::VerifyOptions;
use mpc_emst::SpannerStrategy;

use commands::{BenchArgs, GenArgs, RunArgs, VerifyArgs};
use error::CliError;
use settings::AlgorithmFlags;

#[derive(Parser)]
#[command(name = "emst", version, about = "Approximate Euclidean MST and TSP on a simulated MPC machine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic point file.
    Gen {
        /// uniform, gaussian-clusters or parallel-paths.
        kind: Generator,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shifted copies for parallel-paths (default min(d, 3)).
        #[arg(long)]
        k: Option<usize>,
        /// Path length for parallel-paths; the output then has (k+1)*len points.
        #[arg(long)]
        len: Option<usize>,
        /// Gap between parallel copies.
        #[arg(long, default_value_t = DEFAULT_PATH_SPACING)]
        spacing: f64,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the tree, its Euler tour and the shortcut cycle.
    Run {
        #[arg(long)]
        input: PathBuf,
        /// Writes report.json, tree.txt, tour.txt, cycle.txt and hierarchy.txt here;
        /// without it the report goes to stdout.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Also write spanner.txt.
        #[arg(long)]
        dump_spanner: bool,
        #[command(flatten)]
        flags: AlgorithmFlags,
    },
    /// Run invariant suites and print per-suite counts.
    Verify {
        /// Comma-separated subset of tour, hierarchy, sandwich, compression, cut.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Trials per compression depth and per cut-rate cell.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Largest pipeline instance.
        #[arg(long, default_value_t = 300)]
        max_n: usize,
        /// Random join instances in the tour suite.
        #[arg(long, default_value_t = 500)]
        joins: usize,
    },
    /// Emit a CSV of tree cost, ratio, rounds and space over a grid.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "100,300")]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        d: Vec<usize>,
        /// Seeds 0..SEEDS per cell.
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        #[arg(long, value_delimiter = ',', default_value = "cell-leader")]
        strategy: Vec<SpannerStrategy>,
        #[arg(long, default_value = "uniform")]
        gen: Generator,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Gen { kind, n, d, seed, k, len, spacing, out } => {
            commands::gen(GenArgs { kind, n, d, seed, k, len, spacing, out })?;
        }
        Command::Run { input, out_dir, dump_spanner, flags } => {
            commands::run(RunArgs { input, out_dir, dump_spanner, flags })?;
        }
        Command::Verify { suite, seed, trials, max_n, joins } => {
            let options = VerifyOptions { seed, max_n, trials, join_instances: joins };
            return commands::verify(VerifyArgs { suite, options });
        }
        Command::Bench { n, d, seeds, strategy, gen, out } => {
            commands::bench(BenchArgs { ns: n, ds: d, seeds, strategies: strategy, kind: gen, out })?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("emst: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
