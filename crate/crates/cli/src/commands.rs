use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use mpc_emst::gen::{generate, parallel_paths, Generator, DEFAULT_PATH_SPACING};
use mpc_emst::io::{read_points, write_cycle, write_hierarchy, write_points, write_spanner, write_tour, write_tree};
use mpc_emst::oracle::ORACLE_MAX_N;
use mpc_emst::verify::{parse_suites, run_suites, Suite, VerifyOptions};
use mpc_emst::{solve, AlgorithmConfig, OracleMode, PointSet, SpannerStrategy};
use serde::Serialize;

use crate::error::CliError;
use crate::settings::AlgorithmFlags;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(CliError::io(path))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> mpc_emst::Result<()>) -> Result<(), CliError> {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush().map_err(CliError::io(path))
}

pub fn load_points(path: &Path) -> Result<PointSet, CliError> {
    let file = File::open(path).map_err(CliError::io(path))?;
    read_points(BufReader::new(file)).map_err(|source| CliError::Input { path: path.to_path_buf(), source })
}

pub struct GenArgs {
    pub kind: Generator,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub k: Option<usize>,
    pub len: Option<usize>,
    pub spacing: f64,
    pub out: Option<PathBuf>,
}

pub fn gen(args: GenArgs) -> Result<(), CliError> {
    let points = match (args.kind, args.len) {
        (Generator::ParallelPaths, Some(len)) => {
            let k = args.k.unwrap_or(args.d.min(3));
            parallel_paths(k, len, args.d, args.spacing)?
        }
        (Generator::ParallelPaths, None) if args.k.is_some() || args.spacing != DEFAULT_PATH_SPACING => {
            return Err(CliError::Usage("--k and --spacing need --len".into()));
        }
        (_, Some(_)) => return Err(CliError::Usage("--len only applies to parallel-paths".into())),
        _ => generate(args.kind, args.n, args.d, args.seed)?,
    };
    match args.out {
        Some(path) => write_file(&path, |w| write_points(w, &points)),
        None => write_points(std::io::stdout().lock(), &points).map_err(Into::into),
    }
}

pub struct RunArgs {
    pub input: PathBuf,
    pub out_dir: Option<PathBuf>,
    pub dump_spanner: bool,
    pub flags: AlgorithmFlags,
}

pub fn run(args: RunArgs) -> Result<(), CliError> {
    let points = load_points(&args.input)?;
    let (config, oracle) = args.flags.resolve(points.dim())?;
    let solution = solve(&points, &config, oracle)?;
    let report = serde_json::to_string_pretty(&solution.report).expect("report serializes") + "\n";
    let Some(dir) = args.out_dir else {
        print!("{report}");
        return Ok(());
    };
    std::fs::create_dir_all(&dir).map_err(CliError::io(&dir))?;
    let report_path = dir.join("report.json");
    std::fs::write(&report_path, &report).map_err(CliError::io(&report_path))?;
    write_file(&dir.join("tree.txt"), |w| write_tree(w, &solution.pipeline.tree))?;
    write_file(&dir.join("tour.txt"), |w| write_tour(w, &solution.tour.tour))?;
    write_file(&dir.join("cycle.txt"), |w| write_cycle(w, &solution.cycle))?;
    write_file(&dir.join("hierarchy.txt"), |w| write_hierarchy(w, &solution.pipeline.hierarchy))?;
    if args.dump_spanner {
        write_file(&dir.join("spanner.txt"), |w| write_spanner(w, &solution.pipeline.spanner))?;
    }
    let r = &solution.report;
    let ratio = r.ratio.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"));
    println!(
        "n={} d={} tree_cost={} cycle_cost={} ratio={ratio} rounds={} tour_rounds={}",
        r.n, r.d, r.tree_cost, r.cycle_cost, r.ledger.rounds, r.tour.rounds
    );
    Ok(())
}

pub struct VerifyArgs {
    pub suite: Option<String>,
    pub options: VerifyOptions,
}

/// Runs the selected suites; `Ok(false)` when any check failed.
pub fn verify(args: VerifyArgs) -> Result<bool, CliError> {
    let suites = match &args.suite {
        Some(list) => parse_suites(list).map_err(|e| CliError::Usage(e.to_string()))?,
        None => Suite::ALL.to_vec(),
    };
    if suites.is_empty() {
        println!("no suites selected: pass");
        return Ok(true);
    }
    let mut all = true;
    for r in run_suites(&suites, &args.options)? {
        all &= r.passed();
        println!(
            "{:<12} {:>6} checks {:>4} failures  {}",
            r.suite.name(),
            r.checks,
            r.failures.len(),
            if r.passed() { "PASS" } else { "FAIL" }
        );
        for f in r.failures.iter().take(5) {
            println!("    {f}");
        }
    }
    Ok(all)
}

pub struct BenchArgs {
    pub ns: Vec<usize>,
    pub ds: Vec<usize>,
    pub seeds: u64,
    pub strategies: Vec<SpannerStrategy>,
    pub kind: Generator,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct BenchRow {
    n: usize,
    d: usize,
    seed: u64,
    strategy: SpannerStrategy,
    tree_cost: f64,
    exact_cost: f64,
    ratio: f64,
    rounds: u64,
    space: u64,
    wall_ms: u128,
}

pub fn bench(args: BenchArgs) -> Result<(), CliError> {
    if let Some(&n) = args.ns.iter().find(|&&n| n > ORACLE_MAX_N) {
        return Err(CliError::Usage(format!("n = {n} exceeds the oracle cap of {ORACLE_MAX_N}")));
    }
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut csv = csv::Writer::from_writer(sink);
    for &n in &args.ns {
        for &d in &args.ds {
            for seed in 0..args.seeds {
                let points = generate(args.kind, n, d, seed)?;
                for &strategy in &args.strategies {
                    let config = AlgorithmConfig::for_dim(d).with_seed(seed).with_strategy(strategy);
                    let start = Instant::now();
                    let s = solve(&points, &config, OracleMode::On)?;
                    let wall_ms = start.elapsed().as_millis();
                    let r = &s.report;
                    csv.serialize(BenchRow {
                        n,
                        d,
                        seed,
                        strategy,
                        tree_cost: r.tree_cost,
                        exact_cost: r.exact_mst_cost.expect("oracle on"),
                        ratio: r.ratio.expect("oracle on"),
                        rounds: r.ledger.rounds + r.tour.rounds,
                        space: r.ledger.total_space_words,
                        wall_ms,
                    })?;
                }
            }
        }
    }
    csv.flush().map_err(CliError::io(args.out.unwrap_or_else(|| "<stdout>".into())))?;
    Ok(())
}
