//! Browser bindings. Every export returns a JSON string; errors come back as
//! `{"error": "..."}` so the page never has to catch.

use mpc_emst::gen::{generate, Generator};
use mpc_emst::verify::{compression_decay, cut_rate, test_graph, TestGraph};
use mpc_emst::{solve, AlgorithmConfig, OracleMode, SpannerStrategy};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest instance the page will run; the exact oracle is quadratic.
/// Seeds are `u32` so the page can pass plain numbers.
pub const MAX_POINTS: usize = 2000;

#[derive(Serialize)]
struct PipelineView {
    points: Vec<[f64; 2]>,
    tree: Vec<(u32, u32)>,
    exact: Vec<(u32, u32)>,
    cycle: Vec<u32>,
    tree_cost: f64,
    exact_cost: f64,
    ratio: f64,
    cycle_cost: f64,
    rounds: u64,
    tour_rounds: u64,
}

fn to_json<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

fn pipeline_view(kind: &str, n: usize, seed: u64, strategy: &str, h: u32) -> Result<PipelineView, String> {
    if n > MAX_POINTS {
        return Err(format!("at most {MAX_POINTS} points"));
    }
    let kind: Generator = kind.parse().map_err(|e: mpc_emst::Error| e.to_string())?;
    let points = generate(kind, n, 2, seed).map_err(|e| e.to_string())?;
    let mut config = AlgorithmConfig::for_dim(2);
    config.seed = seed;
    config.h = h;
    config.strategy = strategy.parse::<SpannerStrategy>().map_err(|e| e.to_string())?;
    let sol = solve(&points, &config, OracleMode::On).map_err(|e| e.to_string())?;
    let (exact, exact_cost) = sol.exact.clone().unwrap_or_default();
    Ok(PipelineView {
        points: points.rows().map(|p| [p[0], p[1]]).collect(),
        tree: sol.pipeline.tree.pairs(),
        exact,
        cycle: sol.cycle.order.clone(),
        tree_cost: sol.report.tree_cost,
        exact_cost,
        ratio: sol.report.ratio.unwrap_or(1.0),
        cycle_cost: sol.report.cycle_cost,
        rounds: sol.report.ledger.rounds,
        tour_rounds: sol.report.tour.rounds,
    })
}

/// Generates `n` planar points and runs the whole pipeline on them.
#[wasm_bindgen]
pub fn run_pipeline_demo(kind: &str, n: usize, seed: u32, strategy: &str, h: u32) -> String {
    to_json(pipeline_view(kind, n, seed.into(), strategy, h))
}

/// Mean leftover components after each compression round, against the `(3/4)^h` bound.
#[wasm_bindgen]
pub fn leader_compression_demo(graph: &str, n: usize, rounds: u32, trials: usize, seed: u32) -> String {
    let kind = match graph {
        "path" => TestGraph::Path,
        "star" => TestGraph::Star,
        "random" => TestGraph::Random,
        other => return error_json(&format!("unknown graph {other:?}")),
    };
    if n < 2 || n > 100_000 || trials == 0 || trials > 10_000 || rounds == 0 || rounds > 64 {
        return error_json("need 2 <= n <= 100000, 1 <= trials <= 10000, 1 <= rounds <= 64");
    }
    let g = test_graph(kind, n, seed.into());
    to_json(Ok(compression_decay(&g, n, rounds, trials, seed.into())))
}

/// Empirical rate at which a random grid shift separates two points at distance `w`.
#[wasm_bindgen]
pub fn cut_probability_demo(w: f64, side: f64, d: usize, trials: usize, seed: u32) -> String {
    if !(w >= 0.0 && side > 0.0 && w.is_finite() && side.is_finite()) || d == 0 || d > 64 || trials == 0 || trials > 1_000_000 {
        return error_json("need w >= 0, side > 0, 1 <= d <= 64, 1 <= trials <= 1000000");
    }
    to_json(Ok(cut_rate(w, side, d, trials, seed.into())))
}
