//! End-to-end runs and their JSON report.

use serde::{Deserialize, Serialize};

use crate::config::{AlgorithmConfig, TheoryCheck};
use crate::error::Result;
use crate::euler::{euler_tour_via_hierarchy, level_cluster_diameters, pipeline_levels, HierarchyTour};
use crate::geometry::PointSet;
use crate::levels::level_t;
use crate::oracle::{exact_mst, ORACLE_MAX_N};
use crate::pipeline::{run_pipeline, PipelineOutput};
use crate::runtime::{euler_rounds_formula, rounds_formula, MemoryViolation, RoundLedger};
use crate::tsp::{shortcut, HamiltonianCycle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OracleMode {
    /// Run the exact oracle when `n` is within its cap.
    #[default]
    Auto,
    On,
    Off,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelCount {
    pub t: f64,
    pub components: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TourSummary {
    pub rounds: u64,
    pub rounds_formula: u64,
    pub padded_levels: usize,
    pub iterations: u32,
    pub base_diameter: usize,
    /// Largest cluster-tree hop diameter over pipeline levels.
    pub max_level_diameter: usize,
    pub diameter_bound: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    pub d: usize,
    pub working_dim: usize,
    pub projected: bool,
    pub degenerate: bool,
    pub config: AlgorithmConfig,
    pub tree_edges: usize,
    pub tree_cost: f64,
    pub exact_mst_cost: Option<f64>,
    pub ratio: Option<f64>,
    pub cycle_cost: f64,
    pub ledger: RoundLedger,
    pub rounds_formula: u64,
    pub tour: TourSummary,
    pub per_level_component_counts: Vec<LevelCount>,
    pub spanner_fallback_cells: usize,
    pub spanner_over_budget_cells: usize,
    pub memory_violations: Vec<MemoryViolation>,
    pub theory_check: Vec<TheoryCheck>,
}

/// Everything one run produces.
#[derive(Clone, Debug)]
pub struct Solution {
    pub pipeline: PipelineOutput,
    pub tour: HierarchyTour,
    pub cycle: HamiltonianCycle,
    pub exact: Option<(Vec<(u32, u32)>, f64)>,
    pub report: RunReport,
}

/// Tree, tour and cycle for `points`, plus the report.
pub fn solve(points: &PointSet, config: &AlgorithmConfig, oracle: OracleMode) -> Result<Solution> {
    let pipeline = run_pipeline(points, config)?;
    let micro = pipeline_levels(&pipeline.hierarchy)?;
    let mut euler_ledger = pipeline.ledger.child();
    let tour = euler_tour_via_hierarchy(&micro.levels, &micro.edges, &mut euler_ledger)?;
    let cycle = shortcut(&tour.tour, points)?;

    let n = points.len();
    let run_oracle = match oracle {
        OracleMode::Auto => n <= ORACLE_MAX_N,
        OracleMode::On => true,
        OracleMode::Off => false,
    };
    let exact = if run_oracle { Some(exact_mst(points)?) } else { None };
    let tree_cost = pipeline.tree.cost();
    let ratio = exact.as_ref().map(|&(_, w)| {
        // A unique tree (n <= 2) or a zero-length one compares as exact.
        if n <= 2 || w == 0.0 {
            1.0
        } else {
            tree_cost / w
        }
    });

    let diameters = level_cluster_diameters(&pipeline.hierarchy);
    let costs = pipeline.ledger.costs().clone();
    let mut violations = pipeline.ledger.violations.clone();
    violations.extend(euler_ledger.violations.iter().cloned());
    let report = RunReport {
        n,
        d: points.dim(),
        working_dim: pipeline.normalized.points.dim(),
        projected: pipeline.projected,
        degenerate: pipeline.normalized.degenerate,
        config: config.clone(),
        tree_edges: pipeline.tree.edges.len(),
        tree_cost,
        exact_mst_cost: exact.as_ref().map(|e| e.1),
        ratio,
        cycle_cost: cycle.cost,
        ledger: pipeline.ledger.clone(),
        rounds_formula: rounds_formula(config, pipeline.projected, &costs),
        tour: TourSummary {
            rounds: euler_ledger.rounds,
            rounds_formula: euler_rounds_formula(tour.padded_levels, tour.base_diameter, &costs),
            padded_levels: tour.padded_levels,
            iterations: tour.iterations,
            base_diameter: tour.base_diameter,
            max_level_diameter: diameters.values().copied().max().unwrap_or(0),
            diameter_bound: diameter_bound(config.h),
        },
        per_level_component_counts: pipeline
            .hierarchy
            .component_counts()
            .into_iter()
            .map(|(e, components)| LevelCount { t: level_t(e), components })
            .collect(),
        spanner_fallback_cells: pipeline.spanner_fallbacks,
        spanner_over_budget_cells: pipeline.spanner_over_budget,
        memory_violations: violations,
        theory_check: config.theory_check(n, points.dim()),
    };
    Ok(Solution { pipeline, tour, cycle, exact, report })
}

/// Diagnostic cap on a level's cluster-tree diameter: `2 * 5^h + 2`.
pub fn diameter_bound(h: u32) -> u64 {
    2 * 5u64.saturating_pow(h) + 2
}
