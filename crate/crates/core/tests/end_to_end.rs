//! Full runs written out and read back through the text formats.

use mpc_emst::euler::{euler_tour_via_hierarchy, pipeline_levels, validate_tour};
use mpc_emst::gen::{generate, parallel_paths, Generator};
use mpc_emst::io::{
    read_cycle, read_hierarchy, read_points, read_spanner, read_tour, read_tree, write_cycle, write_hierarchy,
    write_points, write_spanner, write_tour, write_tree,
};
use mpc_emst::pipeline::check_hierarchy;
use mpc_emst::runtime::{euler_rounds_formula, RoundLedger};
use mpc_emst::tsp::cycle_cost;
use mpc_emst::verify::is_spanning_tree;
use mpc_emst::{solve, AlgorithmConfig, OracleMode, SpannerStrategy};

fn dump<T>(f: impl FnOnce(&mut Vec<u8>) -> mpc_emst::Result<T>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).unwrap();
    buf
}

#[test]
fn outputs_round_trip_through_files() {
    let pts = generate(Generator::GaussianClusters, 200, 3, 5).unwrap();
    let back = read_points(dump(|b| write_points(b, &pts)).as_slice()).unwrap();
    assert_eq!(back, pts);

    let s = solve(&pts, &AlgorithmConfig::for_dim(3).with_seed(2), OracleMode::On).unwrap();
    let tree = read_tree(dump(|b| write_tree(b, &s.pipeline.tree)).as_slice()).unwrap();
    assert_eq!(tree, s.pipeline.tree);

    let tour = read_tour(dump(|b| write_tour(b, &s.tour.tour)).as_slice()).unwrap();
    validate_tour(&tour, &tree.pairs()).unwrap();

    let order = read_cycle(dump(|b| write_cycle(b, &s.cycle)).as_slice()).unwrap();
    assert_eq!(cycle_cost(&order, &pts), s.cycle.cost);

    let levels = read_hierarchy(dump(|b| write_hierarchy(b, &s.pipeline.hierarchy)).as_slice()).unwrap();
    assert_eq!(levels, s.pipeline.hierarchy.levels);

    let spanner = read_spanner(dump(|b| write_spanner(b, &s.pipeline.spanner)).as_slice()).unwrap();
    for (e, edges) in spanner {
        assert_eq!(edges, s.pipeline.spanner.at(e).as_slice());
    }
}

#[test]
fn hierarchy_tour_at_300_points() {
    let pts = generate(Generator::Uniform, 300, 2, 8).unwrap();
    let s = solve(&pts, &AlgorithmConfig::for_dim(2).with_seed(8), OracleMode::Off).unwrap();
    let micro = pipeline_levels(&s.pipeline.hierarchy).unwrap();
    let mut ledger = RoundLedger::default();
    let out = euler_tour_via_hierarchy(&micro.levels, &micro.edges, &mut ledger).unwrap();
    validate_tour(&out.tour, &s.pipeline.tree.pairs()).unwrap();
    assert!(out.padded_levels.is_power_of_two());
    assert_eq!(ledger.rounds, euler_rounds_formula(out.padded_levels, out.base_diameter, ledger.costs()));
    assert!(s.report.tour.max_level_diameter as u64 <= s.report.tour.diameter_bound);
}

#[test]
fn every_strategy_on_the_parallel_paths_instance() {
    let pts = parallel_paths(3, 40, 4, 16.0).unwrap();
    for strategy in SpannerStrategy::ALL {
        let cfg = AlgorithmConfig::for_dim(4).with_strategy(strategy);
        let s = solve(&pts, &cfg, OracleMode::On).unwrap();
        assert!(is_spanning_tree(pts.len(), &s.pipeline.tree.pairs()));
        check_hierarchy(&s.pipeline).unwrap();
        let ratio = s.report.ratio.unwrap();
        assert!((1.0..4.0).contains(&ratio), "{strategy}: ratio {ratio}");
    }
}

#[test]
fn projection_and_strict_memory_are_reported() {
    let pts = generate(Generator::Uniform, 120, 32, 1).unwrap();
    let mut cfg = AlgorithmConfig::for_dim(32);
    cfg.jl_dim = Some(8);
    cfg.strict_memory = true;
    cfg.machine_memory_s = 16;
    let s = solve(&pts, &cfg, OracleMode::On).unwrap();
    assert!(s.report.projected);
    assert_eq!(s.report.working_dim, 8);
    assert_eq!(s.report.ledger.rounds, s.report.rounds_formula);
    // A 32-coordinate record cannot sit on a 16-word machine.
    assert!(s.report.memory_violations.iter().any(|v| v.record_words > 16));
}

#[test]
fn single_point_runs() {
    let pts = mpc_emst::PointSet::from_rows(&[[4.0, 4.0, 4.0]]).unwrap();
    let s = solve(&pts, &AlgorithmConfig::for_dim(3), OracleMode::On).unwrap();
    assert_eq!(s.report.tree_edges, 0);
    assert_eq!(s.cycle.order, vec![0]);
    assert!(s.tour.tour.is_empty());
}
