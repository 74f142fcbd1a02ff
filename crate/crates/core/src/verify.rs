//! Invariant suites shared by the `verify` command and the acceptance tests.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compression::{leader_compression_round, KeyedCoins};
use crate::config::AlgorithmConfig;
use crate::error::{Error, Result};
use crate::euler::{change_root, dfs_euler_tour, euler_tour_join, validate_tour, EdgeMap, EulerTour, JoinInput};
use crate::gen::{generate, Generator};
use crate::geometry::{cell_of, normalize_aspect, PointSet, ShiftVector};
use crate::oracle::{component_sum, exact_mst, graph_components};
use crate::partition::Partition;
use crate::pipeline::{check_hierarchy, run_pipeline};
use crate::report::{solve, OracleMode};
use crate::spanner::EdgeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Tour,
    Hierarchy,
    Sandwich,
    Compression,
    Cut,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Tour, Suite::Hierarchy, Suite::Sandwich, Suite::Compression, Suite::Cut];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Tour => "tour",
            Suite::Hierarchy => "hierarchy",
            Suite::Sandwich => "sandwich",
            Suite::Compression => "compression",
            Suite::Cut => "cut",
        }
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown suite `{s}`")))
    }
}

/// Comma-separated suite names; an empty string selects nothing.
pub fn parse_suites(list: &str) -> Result<Vec<Suite>> {
    let mut out: Vec<Suite> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Largest pipeline instance.
    pub max_n: usize,
    /// Trials per compression depth and per cut-rate cell.
    pub trials: usize,
    pub join_instances: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 1, max_n: 300, trials: 10_000, join_instances: 500 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

pub fn run_suites(suites: &[Suite], opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    suites.iter().map(|&s| run_suite(s, opts)).collect()
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut r = SuiteReport { suite, checks: 0, failures: Vec::new() };
    match suite {
        Suite::Tour => tour_suite(&mut r, opts)?,
        Suite::Hierarchy => hierarchy_suite(&mut r, opts)?,
        Suite::Sandwich => sandwich_suite(&mut r, opts)?,
        Suite::Compression => compression_suite(&mut r, opts),
        Suite::Cut => cut_suite(&mut r, opts),
    }
    Ok(r)
}

/// Small pipeline instances covering every generator.
pub fn suite_instances(opts: &VerifyOptions) -> Result<Vec<(String, PointSet, AlgorithmConfig)>> {
    let mut out = Vec::new();
    let sizes = [60.min(opts.max_n), opts.max_n];
    for (i, kind) in Generator::ALL.into_iter().enumerate() {
        for &n in &sizes {
            for d in [2, 8] {
                let seed = opts.seed.wrapping_add(i as u64 * 1000 + n as u64 + d as u64);
                let pts = generate(kind, n, d, seed)?;
                out.push((format!("{kind} n={n} d={d}"), pts, AlgorithmConfig::for_dim(d).with_seed(seed)));
            }
        }
    }
    Ok(out)
}

/// `n - 1` edges forming one component.
pub fn is_spanning_tree(n: usize, edges: &[(u32, u32)]) -> bool {
    edges.len() + 1 == n && edges.iter().all(|&(u, v)| u != v && (u as usize) < n && (v as usize) < n) && graph_components(n, edges).num_components() == 1
}

fn tour_suite(r: &mut SuiteReport, opts: &VerifyOptions) -> Result<()> {
    for (name, pts, cfg) in suite_instances(opts)? {
        let s = solve(&pts, &cfg, OracleMode::On)?;
        let tree = s.pipeline.tree.pairs();
        r.check(validate_tour(&s.tour.tour, &tree).is_ok(), || format!("{name}: pipeline tour invalid"));
        let exact = s.report.exact_mst_cost.expect("oracle on");
        let (cycle, tree_cost) = (s.cycle.cost, s.report.tree_cost);
        r.check(exact <= cycle && cycle <= 2.0 * tree_cost, || {
            format!("{name}: cycle {cycle} outside [{exact}, 2 * {tree_cost}]")
        });
    }
    for i in 0..opts.join_instances {
        let inst = JoinInstance::random(opts.seed.wrapping_add(i as u64));
        let ok = inst.check_join().is_ok();
        r.check(ok, || format!("join instance {i} failed"));
    }
    Ok(())
}

fn hierarchy_suite(r: &mut SuiteReport, opts: &VerifyOptions) -> Result<()> {
    for (name, pts, cfg) in suite_instances(opts)? {
        let out = run_pipeline(&pts, &cfg)?;
        r.check(is_spanning_tree(pts.len(), &out.tree.pairs()), || format!("{name}: not a spanning tree"));
        let res = check_hierarchy(&out);
        r.check(res.is_ok(), || format!("{name}: {}", res.unwrap_err()));
    }
    Ok(())
}

fn sandwich_suite(r: &mut SuiteReport, opts: &VerifyOptions) -> Result<()> {
    for (name, pts, cfg) in suite_instances(opts)? {
        let norm = normalize_aspect(&pts, &cfg)?;
        let s = component_sum(&norm.points)?;
        let (_, mst) = exact_mst(&norm.points)?;
        r.check(mst <= s && s <= 2.0 * mst, || format!("{name}: S = {s} outside [{mst}, {}]", 2.0 * mst));
    }
    Ok(())
}

fn compression_suite(r: &mut SuiteReport, opts: &VerifyOptions) {
    for kind in TestGraph::ALL {
        for n in [10, 50] {
            let g = test_graph(kind, n, opts.seed);
            for p in compression_decay(&g, n, 6, opts.trials, opts.seed) {
                r.check(p.holds(), || {
                    format!("{kind:?} n={n} h={}: mean excess {} above bound {} + 3 * {}", p.h, p.mean_excess, p.bound, p.std_err)
                });
            }
        }
    }
}

fn cut_suite(r: &mut SuiteReport, opts: &VerifyOptions) {
    for w in [1.0, 4.0] {
        for side in [8.0, 32.0] {
            for d in [1, 2, 8] {
                let c = cut_rate(w, side, d, opts.trials, opts.seed);
                r.check(c.holds(), || format!("w={w} side={side} d={d}: rate {} above {}", c.rate, c.bound));
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestGraph {
    Path,
    Star,
    Random,
}

impl TestGraph {
    pub const ALL: [TestGraph; 3] = [TestGraph::Path, TestGraph::Star, TestGraph::Random];
}

/// Path, star centred at 0, or a sparse random graph with about `1.5 n` edges.
pub fn test_graph(kind: TestGraph, n: usize, seed: u64) -> EdgeSet {
    let n = n as u32;
    let edges: Vec<(u32, u32)> = match kind {
        TestGraph::Path => (1..n).map(|v| (v - 1, v)).collect(),
        TestGraph::Star => (1..n).map(|v| (0, v)).collect(),
        TestGraph::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..3 * n / 2)
                .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
                .filter(|(u, v)| u != v)
                .collect()
        }
    };
    EdgeSet::new(edges).expect("no self-loops")
}

/// Mean of `|P^(h)| - |P (+) H|` over trials, with its bound `(3/4)^h (n - |P (+) H|)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub h: u32,
    pub mean_excess: f64,
    pub std_err: f64,
    pub bound: f64,
}

impl DecayPoint {
    pub fn holds(&self) -> bool {
        self.mean_excess <= self.bound + 3.0 * self.std_err
    }
}

/// Runs `trials` independent compressions of `h_max` rounds from singletons.
pub fn compression_decay(graph: &EdgeSet, n: usize, h_max: u32, trials: usize, seed: u64) -> Vec<DecayPoint> {
    let target = graph_components(n, graph.as_slice()).num_components();
    let mut excess = vec![Vec::with_capacity(trials); h_max as usize];
    for trial in 0..trials {
        let mut p = Partition::singletons(n);
        for round in 0..h_max {
            let coins = KeyedCoins { seed: seed ^ (trial as u64).wrapping_mul(0x9e37_79b9), level: 0, stage: 0, round };
            p = leader_compression_round(&p, graph, false, &coins).partition;
            excess[round as usize].push((p.num_components() - target) as f64);
        }
    }
    excess
        .into_iter()
        .enumerate()
        .map(|(i, xs)| {
            let m = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / m;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
            let h = i as u32 + 1;
            DecayPoint { h, mean_excess: mean, std_err: (var / m).sqrt(), bound: 0.75f64.powi(h as i32) * (n - target) as f64 }
        })
        .collect()
}

/// How often a random shift separates two points at distance `w` into
/// different cells of side `side`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutRate {
    pub w: f64,
    pub side: f64,
    pub d: usize,
    pub trials: usize,
    pub cuts: usize,
    pub rate: f64,
    /// `w sqrt(d) / side`, capped at 1.
    pub bound: f64,
    /// Binomial standard error at the bound.
    pub std_err: f64,
}

impl CutRate {
    pub fn holds(&self) -> bool {
        self.rate <= self.bound + 3.0 * self.std_err
    }
}

pub fn cut_rate(w: f64, side: f64, d: usize, trials: usize, seed: u64) -> CutRate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cuts = 0;
    for _ in 0..trials {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..4.0 * side)).collect();
        let dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        let y: Vec<f64> = x.iter().zip(&dir).map(|(a, u)| a + w * u / norm).collect();
        let shift = ShiftVector { a: (0..d).map(|_| rng.gen_range(0.0..side)).collect(), seed };
        if cell_of(&x, side, &shift) != cell_of(&y, side, &shift) {
            cuts += 1;
        }
    }
    let bound = (w * (d as f64).sqrt() / side).min(1.0);
    CutRate {
        w,
        side,
        d,
        trials,
        cuts,
        rate: cuts as f64 / trials as f64,
        bound,
        std_err: (bound * (1.0 - bound) / trials as f64).sqrt(),
    }
}

/// A random join instance: a tree over 2 to 12 clusters of 1 to 20 nodes.
#[derive(Clone, Debug)]
pub struct JoinInstance {
    pub clusters: BTreeMap<u32, Vec<u32>>,
    pub tree: Vec<(u32, u32)>,
    pub tour: EulerTour,
    pub edge_map: EdgeMap,
    pub subtrees: BTreeMap<u32, Vec<(u32, u32)>>,
    pub subtours: BTreeMap<u32, EulerTour>,
}

fn random_tree(nodes: &[u32], rng: &mut impl Rng) -> Vec<(u32, u32)> {
    (1..nodes.len()).map(|i| (nodes[rng.gen_range(0..i)], nodes[i])).collect()
}

fn random_tour(nodes: &[u32], edges: &[(u32, u32)], rng: &mut impl Rng) -> EulerTour {
    let mut shuffled = edges.to_vec();
    shuffled.shuffle(rng);
    let root = *nodes.choose(rng).expect("non-empty");
    let tour = dfs_euler_tour(&shuffled, root).expect("random tree is a tree");
    let start = *nodes.choose(rng).expect("non-empty");
    change_root(&tour, start).expect("start is on the tour")
}

impl JoinInstance {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(2..=12);
        let sizes: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=20)).collect();
        let total: usize = sizes.iter().sum();
        let mut ids: Vec<u32> = (0..total as u32).collect();
        ids.shuffle(&mut rng);
        let mut cluster_ids: Vec<u32> = (0..1000).collect();
        cluster_ids.shuffle(&mut rng);
        cluster_ids.truncate(k);

        let mut clusters = BTreeMap::new();
        let mut subtrees = BTreeMap::new();
        let mut subtours = BTreeMap::new();
        let mut rest = ids.as_slice();
        for (&c, &size) in cluster_ids.iter().zip(&sizes) {
            let (members, tail) = rest.split_at(size);
            rest = tail;
            let edges = random_tree(members, &mut rng);
            if !edges.is_empty() {
                subtours.insert(c, random_tour(members, &edges, &mut rng));
                subtrees.insert(c, edges);
            }
            clusters.insert(c, members.to_vec());
        }
        let tree = random_tree(&cluster_ids, &mut rng);
        let mut edge_map = EdgeMap::new();
        for &(a, b) in &tree {
            let x = *clusters[&a].choose(&mut rng).expect("non-empty");
            let y = *clusters[&b].choose(&mut rng).expect("non-empty");
            if rng.gen() {
                edge_map.insert((a, b), (x, y));
            } else {
                edge_map.insert((b, a), (y, x));
            }
        }
        let tour = random_tour(&cluster_ids, &tree, &mut rng);
        JoinInstance { clusters, tree, tour, edge_map, subtrees, subtours }
    }

    pub fn input(&self) -> JoinInput<'_> {
        JoinInput {
            clusters: &self.clusters,
            tree: &self.tree,
            tour: &self.tour,
            edge_map: &self.edge_map,
            subtrees: &self.subtrees,
            subtours: &self.subtours,
        }
    }

    /// Undirected, sorted `{g(e)} ∪ subtree edges`.
    pub fn expected_edges(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = self
            .edge_map
            .values()
            .chain(self.subtrees.values().flatten())
            .map(|&(x, y)| (x.min(y), x.max(y)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Joins and checks the tour and the edge multiset.
    pub fn check_join(&self) -> Result<EulerTour> {
        let (edges, tour) = euler_tour_join(&self.input())?;
        let mut got: Vec<(u32, u32)> = edges.iter().map(|&(x, y)| (x.min(y), x.max(y))).collect();
        got.sort_unstable();
        if got != self.expected_edges() {
            return Err(Error::consistency("euler_tour_join", "edge multiset differs"));
        }
        validate_tour(&tour, &edges).map_err(|v| Error::consistency("euler_tour_join", v.to_string()))?;
        Ok(tour)
    }
}
