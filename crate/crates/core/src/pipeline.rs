//! The three-part hierarchy construction and spanning-tree extraction.
//!
//! Checkpoint levels `t = alpha^k` are built independently (part 1), the
//! levels between them in waves of decreasing 2-adic valuation of `log2 t`
//! (part 2), and finally every level emits the edges that coarsen
//! `P_{t/2}` into `P_t` (part 3).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::compression::{compress, KeyedCoins};
use crate::config::AlgorithmConfig;
use crate::error::{Error, Result};
use crate::geometry::{cell_coords, jl_project, normalize_aspect, Normalized, PointSet, ShiftVector};
use crate::levels::{level_t, LevelPlan};
use crate::partition::{refines, Partition};
use crate::runtime::{prim, RoundLedger};
use crate::spanner::{accumulate_levels, build_all_levels, EdgeSet, LeveledSpanner};

const STAGE_CHECKPOINT: u32 = 1;
const STAGE_INTERMEDIATE: u32 = 2;
const STAGE_EDGES: u32 = 3;

/// Which step of edge generation produced a tree edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    /// Merge edge of compression round `i` (1-based).
    Round(u32),
    /// Star over the sub-leaders left after compression.
    Star,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stage::Round(i) => write!(f, "round{i}"),
            Stage::Star => f.write_str("star"),
        }
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "star" {
            return Ok(Stage::Star);
        }
        s.strip_prefix("round")
            .and_then(|r| r.parse().ok())
            .map(Stage::Round)
            .ok_or_else(|| Error::invalid(format!("unknown stage tag `{s}`")))
    }
}

impl Serialize for Stage {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Stage {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub u: u32,
    pub v: u32,
    /// Euclidean length in input units.
    pub weight: f64,
    /// Level exponent: the edge joins two parts of `P_{2^level}`.
    pub level: u32,
    pub stage: Stage,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpanningTree {
    pub edges: Vec<TreeEdge>,
}

impl SpanningTree {
    pub fn cost(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn pairs(&self) -> Vec<(u32, u32)> {
        self.edges.iter().map(|e| (e.u, e.v)).collect()
    }

    pub fn per_level(&self) -> BTreeMap<u32, Vec<TreeEdge>> {
        let mut out: BTreeMap<u32, Vec<TreeEdge>> = BTreeMap::new();
        for e in &self.edges {
            out.entry(e.level).or_default().push(*e);
        }
        out
    }
}

/// `levels[e]` is `P_{2^e}`; `edges[e]` coarsen `P_{2^(e-1)}` (singletons for `e = 0`) into it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PartitionHierarchy {
    pub levels: BTreeMap<u32, Partition>,
    pub edges: BTreeMap<u32, Vec<(u32, u32, Stage)>>,
}

impl PartitionHierarchy {
    /// The partition just below level `e`.
    pub fn below(&self, e: u32) -> Partition {
        match e.checked_sub(1) {
            Some(prev) => self.levels[&prev].clone(),
            None => Partition::singletons(self.levels.values().next().map_or(0, Partition::len)),
        }
    }

    pub fn component_counts(&self) -> BTreeMap<u32, usize> {
        self.levels.iter().map(|(&e, p)| (e, p.num_components())).collect()
    }
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub normalized: Normalized,
    pub plan: LevelPlan,
    pub shift: ShiftVector,
    pub spanner: LeveledSpanner,
    pub hierarchy: PartitionHierarchy,
    pub tree: SpanningTree,
    pub ledger: RoundLedger,
    pub projected: bool,
    /// Spanner cells that fell back from sampling to the cell-leader rule.
    pub spanner_fallbacks: usize,
    /// Spanner cells whose edge count exceeded `|X_c|^(1+epsilon)`.
    pub spanner_over_budget: usize,
}

fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

fn coins(config: &AlgorithmConfig, e: u32, stage: u32) -> impl Fn(u32) -> KeyedCoins {
    let seed = config.seed;
    move |round| KeyedCoins { seed, level: e, stage, round }
}

fn charge_compression(ledger: &mut RoundLedger, stage: &str, n: usize, graph: &EdgeSet, h: u32) -> Result<()> {
    for _ in 0..h {
        // (sender, sender leader, receiver) messages
        ledger.charge_in(stage, prim::LEADER_COMPRESSION_ROUND, (n + 2 * graph.len()) as u64 * 3, 3)?;
    }
    Ok(())
}

/// Leaders with a graph edge leaving their component.
fn incomplete_leaders(p: &Partition, graph: &EdgeSet) -> Vec<bool> {
    let mut out = vec![false; p.len()];
    for (u, v) in graph.iter() {
        let (a, b) = (p.leader(u), p.leader(v));
        if a != b {
            out[a as usize] = true;
            out[b as usize] = true;
        }
    }
    out
}

/// Merges incomplete components sharing a group key, each group onto its smallest leader.
fn star_merge_incomplete<K: Ord>(p: &Partition, incomplete: &[bool], key: impl Fn(u32) -> K) -> Partition {
    let mut rep: BTreeMap<K, u32> = BTreeMap::new();
    let mut target: Vec<u32> = (0..p.len() as u32).collect();
    // Ascending leader ids, so the first leader per key is the smallest.
    for z in 0..p.len() as u32 {
        if p.is_leader(z) && incomplete[z as usize] {
            target[z as usize] = *rep.entry(key(z)).or_insert(z);
        }
    }
    let leader = (0..p.len() as u32).map(|x| target[p.leader(x) as usize]).collect();
    Partition::from_leaders_unchecked(leader).canonical()
}

/// Checkpoint level `t = alpha^k`.
pub fn part1(
    points: &PointSet,
    e: u32,
    shift: &ShiftVector,
    spanner_t: &EdgeSet,
    plan: &LevelPlan,
    config: &AlgorithmConfig,
    ledger: &mut RoundLedger,
) -> Result<Partition> {
    if !plan.is_checkpoint(e) || e > plan.top_exp() {
        return Err(Error::invalid(format!("2^{e} is not a checkpoint level")));
    }
    const STAGE: &str = "part1";
    let n = points.len();
    let words = (n * (points.dim() + 1)) as u64;
    let seed_side = plan.seed_cell_level(e);
    let cells: Vec<Vec<i64>> = (0..n).map(|x| cell_coords(points.point(x), seed_side, shift)).collect();
    ledger.charge_in(STAGE, prim::SORT, words, points.dim() as u64 + 1)?;
    let start = Partition::from_labels(&cells);
    ledger.charge_in(STAGE, prim::PRAM, n as u64, 2)?;

    let (compressed, _) = compress(&start, spanner_t, config.h, false, coins(config, e, STAGE_CHECKPOINT));
    charge_compression(ledger, STAGE, n, spanner_t, config.h)?;

    let incomplete = incomplete_leaders(&compressed, spanner_t);
    ledger.charge_in(STAGE, prim::PRAM, 2 * spanner_t.len() as u64, 2)?;
    let big = plan.big_cell_level(e);
    ledger.charge_in(STAGE, prim::SORT, words, points.dim() as u64 + 1)?;
    let out = star_merge_incomplete(&compressed, &incomplete, |z| big.map(|side| cell_coords(points.point(z as usize), side, shift)));
    ledger.charge_in(STAGE, prim::PRAM, n as u64, 2)?;
    ledger.charge_in(STAGE, prim::PRAM, n as u64, 2)?;
    Ok(out)
}

/// Intermediate level `2^e` strictly between checkpoints, from `P_{t/kappa}` and `P_{t*kappa}`.
pub fn part2(
    e: u32,
    spanner_t: &EdgeSet,
    p_lo: &Partition,
    p_hi: &Partition,
    plan: &LevelPlan,
    config: &AlgorithmConfig,
    ledger: &mut RoundLedger,
) -> Result<Partition> {
    if plan.is_checkpoint(e) {
        return Err(Error::invalid(format!("2^{e} is a checkpoint level")));
    }
    const STAGE: &str = "part2";
    if !refines(p_lo, p_hi)? {
        return Err(Error::consistency(STAGE, format!("lower partition does not refine upper one at 2^{e}")));
    }
    let n = p_lo.len();
    let start = p_lo.canonical();
    ledger.charge_in(STAGE, prim::PRAM, n as u64, 2)?;
    let (compressed, _) = compress(&start, spanner_t, config.h, false, coins(config, e, STAGE_INTERMEDIATE));
    charge_compression(ledger, STAGE, n, spanner_t, config.h)?;
    let incomplete = incomplete_leaders(&compressed, spanner_t);
    ledger.charge_in(STAGE, prim::PRAM, 2 * spanner_t.len() as u64, 2)?;
    ledger.charge_in(STAGE, prim::SORT, 2 * n as u64, 2)?;
    let out = star_merge_incomplete(&compressed, &incomplete, |z| p_hi.leader(z));
    ledger.charge_in(STAGE, prim::PRAM, n as u64, 2)?;
    ledger.charge_in(STAGE, prim::PRAM, n as u64, 2)?;
    Ok(out)
}

/// Edges that coarsen `p_prev` into `p_target`: compression merges, then a star.
pub fn part3(
    e: u32,
    spanner_t: &EdgeSet,
    p_prev: &Partition,
    p_target: &Partition,
    config: &AlgorithmConfig,
    ledger: &mut RoundLedger,
) -> Result<Vec<(u32, u32, Stage)>> {
    const STAGE: &str = "part3";
    if !refines(p_prev, p_target)? {
        return Err(Error::consistency(STAGE, format!("P_(t/2) does not refine P_t at 2^{e}")));
    }
    let n = p_prev.len();
    let (compressed, rounds) = compress(p_prev, spanner_t, config.h, true, coins(config, e, STAGE_EDGES));
    charge_compression(ledger, STAGE, n, spanner_t, config.h)?;
    if !refines(&compressed, p_target)? {
        return Err(Error::consistency(STAGE, format!("compression escaped P_t at 2^{e}")));
    }
    let mut edges: Vec<(u32, u32, Stage)> = rounds
        .into_iter()
        .enumerate()
        .flat_map(|(i, es)| es.into_iter().map(move |(x, y)| (x, y, Stage::Round(i as u32 + 1))))
        .collect();
    ledger.charge_in(STAGE, prim::SORT, 2 * n as u64, 2)?;
    let mut hub: BTreeMap<u32, u32> = BTreeMap::new();
    for z in 0..n as u32 {
        if compressed.is_leader(z) {
            let center = *hub.entry(p_target.leader(z)).or_insert(z);
            if center != z {
                edges.push((center, z, Stage::Star));
            }
        }
    }
    ledger.charge_in(STAGE, prim::PRAM, n as u64, 2)?;
    let expected = p_prev.num_components() - p_target.num_components();
    if edges.len() != expected {
        return Err(Error::consistency(STAGE, format!("{} edges at 2^{e}, expected {expected}", edges.len())));
    }
    Ok(edges)
}

/// Projection (optional), normalization, spanners, the three parts and the tree.
///
/// `points` are in input units; tree weights are reported in the same units.
pub fn run_pipeline(points: &PointSet, config: &AlgorithmConfig) -> Result<PipelineOutput> {
    if points.is_empty() {
        return Err(Error::invalid("empty point set"));
    }
    config.validate(points.dim())?;
    let n = points.len();
    let mut ledger = RoundLedger::for_config(config);
    const PRE: &str = "preprocess";

    let projected = config.working_dim(points.dim()) < points.dim();
    let working = if projected {
        let k = config.working_dim(points.dim());
        ledger.charge_in(PRE, prim::JL_PROJECT, (n * points.dim()) as u64, points.dim() as u64)?;
        jl_project(points, k, config.seed)?
    } else {
        points.clone()
    };
    let d = working.dim();
    let words = (n * (d + 1)) as u64;
    let normalized = normalize_aspect(&working, config)?;
    ledger.charge_in(PRE, prim::SORT, words, d as u64 + 1)?;
    ledger.charge_in(PRE, prim::BROADCAST, 2 * d as u64, 1)?;
    ledger.charge_in(PRE, prim::PRAM, words, d as u64 + 1)?;
    let plan = LevelPlan::new(config, n, d);
    let shift = ShiftVector::random(d, plan.delta, config.seed);
    ledger.charge_in(PRE, prim::BROADCAST, d as u64, d as u64)?;

    if normalized.degenerate || n == 1 {
        return Ok(degenerate_output(points, normalized, plan, shift, ledger, projected));
    }
    let pts = &normalized.points;

    // Spanners: every level independently, then prefix unions.
    const SPAN: &str = "spanner";
    ledger.charge_in(SPAN, prim::DUPLICATE, words * plan.num_levels() as u64, d as u64 + 1)?;
    let builds = build_all_levels(pts, &shift, &plan, config);
    let mut level_ledgers = Vec::new();
    for b in builds.values() {
        let mut l = ledger.child();
        l.charge_in(SPAN, prim::SORT, words, d as u64 + 1)?;
        l.charge_in(SPAN, prim::SPANNER, words + 2 * b.edges.len() as u64, d as u64 + 1)?;
        level_ledgers.push(l);
    }
    ledger.parallel_group(level_ledgers);
    let spanner_fallbacks = builds.values().map(|b| b.fallback_cells).sum();
    let spanner_over_budget = builds.values().map(|b| b.over_budget_cells).sum();
    let raw: BTreeMap<u32, EdgeSet> = builds.into_iter().map(|(e, b)| (e, b.edges)).collect();
    let spanner = accumulate_levels(&raw, config.strategy.stretch_bound())?;
    let total_edges: u64 = spanner.levels.values().map(|s| 2 * s.len() as u64).sum();
    ledger.charge_in(SPAN, prim::DUPLICATE, total_edges, 2)?;
    ledger.charge_in(SPAN, prim::SORT, total_edges, 2)?;

    // Part 1: checkpoints.
    let checkpoints: Vec<u32> = plan.exponents().filter(|&e| plan.is_checkpoint(e)).collect();
    let results = par_map(&checkpoints, |&e| {
        let mut l = ledger.child();
        part1(pts, e, &shift, spanner.at(e), &plan, config, &mut l).map(|p| (e, p, l))
    });
    let mut levels: BTreeMap<u32, Partition> = BTreeMap::new();
    let mut stage_ledgers = Vec::new();
    for r in results {
        let (e, p, l) = r?;
        levels.insert(e, p);
        stage_ledgers.push(l);
    }
    ledger.parallel_group(stage_ledgers);

    // Part 2: one wave per valuation, highest first.
    for wave in plan.part2_waves() {
        let done = &levels;
        let results = par_map(&wave, |&e| {
            let k = plan.kappa_exp(e);
            let lookup = |x: u32| {
                done.get(&x).ok_or_else(|| Error::consistency("part2", format!("level 2^{x} needed by 2^{e} is not built yet")))
            };
            let mut l = ledger.child();
            let p = part2(e, spanner.at(e), lookup(e - k)?, lookup(e + k)?, &plan, config, &mut l)?;
            Ok::<_, Error>((e, p, l))
        });
        let mut wave_ledger = ledger.child();
        wave_ledger.charge_in("part2", prim::DUPLICATE, (n * wave.len()) as u64, 2)?;
        let mut subs = Vec::new();
        for r in results {
            let (e, p, l) = r?;
            levels.insert(e, p);
            subs.push(l);
        }
        wave_ledger.parallel_group(subs);
        ledger.then(wave_ledger);
    }

    // Part 3: edges for every level.
    let all: Vec<u32> = plan.exponents().collect();
    let results = par_map(&all, |&e| {
        let prev = match e {
            0 => Partition::singletons(n),
            _ => levels[&(e - 1)].clone(),
        };
        let mut l = ledger.child();
        part3(e, spanner.at(e), &prev, &levels[&e], config, &mut l).map(|es| (e, es, l))
    });
    let mut edges = BTreeMap::new();
    let mut stage_ledgers = Vec::new();
    for r in results {
        let (e, es, l) = r?;
        edges.insert(e, es);
        stage_ledgers.push(l);
    }
    ledger.parallel_group(stage_ledgers);

    let hierarchy = PartitionHierarchy { levels, edges };
    let tree = collect_tree(points, &hierarchy);
    ledger.charge_in("tree", prim::SORT, 3 * n as u64, 5)?;
    if tree.edges.len() != n - 1 {
        return Err(Error::consistency("tree", format!("{} edges for {n} points", tree.edges.len())));
    }
    Ok(PipelineOutput {
        normalized,
        plan,
        shift,
        spanner,
        hierarchy,
        tree,
        ledger,
        projected,
        spanner_fallbacks,
        spanner_over_budget,
    })
}

fn collect_tree(points: &PointSet, hierarchy: &PartitionHierarchy) -> SpanningTree {
    let mut edges: Vec<TreeEdge> = hierarchy
        .edges
        .iter()
        .flat_map(|(&level, es)| {
            es.iter().map(move |&(u, v, stage)| TreeEdge {
                u,
                v,
                weight: points.dist(u as usize, v as usize),
                level,
                stage,
            })
        })
        .collect();
    edges.sort_by_key(|e| (e.level, e.u.min(e.v), e.u.max(e.v)));
    SpanningTree { edges }
}

/// All points coincide (or there is one point): a zero-cost star on id 0.
fn degenerate_output(
    points: &PointSet,
    normalized: Normalized,
    plan: LevelPlan,
    shift: ShiftVector,
    ledger: RoundLedger,
    projected: bool,
) -> PipelineOutput {
    let n = points.len();
    let star: Vec<(u32, u32, Stage)> = (1..n as u32).map(|v| (0, v, Stage::Star)).collect();
    let hierarchy = PartitionHierarchy {
        levels: [(0, Partition::one_block(n))].into(),
        edges: [(0, star)].into(),
    };
    let tree = collect_tree(points, &hierarchy);
    PipelineOutput {
        normalized,
        plan,
        shift,
        spanner: LeveledSpanner { levels: BTreeMap::new(), stretch_bound: 1.0 },
        hierarchy,
        tree,
        ledger,
        projected,
        spanner_fallbacks: 0,
        spanner_over_budget: 0,
    }
}

/// Hierarchy invariants: nesting, confinement to big cells, coarsening of the
/// spanner components, edge counts, and the singleton/one-block ends.
pub fn check_hierarchy(out: &PipelineOutput) -> Result<()> {
    const STAGE: &str = "hierarchy";
    let h = &out.hierarchy;
    let n = out.normalized.points.len();
    if out.normalized.degenerate || n <= 1 {
        return Ok(());
    }
    let plan = &out.plan;
    let fail = |detail: String| Err(Error::consistency(STAGE, detail));
    // Snapped points are at least 4 apart, so only exact duplicates share a part of P_1.
    let locations: Vec<Vec<u64>> = out.normalized.points.rows().map(|r| r.iter().map(|x| (x + 0.0).to_bits()).collect()).collect();
    if !h.levels[&0].same_blocks(&Partition::from_labels(&locations)) {
        return fail("P_1 is not the partition into coincident points".into());
    }
    if h.levels[&plan.top_exp()].num_components() != 1 {
        return fail("top level is not a single component".into());
    }
    for (&e, p) in &h.levels {
        let below = h.below(e);
        if !refines(&below, p)? {
            return fail(format!("P_(t/2) does not refine P_t at t = 2^{e}"));
        }
        if below.num_components() - h.edges[&e].len() != p.num_components() {
            return fail(format!("edge count mismatch at t = 2^{e}"));
        }
        if let Some(side) = plan.big_cell_level(e) {
            let pts = &out.normalized.points;
            for (l, members) in p.components() {
                let home = cell_coords(pts.point(l as usize), side, &out.shift);
                if members.iter().any(|&x| cell_coords(pts.point(x as usize), side, &out.shift) != home) {
                    return fail(format!("component of {l} leaves its cell at t = 2^{e}"));
                }
            }
        }
        let spanner_components = crate::oracle::graph_components(n, out.spanner.at(e).as_slice());
        if !refines(&spanner_components, p)? {
            return fail(format!("spanner component split by P_t at t = 2^{e}"));
        }
    }
    Ok(())
}

/// Total added weight per level against `t * (|P~_{t/2}| - |P~_t|)`, for diagnostics.
pub fn level_weight_ratios(out: &PipelineOutput) -> BTreeMap<u32, f64> {
    let n = out.normalized.points.len();
    let mut prev = n;
    let mut ratios = BTreeMap::new();
    for (&e, set) in &out.spanner.levels {
        let comps = crate::oracle::graph_components(n, set.as_slice()).num_components();
        let added: f64 = out.hierarchy.edges.get(&e).map_or(0.0, |es| {
            es.iter()
                .map(|&(u, v, _)| out.normalized.points.dist(u as usize, v as usize))
                .sum()
        });
        let reference = level_t(e) * (prev - comps) as f64;
        if reference > 0.0 {
            ratios.insert(e, added / reference);
        }
        prev = comps;
    }
    ratios
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::graph_components;
    use crate::partition::merge_with_edges;
    use petgraph::unionfind::UnionFind;
    use rand::Rng;

    fn uniform(n: usize, d: usize, seed: u64) -> PointSet {
        let mut rng = crate::geometry::seeded_rng(seed, 0);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        PointSet::from_rows(&rows).unwrap()
    }

    fn is_spanning_tree(n: usize, pairs: &[(u32, u32)]) -> bool {
        let mut uf = UnionFind::<u32>::new(n);
        pairs.len() == n.saturating_sub(1) && pairs.iter().all(|&(u, v)| uf.union(u, v))
    }

    #[test]
    fn single_point_gives_empty_tree() {
        let out = run_pipeline(&PointSet::from_rows(&[[1.0, 1.0]]).unwrap(), &AlgorithmConfig::for_dim(2)).unwrap();
        assert!(out.tree.edges.is_empty());
    }

    #[test]
    fn two_points_give_their_distance() {
        let p = PointSet::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        let out = run_pipeline(&p, &AlgorithmConfig::for_dim(2)).unwrap();
        assert_eq!(out.tree.edges.len(), 1);
        assert_eq!(out.tree.cost(), 5.0);
    }

    #[test]
    fn coincident_points_give_zero_star() {
        let p = PointSet::from_rows(&[[2.0], [2.0], [2.0], [2.0]]).unwrap();
        let out = run_pipeline(&p, &AlgorithmConfig::for_dim(1)).unwrap();
        assert!(out.normalized.degenerate);
        assert_eq!(out.tree.cost(), 0.0);
        assert!(is_spanning_tree(4, &out.tree.pairs()));
    }

    #[test]
    fn duplicates_among_distinct_points() {
        let p = PointSet::from_rows(&[[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [5.0, 2.0], [1.0, 1.0]]).unwrap();
        let out = run_pipeline(&p, &AlgorithmConfig::for_dim(2)).unwrap();
        assert!(is_spanning_tree(5, &out.tree.pairs()));
        // Duplicates are joined at the lowest level at zero cost.
        assert_eq!(out.hierarchy.edges[&0].len(), 2);
        check_hierarchy(&out).unwrap();
    }

    #[test]
    fn uniform_300_in_d8_is_a_spanning_tree() {
        let p = uniform(300, 8, 1);
        let out = run_pipeline(&p, &AlgorithmConfig::for_dim(8)).unwrap();
        assert_eq!(out.tree.edges.len(), 299);
        assert!(is_spanning_tree(300, &out.tree.pairs()));
        check_hierarchy(&out).unwrap();
    }

    #[test]
    fn every_strategy_and_alpha_builds_a_valid_hierarchy() {
        for strategy in crate::config::SpannerStrategy::ALL {
            for alpha in [2, 4, 16, 256] {
                let mut c = AlgorithmConfig::for_dim(3).with_strategy(strategy).with_seed(alpha);
                c.alpha = alpha;
                c.h = 2;
                let p = uniform(80, 3, alpha);
                let out = run_pipeline(&p, &c).unwrap();
                assert!(is_spanning_tree(80, &out.tree.pairs()), "{strategy} alpha={alpha}");
                check_hierarchy(&out).unwrap();
            }
        }
    }

    #[test]
    fn same_seed_same_tree() {
        let p = uniform(120, 4, 9);
        let c = AlgorithmConfig::for_dim(4).with_seed(3);
        let a = run_pipeline(&p, &c).unwrap();
        let b = run_pipeline(&p, &c).unwrap();
        assert_eq!(a.tree, b.tree);
        assert_eq!(a.ledger, b.ledger);
    }

    #[test]
    fn part1_rejects_intermediate_level_and_part2_checkpoint() {
        let p = uniform(10, 2, 0);
        let c = AlgorithmConfig::for_dim(2);
        let norm = normalize_aspect(&p, &c).unwrap().points;
        let plan = LevelPlan::new(&c, 10, 2);
        let shift = ShiftVector::zero(2);
        let mut l = RoundLedger::default();
        assert!(part1(&norm, 3, &shift, &EdgeSet::default(), &plan, &c, &mut l).is_err());
        let s = Partition::singletons(10);
        assert!(part2(4, &EdgeSet::default(), &s, &s, &plan, &c, &mut l).is_err());
    }

    #[test]
    fn part1_single_seed_cell_is_one_component() {
        // Everything in one cell of side t / beta.
        let c = AlgorithmConfig::for_dim(2);
        let plan = LevelPlan::new(&c, 4, 2);
        let pts = PointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        let mut l = RoundLedger::default();
        let out = part1(&pts, 8, &ShiftVector::zero(2), &EdgeSet::default(), &plan, &c, &mut l).unwrap();
        assert_eq!(out.num_components(), 1);
    }

    #[test]
    fn part1_separate_cells_without_edges_stay_apart() {
        let c = AlgorithmConfig::for_dim(1);
        let plan = LevelPlan::new(&c, 4, 1);
        // Two clusters far apart relative to the alpha^2 / beta = 32 cells.
        let pts = PointSet::from_rows(&[[0.0], [0.5], [100.0], [100.5]]).unwrap();
        let mut l = RoundLedger::default();
        let out = part1(&pts, 4, &ShiftVector::zero(1), &EdgeSet::default(), &plan, &c, &mut l).unwrap();
        assert_eq!(out.num_components(), 2);
    }

    #[test]
    fn part2_trivial_cases() {
        let c = AlgorithmConfig::for_dim(2);
        let plan = LevelPlan::new(&c, 6, 2);
        let mut l = RoundLedger::default();
        let lo = Partition::from_labels(&[0, 0, 1, 1, 2, 3]);
        // No edges: nothing is incomplete, nothing merges.
        let same = part2(5, &EdgeSet::default(), &lo, &Partition::one_block(6), &plan, &c, &mut l).unwrap();
        assert!(same.same_blocks(&lo));
        // A path touching every block, all inside one upper block: everything merges.
        let g = EdgeSet::new([(1, 2), (3, 4), (4, 5)]).unwrap();
        let all = part2(5, &g, &lo, &Partition::one_block(6), &plan, &c, &mut l).unwrap();
        assert_eq!(all.num_components(), 1);
    }

    #[test]
    fn part3_examples() {
        let c = AlgorithmConfig::for_dim(2);
        let mut l = RoundLedger::default();
        let p = Partition::from_labels(&[0, 0, 1]);
        assert!(part3(2, &EdgeSet::default(), &p, &p, &c, &mut l).unwrap().is_empty());
        let star = part3(2, &EdgeSet::default(), &Partition::singletons(3), &Partition::one_block(3), &c, &mut l).unwrap();
        assert_eq!(star, vec![(0, 1, Stage::Star), (0, 2, Stage::Star)]);
        assert!(matches!(
            part3(2, &EdgeSet::default(), &Partition::one_block(3), &Partition::singletons(3), &c, &mut l),
            Err(Error::Consistency { .. })
        ));
    }

    #[test]
    fn part3_edges_form_forest_over_previous_level() {
        let p = uniform(150, 2, 4);
        let out = run_pipeline(&p, &AlgorithmConfig::for_dim(2)).unwrap();
        for (&e, es) in &out.hierarchy.edges {
            let below = out.hierarchy.below(e);
            let mut uf = UnionFind::<u32>::new(150);
            for x in 0..150u32 {
                uf.union(x, below.leader(x));
            }
            for &(u, v, _) in es {
                assert!(uf.union(u, v), "cycle at 2^{e}");
            }
            let pairs: Vec<(u32, u32)> = es.iter().map(|&(u, v, _)| (u, v)).collect();
            assert!(merge_with_edges(&below, &pairs).same_blocks(&out.hierarchy.levels[&e]));
        }
    }

    #[test]
    fn part1_output_coarsens_spanner_components() {
        let p = uniform(200, 3, 12);
        let c = AlgorithmConfig::for_dim(3);
        let out = run_pipeline(&p, &c).unwrap();
        for e in out.plan.exponents().filter(|&e| out.plan.is_checkpoint(e)) {
            let bfs = graph_components(200, out.spanner.at(e).as_slice());
            assert!(refines(&bfs, &out.hierarchy.levels[&e]).unwrap());
        }
    }
}
