//! Leveled 2-hop spanners confined to quadtree cells.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{AlgorithmConfig, SpannerStrategy};
use crate::error::{Error, Result};
use crate::geometry::{cell_coords, dist, seeded_rng, PointSet, ShiftVector};
use crate::levels::{level_t, LevelPlan};

const STREAM_SAMPLING: u64 = 16;

/// Sorted, duplicate-free undirected edges stored as `(min, max)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeSet {
    edges: Vec<(u32, u32)>,
}

impl EdgeSet {
    pub fn new(edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut v = Vec::new();
        for (u, w) in edges {
            if u == w {
                return Err(Error::invalid(format!("self-loop on {u}")));
            }
            v.push((u.min(w), u.max(w)));
        }
        v.sort_unstable();
        v.dedup();
        Ok(EdgeSet { edges: v })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    pub fn as_slice(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn contains(&self, u: u32, v: u32) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        let (a, b) = (&self.edges, &other.edges);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        EdgeSet { edges: out }
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.edges.iter().all(|&(u, v)| other.contains(u, v))
    }
}

/// Cumulative spanners keyed by level exponent (`t = 2^e`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeveledSpanner {
    pub levels: BTreeMap<u32, EdgeSet>,
    pub stretch_bound: f64,
}

impl LeveledSpanner {
    pub fn at(&self, e: u32) -> &EdgeSet {
        &self.levels[&e]
    }
}

/// Each edge weighted by the smallest level that contains it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpannerWeightedGraph {
    pub edges: BTreeMap<(u32, u32), f64>,
}

/// What a level build produced besides its edges.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelBuild {
    pub edges: EdgeSet,
    /// Cells where sampling broke the 2-hop property and the cell-leader rule was used.
    pub fallback_cells: usize,
    /// Cells whose edge count exceeded `|X_c|^(1+epsilon)`.
    pub over_budget_cells: usize,
}

/// Points of each confining cell, ids ascending, cells in key order.
fn big_cells(points: &PointSet, e: u32, shift: &ShiftVector, plan: &LevelPlan) -> Vec<Vec<u32>> {
    let n = points.len() as u32;
    match plan.big_cell_level(e) {
        None => vec![(0..n).collect()],
        Some(side) => {
            let mut cells: BTreeMap<Vec<i64>, Vec<u32>> = BTreeMap::new();
            for x in 0..n {
                cells.entry(cell_coords(points.point(x as usize), side, shift)).or_default().push(x);
            }
            cells.into_values().collect()
        }
    }
}

/// Builds the 2-hop spanner of length `t` inside every confining cell.
pub fn build_spanner_level(
    points: &PointSet,
    t: f64,
    shift: &ShiftVector,
    config: &AlgorithmConfig,
    strategy: SpannerStrategy,
) -> Result<EdgeSet> {
    let plan = LevelPlan::new(config, points.len(), points.dim());
    let e = t.log2();
    if !(e.fract() == 0.0 && e >= 0.0 && e as u32 <= plan.top_exp()) {
        return Err(Error::invalid(format!(
            "level {t} is not a power of 2 in [1, {}]",
            level_t(plan.top_exp())
        )));
    }
    Ok(build_level(points, e as u32, shift, &plan, config, strategy).edges)
}

pub(crate) fn build_level(
    points: &PointSet,
    e: u32,
    shift: &ShiftVector,
    plan: &LevelPlan,
    config: &AlgorithmConfig,
    strategy: SpannerStrategy,
) -> LevelBuild {
    let t = level_t(e);
    let mut rng = seeded_rng(config.seed, STREAM_SAMPLING + e as u64);
    let mut edges = Vec::new();
    let mut fallback_cells = 0;
    let mut over_budget_cells = 0;
    for cell in big_cells(points, e, shift, plan) {
        let start = edges.len();
        match strategy {
            SpannerStrategy::ExactThreshold => threshold_edges(points, &cell, t, &mut edges),
            SpannerStrategy::CellLeader => leader_edges(points, &cell, t, shift, &mut edges),
            SpannerStrategy::SampledLeader => {
                let budget = (cell.len() as f64).powf(1.0 + config.epsilon);
                let sampled = sampled_edges(points, &cell, t, shift, budget, &mut rng);
                if has_two_hop_property(points, &cell, t, &sampled) {
                    edges.extend(sampled);
                } else {
                    fallback_cells += 1;
                    leader_edges(points, &cell, t, shift, &mut edges);
                }
            }
        }
        if (edges.len() - start) as f64 > (cell.len() as f64).powf(1.0 + config.epsilon) {
            over_budget_cells += 1;
        }
    }
    LevelBuild {
        edges: EdgeSet::new(edges).expect("builders never emit self-loops"),
        fallback_cells,
        over_budget_cells,
    }
}

/// Ids of `members` sorted by first coordinate, for windowed scans.
fn by_first_coord(points: &PointSet, members: &[u32]) -> Vec<(f64, u32)> {
    let mut v: Vec<(f64, u32)> = members.iter().map(|&x| (points.point(x as usize)[0], x)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    v
}

/// Entries of a sorted-by-coordinate list within `radius` of `x0` along that coordinate.
fn window(sorted: &[(f64, u32)], x0: f64, radius: f64) -> &[(f64, u32)] {
    let lo = sorted.partition_point(|p| p.0 < x0 - radius);
    let hi = sorted.partition_point(|p| p.0 <= x0 + radius);
    &sorted[lo..hi]
}

fn threshold_edges(points: &PointSet, cell: &[u32], t: f64, out: &mut Vec<(u32, u32)>) {
    let sorted = by_first_coord(points, cell);
    for (i, &(x0, p)) in sorted.iter().enumerate() {
        for &(y0, q) in &sorted[i + 1..] {
            if y0 - x0 > t {
                break;
            }
            if points.dist(p as usize, q as usize) <= t {
                out.push((p, q));
            }
        }
    }
}

/// Subcells of side `t / sqrt(d)` with their smallest-id member as leader.
fn subcells(points: &PointSet, cell: &[u32], t: f64, shift: &ShiftVector) -> BTreeMap<Vec<i64>, Vec<u32>> {
    let side = t / (points.dim() as f64).sqrt();
    let mut subs: BTreeMap<Vec<i64>, Vec<u32>> = BTreeMap::new();
    for &x in cell {
        subs.entry(cell_coords(points.point(x as usize), side, shift)).or_default().push(x);
    }
    subs
}

fn leader_edges(points: &PointSet, cell: &[u32], t: f64, shift: &ShiftVector, out: &mut Vec<(u32, u32)>) {
    let leaders: Vec<u32> = subcells(points, cell, t, shift).values().map(|m| m[0]).collect();
    let sorted = by_first_coord(points, &leaders);
    for &q in cell {
        let pq = points.point(q as usize);
        for &(_, r) in window(&sorted, pq[0], 2.0 * t) {
            if r != q && dist(pq, points.point(r as usize)) <= 2.0 * t {
                out.push((q, r));
            }
        }
    }
}

/// Each point keeps its own leader and links to another leader only when that
/// leader's subcell holds a point within `t`; if the cell exceeds its edge
/// budget, the optional links are subsampled.
fn sampled_edges(
    points: &PointSet,
    cell: &[u32],
    t: f64,
    shift: &ShiftVector,
    budget: f64,
    rng: &mut impl Rng,
) -> Vec<(u32, u32)> {
    let subs = subcells(points, cell, t, shift);
    let mut leader_of: HashMap<u32, u32> = HashMap::new();
    let mut members_of: HashMap<u32, &[u32]> = HashMap::new();
    for m in subs.values() {
        for &x in m {
            leader_of.insert(x, m[0]);
        }
        members_of.insert(m[0], m);
    }
    let leaders: Vec<u32> = subs.values().map(|m| m[0]).collect();
    let sorted = by_first_coord(points, &leaders);
    let mut own = Vec::new();
    let mut optional = Vec::new();
    for &q in cell {
        let pq = points.point(q as usize);
        let mine = leader_of[&q];
        if mine != q {
            own.push((q, mine));
        }
        for &(_, r) in window(&sorted, pq[0], 2.0 * t) {
            if r == q || r == mine || dist(pq, points.point(r as usize)) > 2.0 * t {
                continue;
            }
            if members_of[&r].iter().any(|&y| dist(pq, points.point(y as usize)) <= t) {
                optional.push((q, r));
            }
        }
    }
    let room = budget - own.len() as f64;
    if (optional.len() as f64) > room {
        let keep = (room / optional.len() as f64).max(0.0);
        optional.retain(|_| rng.gen_bool(keep));
    }
    own.extend(optional);
    own
}

/// Brute-force check that every pair within `t` in `cell` is joined by at most two edges.
pub fn has_two_hop_property(points: &PointSet, cell: &[u32], t: f64, edges: &[(u32, u32)]) -> bool {
    let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
    for &(u, v) in edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    for list in adj.values_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let empty = Vec::new();
    let sorted = by_first_coord(points, cell);
    for (i, &(x0, p)) in sorted.iter().enumerate() {
        let np = adj.get(&p).unwrap_or(&empty);
        for &(y0, q) in &sorted[i + 1..] {
            if y0 - x0 > t {
                break;
            }
            if points.dist(p as usize, q as usize) > t || np.binary_search(&q).is_ok() {
                continue;
            }
            let nq = adj.get(&q).unwrap_or(&empty);
            if !sorted_intersect(np, nq) {
                return false;
            }
        }
    }
    true
}

fn sorted_intersect(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Prefix unions over consecutive levels `0..=max`.
pub fn accumulate_levels(per_level: &BTreeMap<u32, EdgeSet>, stretch_bound: f64) -> Result<LeveledSpanner> {
    let mut levels = BTreeMap::new();
    let mut acc = EdgeSet::default();
    for (expected, (&e, set)) in per_level.iter().enumerate() {
        if e != expected as u32 {
            return Err(Error::invalid(format!("missing spanner level 2^{expected}")));
        }
        acc = acc.union(set);
        levels.insert(e, acc.clone());
    }
    Ok(LeveledSpanner { levels, stretch_bound })
}

pub fn spanner_weight_graph(spanner: &LeveledSpanner) -> SpannerWeightedGraph {
    let mut edges = BTreeMap::new();
    // Levels iterate in increasing t, so the first insertion is the minimum.
    for (&e, set) in &spanner.levels {
        for edge in set.iter() {
            edges.entry(edge).or_insert(level_t(e));
        }
    }
    SpannerWeightedGraph { edges }
}

/// All levels of the plan, built independently.
pub fn build_all_levels(
    points: &PointSet,
    shift: &ShiftVector,
    plan: &LevelPlan,
    config: &AlgorithmConfig,
) -> BTreeMap<u32, LevelBuild> {
    let exps: Vec<u32> = plan.exponents().collect();
    let build = |&e: &u32| (e, build_level(points, e, shift, plan, config, config.strategy));
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        exps.par_iter().map(build).collect::<Vec<_>>().into_iter().collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        exps.iter().map(build).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use crate::geometry::normalize_aspect;
    use proptest::prelude::*;

    fn cfg(d: usize) -> AlgorithmConfig {
        AlgorithmConfig::for_dim(d)
    }

    fn random_points(n: usize, d: usize, seed: u64) -> PointSet {
        let mut rng = seeded_rng(seed, 0);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        normalize_aspect(&PointSet::from_rows(&rows).unwrap(), &cfg(d)).unwrap().points
    }

    #[test]
    fn edge_set_normalizes_and_rejects_loops() {
        let s = EdgeSet::new([(3, 1), (1, 3), (0, 2)]).unwrap();
        assert_eq!(s.as_slice(), &[(0, 2), (1, 3)]);
        assert!(EdgeSet::new([(2, 2)]).is_err());
    }

    #[test]
    fn collinear_triple_threshold_is_complete() {
        let p = PointSet::from_rows(&[[0.0], [8.0], [16.0]]).unwrap();
        let mut out = Vec::new();
        threshold_edges(&p, &[0, 1, 2], 16.0, &mut out);
        assert_eq!(EdgeSet::new(out).unwrap().as_slice(), &[(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn two_close_points_are_linked_by_every_strategy() {
        let p = PointSet::from_rows(&[[100.0, 100.0], [103.0, 104.0]]).unwrap();
        let shift = ShiftVector::zero(2);
        for s in SpannerStrategy::ALL {
            let mut rng = seeded_rng(0, 0);
            let cell = [0, 1];
            let edges = match s {
                SpannerStrategy::ExactThreshold => {
                    let mut v = Vec::new();
                    threshold_edges(&p, &cell, 8.0, &mut v);
                    v
                }
                SpannerStrategy::CellLeader => {
                    let mut v = Vec::new();
                    leader_edges(&p, &cell, 8.0, &shift, &mut v);
                    v
                }
                SpannerStrategy::SampledLeader => sampled_edges(&p, &cell, 8.0, &shift, 100.0, &mut rng),
            };
            assert!(has_two_hop_property(&p, &cell, 8.0, &edges), "{s}");
        }
    }

    #[test]
    fn rejects_levels_outside_plan() {
        let p = random_points(10, 2, 1);
        let shift = ShiftVector::zero(2);
        assert!(build_spanner_level(&p, 3.0, &shift, &cfg(2), SpannerStrategy::CellLeader).is_err());
        assert!(build_spanner_level(&p, 2f64.powi(60), &shift, &cfg(2), SpannerStrategy::CellLeader).is_err());
        assert!(build_spanner_level(&p, 8.0, &shift, &cfg(2), SpannerStrategy::CellLeader).is_ok());
    }

    /// Brute-force 2-hop reachability over all pairs, plus length and cell checks.
    fn check_contract(p: &PointSet, e: u32, shift: &ShiftVector, plan: &LevelPlan, s: SpannerStrategy, edges: &EdgeSet) {
        let t = level_t(e);
        let n = p.len() as u32;
        let cell_of_pt = |x: u32| plan.big_cell_level(e).map(|side| cell_coords(p.point(x as usize), side, shift));
        let mut adj = vec![vec![false; n as usize]; n as usize];
        for (u, v) in edges.iter() {
            assert!(p.dist(u as usize, v as usize) <= s.stretch_bound() * t);
            assert_eq!(cell_of_pt(u), cell_of_pt(v), "edge crosses cell");
            adj[u as usize][v as usize] = true;
            adj[v as usize][u as usize] = true;
        }
        for a in 0..n {
            for b in a + 1..n {
                if p.dist(a as usize, b as usize) > t || cell_of_pt(a) != cell_of_pt(b) {
                    continue;
                }
                let ok = adj[a as usize][b as usize] || (0..n as usize).any(|r| adj[a as usize][r] && adj[r][b as usize]);
                assert!(ok, "no 2-hop path for {a}-{b} at t={t}");
            }
        }
    }

    #[test]
    fn two_hop_contract_on_random_d8_instance() {
        let p = random_points(200, 8, 3);
        let config = cfg(8);
        let plan = LevelPlan::new(&config, 200, 8);
        let shift = ShiftVector::random(8, plan.delta, 11);
        // Pick the level where roughly a tenth of the pairs fall within t.
        let mut ds: Vec<f64> = (0..200).flat_map(|i| (i + 1..200).map(move |j| (i, j))).map(|(i, j)| p.dist(i, j)).collect();
        ds.sort_by(f64::total_cmp);
        let e = ds[ds.len() / 10].log2().ceil() as u32;
        for s in SpannerStrategy::ALL {
            let b = build_level(&p, e, &shift, &plan, &config, s);
            check_contract(&p, e, &shift, &plan, s, &b.edges);
        }
    }

    #[test]
    fn every_level_satisfies_contract_small() {
        let p = random_points(60, 2, 8);
        let config = cfg(2);
        let plan = LevelPlan::new(&config, 60, 2);
        let shift = ShiftVector::random(2, plan.delta, 4);
        for s in SpannerStrategy::ALL {
            for e in plan.exponents() {
                let b = build_level(&p, e, &shift, &plan, &config, s);
                check_contract(&p, e, &shift, &plan, s, &b.edges);
            }
        }
    }

    #[test]
    fn accumulate_examples() {
        let a = EdgeSet::new([(0, 1)]).unwrap();
        let single: BTreeMap<u32, EdgeSet> = [(0, a.clone())].into();
        assert_eq!(accumulate_levels(&single, 1.0).unwrap().at(0), &a);
        let two: BTreeMap<u32, EdgeSet> = [(0, a.clone()), (1, EdgeSet::default())].into();
        let acc = accumulate_levels(&two, 1.0).unwrap();
        assert_eq!(acc.at(1), &a);
        let gap: BTreeMap<u32, EdgeSet> = [(0, a.clone()), (2, a)].into();
        assert!(accumulate_levels(&gap, 1.0).is_err());
    }

    #[test]
    fn weight_graph_examples() {
        let empty = LeveledSpanner { levels: BTreeMap::new(), stretch_bound: 1.0 };
        assert!(spanner_weight_graph(&empty).edges.is_empty());
        let per: BTreeMap<u32, EdgeSet> = [
            (0, EdgeSet::default()),
            (1, EdgeSet::default()),
            (2, EdgeSet::new([(4, 5)]).unwrap()),
        ]
        .into();
        let g = spanner_weight_graph(&accumulate_levels(&per, 1.0).unwrap());
        assert_eq!(g.edges[&(4, 5)], 4.0);
    }

    fn arb_levels() -> impl Strategy<Value = BTreeMap<u32, EdgeSet>> {
        prop::collection::vec(prop::collection::vec((0u32..8, 0u32..8), 0..6), 1..6).prop_map(|lv| {
            lv.into_iter()
                .enumerate()
                .map(|(e, es)| (e as u32, EdgeSet::new(es.into_iter().filter(|(a, b)| a != b)).unwrap()))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn accumulation_is_prefix_union(per in arb_levels()) {
            let acc = accumulate_levels(&per, 1.0).unwrap();
            let mut prev = 0;
            for (&e, set) in &acc.levels {
                prop_assert!(set.len() >= prev);
                prev = set.len();
                let mut oracle: Vec<(u32, u32)> = per.range(..=e).flat_map(|(_, s)| s.iter()).collect();
                oracle.sort_unstable();
                oracle.dedup();
                prop_assert_eq!(set.as_slice(), &oracle[..]);
            }
            let g = spanner_weight_graph(&acc);
            for (&(u, v), &w) in &g.edges {
                // Linear scan for the first level holding the edge.
                let first = per.iter().find(|(_, s)| s.contains(u, v)).map(|(&e, _)| level_t(e)).unwrap();
                prop_assert_eq!(w, first);
            }
        }
    }
}
