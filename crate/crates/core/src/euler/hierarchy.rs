//! Tour assembly over a merge hierarchy by repeated doubling.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::join::{charge_join, EdgeMap, JoinInput};
use super::{dfs_euler_tour, euler_tour_join, validate_tour, EulerTour};
use crate::error::{Error, Result};
use crate::partition::{merge_with_edges, Partition};
use crate::pipeline::{PartitionHierarchy, Stage};
use crate::runtime::{pointer_jumps, prim, RoundLedger};

/// Leader maps `C_0..C_L` and the edge sets `E_1..E_L` merging them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MicroLevels {
    pub levels: Vec<Partition>,
    pub edges: Vec<Vec<(u32, u32)>>,
}

/// Tour of the hierarchy's tree plus bookkeeping about how it was built.
#[derive(Clone, Debug)]
pub struct HierarchyTour {
    pub tour: EulerTour,
    pub edges: Vec<(u32, u32)>,
    pub padded_levels: usize,
    pub iterations: u32,
    /// Largest hop diameter among the base cluster trees.
    pub base_diameter: usize,
}

/// Splits every pipeline level into one micro-level per compression round
/// and one for the star merge, dropping micro-levels without edges.
pub fn pipeline_levels(hierarchy: &PartitionHierarchy) -> Result<MicroLevels> {
    let n = hierarchy.levels.values().next().map_or(0, Partition::len);
    let mut current = Partition::singletons(n);
    let mut out = MicroLevels { levels: vec![current.clone()], edges: Vec::new() };
    for (&e, target) in &hierarchy.levels {
        let mut by_stage: BTreeMap<(bool, u32), Vec<(u32, u32)>> = BTreeMap::new();
        for &(u, v, stage) in hierarchy.edges.get(&e).into_iter().flatten() {
            let key = match stage {
                Stage::Round(i) => (false, i),
                Stage::Star => (true, 0),
            };
            by_stage.entry(key).or_default().push((u, v));
        }
        for (_, edges) in by_stage {
            current = merge_with_edges(&current, &edges);
            out.levels.push(current.clone());
            out.edges.push(edges);
        }
        if !current.same_blocks(target) {
            return Err(Error::consistency("pipeline_levels", format!("edges up to level {e} do not produce its partition")));
        }
    }
    Ok(out)
}

/// Hop diameter of every cluster tree, keyed by pipeline level: clusters are
/// the blocks just below the level, edges are the level's tree edges.
pub fn level_cluster_diameters(hierarchy: &PartitionHierarchy) -> BTreeMap<u32, usize> {
    let mut out = BTreeMap::new();
    for &e in hierarchy.levels.keys() {
        let below = hierarchy.below(e);
        let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
        for &(u, v, _) in hierarchy.edges.get(&e).into_iter().flatten() {
            let (a, b) = (below.leader(u), below.leader(v));
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        out.insert(e, forest_diameter(&adj));
    }
    out
}

fn bfs_far(adj: &HashMap<u32, Vec<u32>>, start: u32) -> (u32, usize, Vec<u32>) {
    let mut dist: HashMap<u32, usize> = [(start, 0)].into();
    let mut queue = VecDeque::from([start]);
    let mut far = (start, 0);
    let mut order = Vec::new();
    while let Some(u) = queue.pop_front() {
        order.push(u);
        let du = dist[&u];
        if du > far.1 {
            far = (u, du);
        }
        for &v in &adj[&u] {
            if !dist.contains_key(&v) {
                dist.insert(v, du + 1);
                queue.push_back(v);
            }
        }
    }
    (far.0, far.1, order)
}

fn forest_diameter(adj: &HashMap<u32, Vec<u32>>) -> usize {
    let mut seen = BTreeSet::new();
    let mut best = 0;
    let mut nodes: Vec<u32> = adj.keys().copied().collect();
    nodes.sort_unstable();
    for s in nodes {
        if seen.contains(&s) {
            continue;
        }
        let (a, _, order) = bfs_far(adj, s);
        seen.extend(order);
        best = best.max(bfs_far(adj, a).1);
    }
    best
}

#[derive(Clone, Debug, Default)]
struct Block {
    /// Point-level edges of the block's tree.
    edges: Vec<(u32, u32)>,
    /// Tour over point-level edges.
    tour: Vec<(u32, u32)>,
}

fn check_levels(levels: &[Partition], edge_sets: &[Vec<(u32, u32)>]) -> Result<usize> {
    if levels.len() != edge_sets.len() + 1 {
        return Err(Error::invalid(format!("{} leader maps for {} edge sets", levels.len(), edge_sets.len())));
    }
    let n = levels[0].len();
    if levels.iter().any(|p| p.len() != n) {
        return Err(Error::invalid("leader maps cover different point counts"));
    }
    if levels[0].num_components() != n {
        return Err(Error::invalid("lowest level is not all singletons"));
    }
    if n > 0 && levels.last().map(Partition::num_components) != Some(1) {
        return Err(Error::invalid("top level is not a single cluster"));
    }
    for (l, edges) in edge_sets.iter().enumerate() {
        let (lo, hi) = (&levels[l], &levels[l + 1]);
        if !merge_with_edges(lo, edges).same_blocks(hi) || lo.num_components() != hi.num_components() + edges.len() {
            return Err(Error::invalid(format!("level {} is not its predecessor merged by a forest", l + 1)));
        }
    }
    Ok(n)
}

/// Tour of the tree `(V, E_1 ∪ … ∪ E_L)` built bottom-up: base tours of each
/// level's cluster trees, then `log2 L` rounds that join adjacent level
/// blocks through the level-projection edge maps.
pub fn euler_tour_via_hierarchy(
    levels: &[Partition],
    edge_sets: &[Vec<(u32, u32)>],
    ledger: &mut RoundLedger,
) -> Result<HierarchyTour> {
    let n = check_levels(levels, edge_sets)?;
    let padded = edge_sets.len().max(1).next_power_of_two();
    let mut levels = levels.to_vec();
    let mut edge_sets = edge_sets.to_vec();
    while edge_sets.len() < padded {
        levels.push(levels.last().expect("at least one level").clone());
        edge_sets.push(Vec::new());
    }
    let words = 2 * n as u64;

    // Base tours: per level, per cluster, the tree over its sub-clusters.
    let mut blocks: Vec<HashMap<u32, Block>> = vec![HashMap::new(); padded + 1];
    let mut base_diameter = 0;
    for l in 1..=padded {
        let (lo, hi) = (&levels[l - 1], &levels[l]);
        let mut groups: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
        for &(u, v) in &edge_sets[l - 1] {
            groups.entry(hi.leader(u)).or_default().push((u, v));
        }
        for (c, point_edges) in groups {
            let mut to_point: HashMap<(u32, u32), (u32, u32)> = HashMap::new();
            let mut cluster_edges = Vec::with_capacity(point_edges.len());
            let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
            for &(u, v) in &point_edges {
                let (a, b) = (lo.leader(u), lo.leader(v));
                to_point.insert((a, b), (u, v));
                to_point.insert((b, a), (v, u));
                cluster_edges.push((a, b));
                adj.entry(a).or_default().push(b);
                adj.entry(b).or_default().push(a);
            }
            base_diameter = base_diameter.max(forest_diameter(&adj));
            let root = *adj.keys().min().expect("group has edges");
            let tour = dfs_euler_tour(&cluster_edges, root)?;
            let tour = tour.seq.iter().map(|e| to_point[e]).collect();
            blocks[l].insert(c, Block { edges: point_edges, tour });
        }
    }
    ledger.charge_in("euler_base", prim::SORT, words, 2)?;
    for _ in 0..pointer_jumps(base_diameter) {
        ledger.charge_in("euler_base", prim::POINTER_JUMP, words, 2)?;
    }

    let iterations = padded.trailing_zeros();
    for r in 1..=iterations {
        let step = 1usize << r;
        let half = step / 2;
        ledger.charge_in("euler_join", prim::DUPLICATE, words, 2)?;
        let mut joins = Vec::new();
        for l in (step..=padded).step_by(step) {
            let (mid, low) = (l - half, l - step);
            let (p_hi, p_mid, p_low) = (&levels[l], &levels[mid], &levels[low]);
            let upper = std::mem::take(&mut blocks[l]);
            let mut lower = std::mem::take(&mut blocks[mid]);
            let mut merged = HashMap::new();
            for (c, members) in p_hi.components() {
                let mut sub = ledger.child();
                charge_join(&mut sub, 2 * members.len() as u64)?;
                joins.push(sub);

                let mut clusters: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
                for &x in &members {
                    clusters.entry(p_mid.leader(x)).or_default().insert(p_low.leader(x));
                }
                let top = upper.get(&c);
                if top.is_none() {
                    // Nothing merges between `mid` and `l`: C is a single mid-level cluster.
                    if let Some(b) = lower.remove(&c) {
                        merged.insert(c, b);
                    }
                    continue;
                }
                let top = top.expect("checked");
                let mut g = EdgeMap::new();
                let mut to_point: HashMap<(u32, u32), (u32, u32)> = HashMap::new();
                let mut tree = Vec::with_capacity(top.edges.len());
                for &(x, y) in &top.edges {
                    let (a, b) = (p_mid.leader(x), p_mid.leader(y));
                    let (ia, ib) = (p_low.leader(x), p_low.leader(y));
                    g.insert((a, b), (ia, ib));
                    to_point.insert((ia, ib), (x, y));
                    to_point.insert((ib, ia), (y, x));
                    tree.push((a, b));
                }
                let tour = EulerTour::new(top.tour.iter().map(|&(x, y)| (p_mid.leader(x), p_mid.leader(y))).collect());
                let mut subtrees = BTreeMap::new();
                let mut subtours = BTreeMap::new();
                let mut edges = top.edges.clone();
                for &o in clusters.keys() {
                    if let Some(b) = lower.remove(&o) {
                        let mut st = Vec::with_capacity(b.edges.len());
                        for &(x, y) in &b.edges {
                            let (ia, ib) = (p_low.leader(x), p_low.leader(y));
                            to_point.insert((ia, ib), (x, y));
                            to_point.insert((ib, ia), (y, x));
                            st.push((ia, ib));
                        }
                        let sub_tour = b.tour.iter().map(|&(x, y)| (p_low.leader(x), p_low.leader(y))).collect();
                        subtrees.insert(o, st);
                        subtours.insert(o, EulerTour::new(sub_tour));
                        edges.extend(b.edges);
                    }
                }
                let clusters: BTreeMap<u32, Vec<u32>> = clusters.into_iter().map(|(o, s)| (o, s.into_iter().collect())).collect();
                let input = JoinInput {
                    clusters: &clusters,
                    tree: &tree,
                    tour: &tour,
                    edge_map: &g,
                    subtrees: &subtrees,
                    subtours: &subtours,
                };
                let (_, joined) = euler_tour_join(&input)?;
                let tour = joined.seq.iter().map(|e| to_point[e]).collect();
                merged.insert(c, Block { edges, tour });
            }
            blocks[l] = merged;
        }
        ledger.parallel_group(joins);
    }

    let top = levels[padded].components().keys().next().and_then(|c| blocks[padded].remove(c)).unwrap_or_default();
    let tour = EulerTour::new(top.tour);
    let mut edges: Vec<(u32, u32)> = edge_sets.concat();
    edges.sort_unstable();
    validate_tour(&tour, &edges).map_err(|v| Error::consistency("euler_tour_via_hierarchy", v.to_string()))?;
    Ok(HierarchyTour { tour, edges, padded_levels: padded, iterations, base_diameter })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::euler_rounds_formula;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn build(n: usize, edge_sets: Vec<Vec<(u32, u32)>>) -> (Vec<Partition>, Vec<Vec<(u32, u32)>>) {
        let mut levels = vec![Partition::singletons(n)];
        for e in &edge_sets {
            let next = merge_with_edges(levels.last().unwrap(), e);
            levels.push(next);
        }
        (levels, edge_sets)
    }

    #[test]
    fn two_points_one_level() {
        let (levels, edges) = build(2, vec![vec![(0, 1)]]);
        let mut ledger = RoundLedger::default();
        let out = euler_tour_via_hierarchy(&levels, &edges, &mut ledger).unwrap();
        assert_eq!(out.tour.len(), 2);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn pairwise_then_full() {
        let (levels, edges) = build(4, vec![vec![(0, 1), (2, 3)], vec![(1, 2)]]);
        let mut ledger = RoundLedger::default();
        let out = euler_tour_via_hierarchy(&levels, &edges, &mut ledger).unwrap();
        validate_tour(&out.tour, &[(0, 1), (2, 3), (1, 2)]).unwrap();
        assert_eq!(ledger.rounds, euler_rounds_formula(2, out.base_diameter, ledger.costs()));
    }

    #[test]
    fn single_point_and_padding() {
        let (levels, edges) = build(1, vec![]);
        let mut ledger = RoundLedger::default();
        assert!(euler_tour_via_hierarchy(&levels, &edges, &mut ledger).unwrap().tour.is_empty());
        // Three levels pad to four.
        let (levels, edges) = build(4, vec![vec![(0, 1)], vec![(2, 3)], vec![(0, 3)]]);
        let out = euler_tour_via_hierarchy(&levels, &edges, &mut RoundLedger::default()).unwrap();
        assert_eq!(out.padded_levels, 4);
        assert_eq!(out.iterations, 2);
    }

    #[test]
    fn rejects_inconsistent_levels() {
        let (mut levels, edges) = build(3, vec![vec![(0, 1)], vec![(1, 2)]]);
        levels[1] = Partition::singletons(3);
        assert!(euler_tour_via_hierarchy(&levels, &edges, &mut RoundLedger::default()).is_err());
        // Cycle-forming edge sets fail the count condition.
        let (levels, edges) = build(3, vec![vec![(0, 1), (1, 2), (0, 2)]]);
        assert!(euler_tour_via_hierarchy(&levels, &edges, &mut RoundLedger::default()).is_err());
    }

    #[test]
    fn diameter_of_path_and_star() {
        let path: HashMap<u32, Vec<u32>> = [(0, vec![1]), (1, vec![0, 2]), (2, vec![1])].into();
        assert_eq!(forest_diameter(&path), 2);
        let star: HashMap<u32, Vec<u32>> = [(0, vec![1, 2, 3]), (1, vec![0]), (2, vec![0]), (3, vec![0])].into();
        assert_eq!(forest_diameter(&star), 2);
    }

    proptest! {
        #[test]
        fn random_hierarchies_give_valid_tours(n in 1usize..60, levels_wanted in 1usize..9, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // Random spanning tree, edges dealt into levels in Kruskal order.
            let mut tree: Vec<(u32, u32)> = (1..n as u32).map(|v| (rng.gen_range(0..v), v)).collect();
            for i in (1..tree.len()).rev() {
                tree.swap(i, rng.gen_range(0..=i));
            }
            let mut sets = vec![Vec::new(); levels_wanted];
            for e in tree {
                sets[rng.gen_range(0..levels_wanted)].push(e);
            }
            let (levels, edges) = build(n, sets);
            let mut ledger = RoundLedger::default();
            let out = euler_tour_via_hierarchy(&levels, &edges, &mut ledger).unwrap();
            prop_assert!(validate_tour(&out.tour, &out.edges).is_ok());
            prop_assert_eq!(ledger.rounds, euler_rounds_formula(out.padded_levels, out.base_diameter, ledger.costs()));
        }
    }
}
