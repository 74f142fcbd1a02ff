//! Exact quadratic-time references.

use std::collections::VecDeque;

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::geometry::{cell_coords, PointSet, ShiftVector};
use crate::partition::Partition;

/// Largest input the quadratic oracles accept.
pub const ORACLE_MAX_N: usize = 5000;

fn guard(points: &PointSet) -> Result<()> {
    if points.len() > ORACLE_MAX_N {
        return Err(Error::invalid(format!(
            "oracle is capped at {ORACLE_MAX_N} points, got {}",
            points.len()
        )));
    }
    Ok(())
}

/// Prim's algorithm over the complete graph.
pub fn exact_mst(points: &PointSet) -> Result<(Vec<(u32, u32)>, f64)> {
    guard(points)?;
    let n = points.len();
    if n == 0 {
        return Err(Error::invalid("empty point set"));
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0u32; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut weight = 0.0;
    best[0] = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .expect("a vertex remains");
        in_tree[u] = true;
        if u != 0 {
            edges.push((parent[u], u as u32));
            weight += best[u];
        }
        for v in 0..n {
            if !in_tree[v] {
                let dv = points.dist(u, v);
                if dv < best[v] {
                    best[v] = dv;
                    parent[v] = u as u32;
                }
            }
        }
    }
    Ok((edges, weight))
}

/// Kruskal over the complete graph; an independent cross-check for `exact_mst`.
pub fn kruskal_mst(points: &PointSet) -> Result<f64> {
    guard(points)?;
    let n = points.len();
    let mut all: Vec<(f64, u32, u32)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (points.dist(i, j), i as u32, j as u32))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    graph_mst(n, &all)
}

/// Kruskal over a weighted edge list; errors if the graph is disconnected.
pub fn graph_mst(n: usize, edges: &[(f64, u32, u32)]) -> Result<f64> {
    let mut sorted = edges.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut uf = UnionFind::<u32>::new(n);
    let mut used = 0;
    let mut total = 0.0;
    for (w, u, v) in sorted {
        if uf.union(u, v) {
            used += 1;
            total += w;
        }
    }
    if n > 0 && used != n - 1 {
        return Err(Error::invalid(format!("graph is disconnected: {} components", n - used)));
    }
    Ok(total)
}

/// Connected components of an unweighted graph on `0..n`, by BFS.
pub fn graph_components(n: usize, edges: &[(u32, u32)]) -> Partition {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    let mut label = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        if label[s] != u32::MAX {
            continue;
        }
        label[s] = s as u32;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if label[v as usize] == u32::MAX {
                    label[v as usize] = s as u32;
                    queue.push_back(v as usize);
                }
            }
        }
    }
    Partition::from_leaders(label).expect("BFS roots are the smallest ids of their components")
}

/// Components of the threshold graph `||x - y|| <= t`.
pub fn threshold_components(points: &PointSet, t: f64) -> Result<Partition> {
    guard(points)?;
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("threshold must be nonnegative, got {t}")));
    }
    let n = points.len();
    let mut label = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        if label[s] != u32::MAX {
            continue;
        }
        label[s] = s as u32;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if label[v] == u32::MAX && points.dist(u, v) <= t {
                    label[v] = s as u32;
                    queue.push_back(v);
                }
            }
        }
    }
    Ok(Partition::from_leaders(label).expect("BFS roots lead"))
}

/// `sum_i 2^(i+1) (|P_(2^i)| - |P_(2^(i+1))|)` from `t = 1` until one component remains.
pub fn component_sum(points: &PointSet) -> Result<f64> {
    guard(points)?;
    if points.len() <= 1 {
        return Ok(0.0);
    }
    let mut t = 1.0;
    let mut count = threshold_components(points, t)?.num_components();
    let mut sum = 0.0;
    while count > 1 {
        let next = threshold_components(points, 2.0 * t)?.num_components();
        sum += 2.0 * t * (count - next) as f64;
        count = next;
        t *= 2.0;
    }
    Ok(sum)
}

/// `sum_t t * n_t` where `n_t` counts nonempty cells of side `t / sqrt(d)`,
/// from `t = 1` up to the first level with a single cell.
pub fn quadtree_cell_sum(points: &PointSet, shift: &ShiftVector) -> f64 {
    let sqrt_d = (points.dim() as f64).sqrt();
    let mut t = 1.0;
    let mut sum = 0.0;
    loop {
        let mut cells: Vec<Vec<i64>> = points.rows().map(|p| cell_coords(p, t / sqrt_d, shift)).collect();
        cells.sort();
        cells.dedup();
        sum += t * cells.len() as f64;
        if cells.len() <= 1 {
            return sum;
        }
        t *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AlgorithmConfig;
    use crate::geometry::{normalize_aspect, seeded_rng};
    use crate::partition::refines;
    use proptest::prelude::*;
    use rand::Rng;

    fn random(n: usize, d: usize, seed: u64) -> PointSet {
        let mut rng = seeded_rng(seed, 0);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(0.0..10.0)).collect()).collect();
        PointSet::from_rows(&rows).unwrap()
    }

    #[test]
    fn small_msts() {
        let two = PointSet::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        assert_eq!(exact_mst(&two).unwrap().1, 5.0);
        let square = PointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(exact_mst(&square).unwrap().1, 3.0);
    }

    #[test]
    fn prim_matches_kruskal() {
        let p = random(200, 3, 17);
        let (edges, w) = exact_mst(&p).unwrap();
        assert_eq!(edges.len(), 199);
        let k = kruskal_mst(&p).unwrap();
        assert!((w - k).abs() <= 1e-9 * k);
    }

    #[test]
    fn graph_mst_examples() {
        assert_eq!(graph_mst(3, &[(1.0, 0, 1), (2.0, 1, 2), (3.0, 0, 2)]).unwrap(), 3.0);
        assert_eq!(graph_mst(3, &[(1.5, 0, 1), (2.5, 1, 2)]).unwrap(), 4.0);
        let err = graph_mst(4, &[(1.0, 0, 1)]).unwrap_err().to_string();
        assert!(err.contains("3 components"), "{err}");
    }

    #[test]
    fn threshold_examples() {
        let p = PointSet::from_rows(&[[0.0], [1.0], [3.0]]).unwrap();
        let c = threshold_components(&p, 1.0).unwrap();
        assert_eq!(c.components().into_values().collect::<Vec<_>>(), vec![vec![0, 1], vec![2]]);
        assert_eq!(threshold_components(&p, 3.0).unwrap().num_components(), 1);
    }

    #[test]
    fn component_sum_examples() {
        let single = PointSet::from_rows(&[[4.0]]).unwrap();
        assert_eq!(component_sum(&single).unwrap(), 0.0);
        // distance 5 lies in (4, 8]
        let pair = PointSet::from_rows(&[[0.0], [5.0]]).unwrap();
        assert_eq!(component_sum(&pair).unwrap(), 8.0);
    }

    #[test]
    fn oracle_cap() {
        let big = PointSet::new(vec![0.0; ORACLE_MAX_N + 1], 1).unwrap();
        assert!(exact_mst(&big).is_err());
    }

    #[test]
    fn spanner_mst_respects_stretch() {
        use crate::pipeline::run_pipeline;
        use crate::spanner::spanner_weight_graph;
        let p = random(120, 2, 5);
        let out = run_pipeline(&p, &AlgorithmConfig::for_dim(2)).unwrap();
        let pts = &out.normalized.points;
        let g = spanner_weight_graph(&out.spanner);
        let weighted: Vec<(f64, u32, u32)> = g.edges.iter().map(|(&(u, v), &w)| (w, u, v)).collect();
        let by_level = graph_mst(120, &weighted).unwrap();
        let exact = exact_mst(pts).unwrap().1;
        // Level weights are at least the Euclidean length over the stretch bound.
        assert!(by_level * out.spanner.stretch_bound >= exact);
    }

    proptest! {
        #[test]
        fn thresholds_nest(seed in 0u64..1000, t in 0.5f64..4.0) {
            let p = random(40, 2, seed);
            let a = threshold_components(&p, t).unwrap();
            let b = threshold_components(&p, 2.0 * t).unwrap();
            prop_assert!(refines(&a, &b).unwrap());
        }

        #[test]
        fn component_sum_sandwich(seed in 0u64..1000, n in 2usize..60, d in 1usize..5) {
            let p = random(n, d, seed);
            let norm = normalize_aspect(&p, &AlgorithmConfig::for_dim(d)).unwrap();
            prop_assume!(!norm.degenerate);
            let mst = exact_mst(&norm.points).unwrap().1;
            let s = component_sum(&norm.points).unwrap();
            prop_assert!(mst <= s && s <= 2.0 * mst, "{} {}", mst, s);
        }

        #[test]
        fn quadtree_sum_bounds_mst(seed in 0u64..1000, n in 2usize..60, d in 1usize..4) {
            let p = random(n, d, seed);
            let norm = normalize_aspect(&p, &AlgorithmConfig::for_dim(d)).unwrap();
            prop_assume!(!norm.degenerate);
            let shift = ShiftVector::random(d, norm.scale.delta, seed);
            let mst = exact_mst(&norm.points).unwrap().1;
            prop_assert!(mst <= quadtree_cell_sum(&norm.points, &shift));
        }
    }
}
