//! Euler tours of trees: construction, re-rooting, subtree statistics,
//! child-order-consistent tours, joins and hierarchical assembly.
//!
//! Positions are 0-based internally; `tour_from_child_order` reports 1-based
//! positions to match the usual statement of the construction.

mod hierarchy;
mod join;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};

pub use hierarchy::{
    euler_tour_via_hierarchy, level_cluster_diameters, pipeline_levels, HierarchyTour, MicroLevels,
};
pub use join::{euler_tour_join, EdgeMap, JoinInput};

/// Cyclic sequence of directed tree edges; empty for a single node.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerTour {
    pub seq: Vec<(u32, u32)>,
}

impl EulerTour {
    pub fn new(seq: Vec<(u32, u32)>) -> Self {
        EulerTour { seq }
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn root(&self) -> Option<u32> {
        self.seq.first().map(|e| e.0)
    }

    /// Smallest position whose edge leaves `v`.
    pub fn first_positions(&self) -> HashMap<u32, usize> {
        let mut out = HashMap::new();
        for (i, &(u, _)) in self.seq.iter().enumerate() {
            out.entry(u).or_insert(i);
        }
        out
    }

    /// Largest position whose edge enters `v`.
    pub fn last_positions(&self) -> HashMap<u32, usize> {
        self.seq.iter().enumerate().map(|(i, &(_, v))| (v, i)).collect()
    }

    /// Nodes in order of first appearance, root first.
    pub fn nodes(&self) -> Vec<u32> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &(u, v) in &self.seq {
            for x in [u, v] {
                if seen.insert(x) {
                    out.push(x);
                }
            }
        }
        out
    }

    /// Undirected edges, as `(min, max)`, sorted.
    pub fn undirected_edges(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = self.seq.iter().filter(|(u, v)| u < v).copied().collect();
        out.sort_unstable();
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TourViolation {
    #[error("tour has {got} edges, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("edges {at} and {next} do not chain")]
    BrokenChain { at: usize, next: usize },
    #[error("directed edge ({0}, {1}) appears more than once")]
    Repeated(u32, u32),
    #[error("directed edge ({0}, {1}) is not a tree edge")]
    Foreign(u32, u32),
}

/// Checks chaining, length `2(n-1)` and exactly-once use of each direction.
pub fn validate_tour(tour: &EulerTour, tree_edges: &[(u32, u32)]) -> std::result::Result<(), TourViolation> {
    let expected = 2 * tree_edges.len();
    if tour.len() != expected {
        return Err(TourViolation::WrongLength { expected, got: tour.len() });
    }
    let allowed: BTreeSet<(u32, u32)> = tree_edges.iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect();
    let mut used = BTreeSet::new();
    for &(u, v) in &tour.seq {
        if !allowed.contains(&(u, v)) {
            return Err(TourViolation::Foreign(u, v));
        }
        if !used.insert((u, v)) {
            return Err(TourViolation::Repeated(u, v));
        }
    }
    let m = tour.len();
    for (i, &(_, v)) in tour.seq.iter().enumerate() {
        let next = (i + 1) % m;
        if tour.seq[next].0 != v {
            return Err(TourViolation::BrokenChain { at: i, next });
        }
    }
    Ok(())
}

/// DFS tour from `root`, visiting neighbours in edge-list order.
pub fn dfs_euler_tour(edges: &[(u32, u32)], root: u32) -> Result<EulerTour> {
    let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
    for &(u, v) in edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    if edges.is_empty() {
        return Ok(EulerTour::default());
    }
    if !adj.contains_key(&root) {
        return Err(Error::invalid(format!("root {root} is not in the tree")));
    }
    let mut seq = Vec::with_capacity(2 * edges.len());
    let mut visited: BTreeSet<u32> = [root].into();
    // (node, parent, next neighbour index)
    let mut stack = vec![(root, u32::MAX, 0usize)];
    while let Some(top) = stack.last_mut() {
        let (u, parent, next) = *top;
        let nbrs = &adj[&u];
        if next < nbrs.len() {
            top.2 += 1;
            let v = nbrs[next];
            if v == parent {
                continue;
            }
            if !visited.insert(v) {
                return Err(Error::invalid(format!("edges contain a cycle through {v}")));
            }
            seq.push((u, v));
            stack.push((v, u, 0));
        } else {
            stack.pop();
            if parent != u32::MAX {
                seq.push((u, parent));
            }
        }
    }
    if visited.len() != adj.len() {
        return Err(Error::invalid(format!(
            "tree is disconnected: reached {} of {} nodes",
            visited.len(),
            adj.len()
        )));
    }
    Ok(EulerTour { seq })
}

/// Circular shift so the tour starts at the first edge leaving `v`.
pub fn change_root(tour: &EulerTour, v: u32) -> Result<EulerTour> {
    if tour.is_empty() {
        return Ok(EulerTour::default());
    }
    let i = tour
        .seq
        .iter()
        .position(|e| e.0 == v)
        .ok_or_else(|| Error::invalid(format!("node {v} is not on the tour")))?;
    let mut seq = tour.seq[i..].to_vec();
    seq.extend_from_slice(&tour.seq[..i]);
    Ok(EulerTour { seq })
}

/// Subtree sizes `(last - first + 1) / 2 + 1` with respect to the tour's root.
pub fn subtree_sizes(tour: &EulerTour) -> BTreeMap<u32, usize> {
    let first = tour.first_positions();
    let last = tour.last_positions();
    let mut out = BTreeMap::new();
    for (&v, &f) in &first {
        // A leaf's last entry sits right before its first exit.
        let l = last[&v] as isize;
        out.insert(v, ((l - f as isize + 1) / 2 + 1) as usize);
    }
    out
}

/// Parent of every node, read off the edge before its first appearance; the root maps to itself.
pub fn parents(tour: &EulerTour) -> BTreeMap<u32, u32> {
    let mut out = BTreeMap::new();
    if let Some(r) = tour.root() {
        out.insert(r, r);
    }
    for &(u, v) in &tour.seq {
        out.entry(v).or_insert(u);
    }
    out
}

/// Root-to-node path weights via the signed prefix sum over the tour.
pub fn path_prefix_sum(tour: &EulerTour, weights: &HashMap<(u32, u32), f64>) -> Result<BTreeMap<u32, f64>> {
    let mut out = BTreeMap::new();
    let Some(root) = tour.root() else {
        return Ok(out);
    };
    out.insert(root, 0.0);
    let mut running = 0.0;
    for &(u, v) in &tour.seq {
        let w = *weights
            .get(&(u.min(v), u.max(v)))
            .ok_or_else(|| Error::invalid(format!("no weight for edge ({u}, {v})")))?;
        if let std::collections::btree_map::Entry::Vacant(slot) = out.entry(v) {
            running += w;
            slot.insert(running);
        } else {
            running -= w;
        }
    }
    Ok(out)
}

/// Rooted tree with an explicit order on each node's children.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClusterTree {
    pub root: u32,
    pub parent: BTreeMap<u32, u32>,
    pub children: BTreeMap<u32, Vec<u32>>,
}

impl ClusterTree {
    pub fn new(root: u32, children: BTreeMap<u32, Vec<u32>>) -> Result<Self> {
        let mut parent: BTreeMap<u32, u32> = [(root, root)].into();
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &c in children.get(&u).into_iter().flatten() {
                if parent.insert(c, u).is_some() {
                    return Err(Error::invalid(format!("node {c} has two parents")));
                }
                stack.push(c);
            }
        }
        let listed: BTreeSet<u32> = children.keys().chain(children.values().flatten()).copied().collect();
        if listed.iter().any(|x| !parent.contains_key(x)) {
            return Err(Error::invalid("children map is not a tree rooted at the given root"));
        }
        Ok(ClusterTree { root, parent, children })
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        self.parent.iter().filter(|(c, p)| c != p).map(|(&c, &p)| (p, c)).collect()
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }
}

/// Tour whose sibling first-appearances follow `children` order, with the
/// 1-based position of every directed edge.
///
/// Positions come from a closed form on an arbitrary tour: each node gets
/// `1 + sum of 2 * size(earlier siblings)`, summed along the root path; the
/// return edge of `u` sits `2 * size(u) - 1` after its entry edge.
pub fn tour_from_child_order(tree: &ClusterTree) -> Result<(EulerTour, BTreeMap<(u32, u32), usize>)> {
    let edges = tree.edges();
    if edges.is_empty() {
        return Ok((EulerTour::default(), BTreeMap::new()));
    }
    // Any tour will do for sizes and path sums; use id order.
    let mut sorted = edges.clone();
    sorted.sort_unstable();
    let arbitrary = change_root(&dfs_euler_tour(&sorted, tree.root)?, tree.root)?;
    let size = subtree_sizes(&arbitrary);
    let mut offset: HashMap<(u32, u32), f64> = HashMap::new();
    for (&p, kids) in &tree.children {
        let mut acc = 1;
        for &c in kids {
            offset.insert((p.min(c), p.max(c)), acc as f64);
            acc += 2 * size[&c];
        }
    }
    let entry = path_prefix_sum(&arbitrary, &offset)?;
    let m = 2 * edges.len();
    let mut seq = vec![None; m];
    let mut positions = BTreeMap::new();
    for &(p, c) in &edges {
        let down = entry[&c] as usize;
        let up = down + 2 * size[&c] - 1;
        for (pos, e) in [(down, (p, c)), (up, (c, p))] {
            if pos == 0 || pos > m || seq[pos - 1].replace(e).is_some() {
                return Err(Error::consistency("tour_from_child_order", format!("position {pos} is not free")));
            }
            positions.insert(e, pos);
        }
    }
    let seq = seq.into_iter().map(|e| e.expect("positions are a bijection")).collect();
    Ok((EulerTour { seq }, positions))
}

/// Places each insert `(f, A)` between `base[f-1]` and `base[f]` (so `f = 0` prepends).
pub fn sequence_insert<T: Clone>(base: &[T], inserts: Vec<(usize, Vec<T>)>) -> Result<Vec<T>> {
    let mut by_index: BTreeMap<usize, Vec<T>> = BTreeMap::new();
    for (f, seq) in inserts {
        if f > base.len() {
            return Err(Error::invalid(format!("insert index {f} beyond length {}", base.len())));
        }
        if by_index.insert(f, seq).is_some() {
            return Err(Error::invalid(format!("two inserts at index {f}")));
        }
    }
    let extra: usize = by_index.values().map(Vec::len).sum();
    let mut out = Vec::with_capacity(base.len() + extra);
    let mut pending = by_index.into_iter().peekable();
    for i in 0..=base.len() {
        if let Some((_, seq)) = pending.next_if(|(f, _)| *f == i) {
            out.extend(seq);
        }
        if i < base.len() {
            out.push(base[i].clone());
        }
    }
    Ok(out)
}
