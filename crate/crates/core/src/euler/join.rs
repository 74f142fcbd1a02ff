//! Joining a tour over clusters with per-cluster tours.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{change_root, parents, sequence_insert, tour_from_child_order, validate_tour, ClusterTree, EulerTour};
use crate::error::{Error, Result};
use crate::runtime::{RoundLedger, JOIN_STEPS};

/// Directed cluster edge `(C_i, C_j)` to the point pair `(x, y)` with `x` in
/// `C_i`. One direction per edge suffices; the other is read reversed.
pub type EdgeMap = HashMap<(u32, u32), (u32, u32)>;

/// Inputs of one join. Clusters without an entry in `subtrees`/`subtours`
/// are treated as having no internal edges.
#[derive(Clone, Copy, Debug)]
pub struct JoinInput<'a> {
    pub clusters: &'a BTreeMap<u32, Vec<u32>>,
    pub tree: &'a [(u32, u32)],
    pub tour: &'a EulerTour,
    pub edge_map: &'a EdgeMap,
    pub subtrees: &'a BTreeMap<u32, Vec<(u32, u32)>>,
    pub subtours: &'a BTreeMap<u32, EulerTour>,
}

fn lookup(g: &EdgeMap, a: u32, b: u32) -> Result<(u32, u32)> {
    g.get(&(a, b))
        .copied()
        .or_else(|| g.get(&(b, a)).map(|&(x, y)| (y, x)))
        .ok_or_else(|| Error::invalid(format!("edge map has no entry for cluster edge ({a}, {b})")))
}

static EMPTY_TOUR: EulerTour = EulerTour { seq: Vec::new() };

impl<'a> JoinInput<'a> {
    fn subtour(&self, c: u32) -> &'a EulerTour {
        self.subtours.get(&c).unwrap_or(&EMPTY_TOUR)
    }

    fn check(&self) -> Result<()> {
        if self.clusters.is_empty() {
            return Err(Error::invalid("no clusters"));
        }
        let mut owner: HashMap<u32, u32> = HashMap::new();
        for (&c, members) in self.clusters {
            if members.is_empty() {
                return Err(Error::invalid(format!("cluster {c} is empty")));
            }
            for &x in members {
                if owner.insert(x, c).is_some() {
                    return Err(Error::invalid(format!("node {x} is in two clusters")));
                }
            }
        }
        validate_tour(self.tour, self.tree).map_err(|v| Error::invalid(format!("cluster tour: {v}")))?;
        if self.tree.len() + 1 != self.clusters.len() {
            return Err(Error::invalid("cluster tree does not span the clusters"));
        }
        for &(a, b) in self.tree {
            let (x, y) = lookup(self.edge_map, a, b)?;
            if owner.get(&x) != Some(&a) || owner.get(&y) != Some(&b) {
                return Err(Error::invalid(format!("edge map sends ({a}, {b}) to ({x}, {y}) outside those clusters")));
            }
        }
        for (&c, members) in self.clusters {
            let edges = self.subtrees.get(&c).map(Vec::as_slice).unwrap_or(&[]);
            let tour = self.subtour(c);
            if edges.len() + 1 != members.len() {
                return Err(Error::invalid(format!("subtree of cluster {c} has {} edges for {} nodes", edges.len(), members.len())));
            }
            validate_tour(tour, edges).map_err(|v| Error::invalid(format!("subtour of cluster {c}: {v}")))?;
            if members.len() > 1 {
                let seen: BTreeSet<u32> = tour.nodes().into_iter().collect();
                let want: BTreeSet<u32> = members.iter().copied().collect();
                if seen != want {
                    return Err(Error::invalid(format!("subtour of cluster {c} does not cover its nodes")));
                }
            }
        }
        Ok(())
    }
}

/// Joined spanning tree and a tour of it.
///
/// Children of every cluster are reordered to follow the order in which the
/// cluster's own tour first reaches their attachment points, so each cluster
/// tour can be cut into terminal-to-terminal segments and spliced in after the
/// last arrival at each terminal.
pub fn euler_tour_join(input: &JoinInput) -> Result<(Vec<(u32, u32)>, EulerTour)> {
    input.check()?;
    let g = input.edge_map;
    let mut edges = input.tree.iter().map(|&(a, b)| lookup(g, a, b)).collect::<Result<Vec<_>>>()?;
    edges.extend(input.subtrees.values().flatten().copied());

    if input.clusters.len() == 1 {
        let &c = input.clusters.keys().next().expect("checked non-empty");
        return Ok((edges, input.subtour(c).clone()));
    }

    let root = *input.clusters.keys().next().expect("checked non-empty");
    let rooted = change_root(input.tour, root)?;
    let parent = parents(&rooted);

    let mut terminals: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for &(a, b) in input.tree {
        let (x, y) = lookup(g, a, b)?;
        terminals.entry(a).or_default().insert(x);
        terminals.entry(b).or_default().insert(y);
    }

    // Each cluster tour starts at the terminal towards its parent.
    let mut local: BTreeMap<u32, (EulerTour, HashMap<u32, usize>)> = BTreeMap::new();
    for &c in input.clusters.keys() {
        let start = if c == root {
            *terminals[&c].iter().next().expect("root has a child")
        } else {
            lookup(g, c, parent[&c])?.0
        };
        let tour = change_root(input.subtour(c), start)?;
        let first = tour.first_positions();
        local.insert(c, (tour, first));
    }
    let pos = |c: u32, x: u32| local[&c].1.get(&x).copied().unwrap_or(0);

    let mut keyed: BTreeMap<u32, Vec<(usize, u32)>> = BTreeMap::new();
    for (&c, &p) in &parent {
        if c != p {
            let x = lookup(g, p, c)?.0;
            keyed.entry(p).or_default().push((pos(p, x), c));
        }
    }
    let children = keyed
        .into_iter()
        .map(|(p, mut list)| {
            list.sort_unstable();
            (p, list.into_iter().map(|(_, c)| c).collect())
        })
        .collect();
    let (ordered, _) = tour_from_child_order(&ClusterTree::new(root, children)?)?;
    let mapped = ordered.seq.iter().map(|&(a, b)| lookup(g, a, b)).collect::<Result<Vec<_>>>()?;

    let mut last_arrival: HashMap<u32, usize> = HashMap::new();
    for (j, &(_, y)) in mapped.iter().enumerate() {
        last_arrival.insert(y, j);
    }
    let mut inserts = Vec::new();
    for (&c, (tour, _)) in &local {
        if tour.is_empty() {
            continue;
        }
        let mut cuts: Vec<(usize, u32)> = terminals[&c].iter().map(|&x| (pos(c, x), x)).collect();
        cuts.sort_unstable();
        for (k, &(start, x)) in cuts.iter().enumerate() {
            let end = cuts.get(k + 1).map_or(tour.len(), |n| n.0);
            let f = last_arrival
                .get(&x)
                .ok_or_else(|| Error::consistency("euler_tour_join", format!("terminal {x} never reached")))?;
            inserts.push((f + 1, tour.seq[start..end].to_vec()));
        }
    }
    let seq = sequence_insert(&mapped, inserts)?;
    Ok((edges, EulerTour { seq }))
}

/// Charges the bulk steps of one join over `words` words.
pub(crate) fn charge_join(ledger: &mut RoundLedger, words: u64) -> Result<()> {
    for p in JOIN_STEPS {
        ledger.charge_in("euler_join", p, words, 2)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance() -> (BTreeMap<u32, Vec<u32>>, Vec<(u32, u32)>, EdgeMap, BTreeMap<u32, Vec<(u32, u32)>>, BTreeMap<u32, EulerTour>) {
        // Clusters 1..4 are singletons {i}; cluster 5 holds 51..55.
        let clusters: BTreeMap<u32, Vec<u32>> =
            [(1, vec![1]), (2, vec![2]), (3, vec![3]), (4, vec![4]), (5, vec![51, 52, 53, 54, 55])].into();
        let tree = vec![(5, 1), (5, 4), (5, 2), (5, 3)];
        let g: EdgeMap = [((5, 1), (51, 1)), ((5, 2), (52, 2)), ((5, 3), (53, 3)), ((5, 4), (54, 4))].into();
        let subtrees = [(5, vec![(55, 52), (55, 53), (55, 54), (52, 51)])].into();
        let a5 = EulerTour::new(vec![(51, 52), (52, 55), (55, 53), (53, 55), (55, 54), (54, 55), (55, 52), (52, 51)]);
        (clusters, tree, g, subtrees, [(5, a5)].into())
    }

    #[test]
    fn five_cluster_instance_joins_cleanly() {
        let (clusters, tree, g, subtrees, subtours) = instance();
        let star = EulerTour::new(vec![(5, 1), (1, 5), (5, 4), (4, 5), (5, 2), (2, 5), (5, 3), (3, 5)]);
        let input = JoinInput { clusters: &clusters, tree: &tree, tour: &star, edge_map: &g, subtrees: &subtrees, subtours: &subtours };
        let (edges, tour) = euler_tour_join(&input).unwrap();
        assert_eq!(edges.len(), 8);
        validate_tour(&tour, &edges).unwrap();
    }

    #[test]
    fn singleton_clusters_map_through_edge_map() {
        let clusters: BTreeMap<u32, Vec<u32>> = [(0, vec![10]), (1, vec![11]), (2, vec![12])].into();
        let tree = vec![(0, 1), (1, 2)];
        let g: EdgeMap = [((0, 1), (10, 11)), ((2, 1), (12, 11))].into();
        let tour = EulerTour::new(vec![(0, 1), (1, 2), (2, 1), (1, 0)]);
        let empty = BTreeMap::new();
        let empty_tours = BTreeMap::new();
        let input = JoinInput { clusters: &clusters, tree: &tree, tour: &tour, edge_map: &g, subtrees: &empty, subtours: &empty_tours };
        let (_, joined) = euler_tour_join(&input).unwrap();
        assert_eq!(joined.seq, vec![(10, 11), (11, 12), (12, 11), (11, 10)]);
    }

    #[test]
    fn missing_edge_map_entry_is_rejected() {
        let (clusters, tree, mut g, subtrees, subtours) = instance();
        g.remove(&(5, 3));
        let star = EulerTour::new(vec![(5, 1), (1, 5), (5, 4), (4, 5), (5, 2), (2, 5), (5, 3), (3, 5)]);
        let input = JoinInput { clusters: &clusters, tree: &tree, tour: &star, edge_map: &g, subtrees: &subtrees, subtours: &subtours };
        assert!(matches!(euler_tour_join(&input), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn broken_subtour_is_rejected() {
        let (clusters, tree, g, subtrees, mut subtours) = instance();
        subtours.get_mut(&5).unwrap().seq.swap(0, 1);
        let star = EulerTour::new(vec![(5, 1), (1, 5), (5, 4), (4, 5), (5, 2), (2, 5), (5, 3), (3, 5)]);
        let input = JoinInput { clusters: &clusters, tree: &tree, tour: &star, edge_map: &g, subtrees: &subtrees, subtours: &subtours };
        assert!(euler_tour_join(&input).is_err());
    }
}
