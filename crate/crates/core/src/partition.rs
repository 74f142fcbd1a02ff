//! Partitions of the id set `0..n` represented by leader arrays.

use std::collections::BTreeMap;

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};

/// `leader[x]` is the leader of the component containing `x`; leaders are fixed points.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    leader: Vec<u32>,
}

impl Partition {
    pub fn singletons(n: usize) -> Self {
        Partition { leader: (0..n as u32).collect() }
    }

    pub fn one_block(n: usize) -> Self {
        Partition { leader: vec![0; n] }
    }

    /// Takes a leader array; rejects it unless every leader is a fixed point.
    pub fn from_leaders(leader: Vec<u32>) -> Result<Self> {
        let n = leader.len();
        for (x, &l) in leader.iter().enumerate() {
            if l as usize >= n || leader[l as usize] != l {
                return Err(Error::invalid(format!("leader {l} of {x} is not a fixed point")));
            }
        }
        Ok(Partition { leader })
    }

    /// Groups ids by arbitrary labels; the smallest id in each group leads.
    pub fn from_labels<K: Ord>(labels: &[K]) -> Self {
        let mut first: BTreeMap<&K, u32> = BTreeMap::new();
        let leader = labels
            .iter()
            .enumerate()
            .map(|(x, k)| *first.entry(k).or_insert(x as u32))
            .collect();
        Partition { leader }
    }

    pub(crate) fn from_leaders_unchecked(leader: Vec<u32>) -> Self {
        debug_assert!(leader.iter().all(|&l| leader[l as usize] == l));
        Partition { leader }
    }

    pub fn len(&self) -> usize {
        self.leader.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leader.is_empty()
    }

    pub fn leader(&self, x: u32) -> u32 {
        self.leader[x as usize]
    }

    pub fn leaders(&self) -> &[u32] {
        &self.leader
    }

    pub fn is_leader(&self, x: u32) -> bool {
        self.leader[x as usize] == x
    }

    pub fn num_components(&self) -> usize {
        self.leader.iter().enumerate().filter(|&(x, &l)| x as u32 == l).count()
    }

    /// Components keyed by leader, members ascending.
    pub fn components(&self) -> BTreeMap<u32, Vec<u32>> {
        let mut out: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (x, &l) in self.leader.iter().enumerate() {
            out.entry(l).or_default().push(x as u32);
        }
        out
    }

    /// Same blocks, each led by its smallest member.
    pub fn canonical(&self) -> Partition {
        Partition::from_labels(&self.leader)
    }

    pub fn same_blocks(&self, other: &Partition) -> bool {
        self.len() == other.len() && self.canonical() == other.canonical()
    }
}

fn check_sizes(p: &Partition, q: &Partition) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::invalid(format!(
            "partitions over {} and {} ids",
            p.len(),
            q.len()
        )));
    }
    Ok(())
}

/// Finest common coarsening of `p` and `q`.
pub fn merge_partitions(p: &Partition, q: &Partition) -> Result<Partition> {
    check_sizes(p, q)?;
    let mut uf = UnionFind::<u32>::new(p.len());
    for x in 0..p.len() as u32 {
        uf.union(x, p.leader(x));
        uf.union(x, q.leader(x));
    }
    Ok(Partition::from_labels(&uf.into_labeling()))
}

/// True iff every block of `p` lies inside a block of `q`.
pub fn refines(p: &Partition, q: &Partition) -> Result<bool> {
    check_sizes(p, q)?;
    let mut image: Vec<Option<u32>> = vec![None; p.len()];
    for x in 0..p.len() as u32 {
        let slot = &mut image[p.leader(x) as usize];
        match *slot {
            None => *slot = Some(q.leader(x)),
            Some(l) if l != q.leader(x) => return Ok(false),
            Some(_) => {}
        }
    }
    Ok(true)
}

/// Components of `base` after also joining the endpoints of every edge.
pub fn merge_with_edges(base: &Partition, edges: &[(u32, u32)]) -> Partition {
    let mut uf = UnionFind::<u32>::new(base.len());
    for x in 0..base.len() as u32 {
        uf.union(x, base.leader(x));
    }
    for &(u, v) in edges {
        uf.union(u, v);
    }
    Partition::from_labels(&uf.into_labeling())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn blocks(labels: &[u32]) -> Partition {
        Partition::from_labels(labels)
    }

    #[test]
    fn merge_small_example() {
        // {{1,2},{3},{4}} and {{1},{2,3},{4}} on ids 0..4
        let p = blocks(&[0, 0, 1, 2]);
        let q = blocks(&[0, 1, 1, 2]);
        let m = merge_partitions(&p, &q).unwrap();
        assert_eq!(m.components().into_values().collect::<Vec<_>>(), vec![vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn refines_extremes() {
        let p = blocks(&[3, 1, 3, 0, 1]);
        assert!(refines(&Partition::singletons(5), &p).unwrap());
        assert!(refines(&p, &Partition::one_block(5)).unwrap());
        assert!(!refines(&Partition::one_block(5), &p).unwrap());
        assert!(refines(&p, &Partition::singletons(4)).is_err());
    }

    #[test]
    fn from_leaders_rejects_non_fixed_points() {
        assert!(Partition::from_leaders(vec![1, 2, 2]).is_err());
        assert!(Partition::from_leaders(vec![0, 0, 2]).is_ok());
    }

    fn arb_partition(n: usize) -> impl Strategy<Value = Partition> {
        prop::collection::vec(0u32..(n as u32 / 2 + 1), n).prop_map(|l| Partition::from_labels(&l))
    }

    /// Pairwise-scan definition of refinement.
    fn refines_by_scan(p: &Partition, q: &Partition) -> bool {
        let n = p.len() as u32;
        (0..n).all(|x| (0..n).all(|y| p.leader(x) != p.leader(y) || q.leader(x) == q.leader(y)))
    }

    proptest! {
        #[test]
        fn merge_is_idempotent(p in arb_partition(12)) {
            prop_assert!(merge_partitions(&p, &p).unwrap().same_blocks(&p));
        }

        #[test]
        fn merge_matches_union_find_and_is_coarser(p in arb_partition(15), q in arb_partition(15)) {
            let m = merge_partitions(&p, &q).unwrap();
            prop_assert!(refines(&p, &m).unwrap());
            prop_assert!(refines(&q, &m).unwrap());
            // Union-find over both spanning forests, independently.
            let mut uf = UnionFind::<usize>::new(15);
            for x in 0..15u32 {
                uf.union(x as usize, p.leader(x) as usize);
                uf.union(x as usize, q.leader(x) as usize);
            }
            for x in 0..15u32 {
                for y in 0..15u32 {
                    prop_assert_eq!(m.leader(x) == m.leader(y), uf.equiv(x as usize, y as usize));
                }
            }
            // Counts: each coarsening step only lowers the block count.
            prop_assert!(m.num_components() <= p.num_components().min(q.num_components()));
        }

        #[test]
        fn refines_agrees_with_scan(p in arb_partition(10), q in arb_partition(10)) {
            prop_assert_eq!(refines(&p, &q).unwrap(), refines_by_scan(&p, &q));
            let m = merge_partitions(&p, &q).unwrap();
            prop_assert!(refines_by_scan(&p, &m));
        }

        #[test]
        fn canonical_leads_with_smallest(p in arb_partition(20)) {
            let c = p.canonical();
            for (l, members) in c.components() {
                prop_assert_eq!(l, members[0]);
            }
            prop_assert!(c.same_blocks(&p));
        }
    }
}
