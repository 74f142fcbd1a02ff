//! Randomized leader compression with early termination.

use crate::partition::Partition;
use crate::spanner::EdgeSet;

/// Which bit a leader draws in one round.
pub trait CoinSource {
    fn coin(&self, leader: u32) -> bool;
}

impl<F: Fn(u32) -> bool> CoinSource for F {
    fn coin(&self, leader: u32) -> bool {
        self(leader)
    }
}

/// Counter-based coins: the bit depends only on the key and the leader id,
/// so evaluation order cannot change it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyedCoins {
    pub seed: u64,
    pub level: u32,
    pub stage: u32,
    pub round: u32,
}

impl CoinSource for KeyedCoins {
    fn coin(&self, leader: u32) -> bool {
        let key = [self.level as u64, self.stage as u64, self.round as u64, leader as u64];
        let h = key.iter().fold(mix(self.seed), |acc, &k| mix(acc ^ k));
        h >> 63 == 1
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompressionOutcome {
    pub partition: Partition,
    /// `(x, y)` per absorbed component: `x` in the absorbing component, `y` in the absorbed one.
    pub merge_edges: Vec<(u32, u32)>,
    pub rounds_used: u32,
}

/// One round: bit-1 components absorb neighbouring bit-0 components.
///
/// A bit-0 vertex keeps the notifier with the smallest (sender id, edge index);
/// a bit-0 leader keeps the selection of its smallest-id member.
pub fn leader_compression_round(
    p: &Partition,
    graph: &EdgeSet,
    collect_edges: bool,
    coins: &impl CoinSource,
) -> CompressionOutcome {
    let n = p.len();
    let mut bit = vec![false; n];
    for x in 0..n {
        let l = p.leader(x as u32);
        if l as usize == x {
            bit[x] = coins.coin(l);
        }
    }
    for x in 0..n {
        bit[x] = bit[p.leader(x as u32) as usize];
    }
    // Best notifier per bit-0 vertex; edge index breaks ties (never needed with deduped edges).
    let mut notified: Vec<Option<(u32, usize)>> = vec![None; n];
    for (i, (u, v)) in graph.iter().enumerate() {
        for (x, y) in [(u, v), (v, u)] {
            if bit[x as usize] && !bit[y as usize] {
                let slot = &mut notified[y as usize];
                if slot.map_or(true, |best| (x, i) < best) {
                    *slot = Some((x, i));
                }
            }
        }
    }
    // Ascending scan means the first hit per leader is its smallest descendant.
    let mut choice: Vec<Option<(u32, u32)>> = vec![None; n];
    for y in 0..n {
        if let Some((x, _)) = notified[y] {
            let z = p.leader(y as u32) as usize;
            if choice[z].is_none() {
                choice[z] = Some((x, y as u32));
            }
        }
    }
    let leader: Vec<u32> = (0..n)
        .map(|x| {
            let z = p.leader(x as u32);
            match choice[z as usize] {
                Some((sender, _)) => p.leader(sender),
                None => z,
            }
        })
        .collect();
    let merge_edges = if collect_edges {
        choice.iter().flatten().copied().collect()
    } else {
        Vec::new()
    };
    CompressionOutcome {
        partition: Partition::from_leaders_unchecked(leader),
        merge_edges,
        rounds_used: 1,
    }
}

/// Runs `h` rounds; returns the final partition and each round's merge edges.
pub fn compress(
    start: &Partition,
    graph: &EdgeSet,
    h: u32,
    collect_edges: bool,
    coins: impl Fn(u32) -> KeyedCoins,
) -> (Partition, Vec<Vec<(u32, u32)>>) {
    let mut p = start.clone();
    let mut per_round = Vec::with_capacity(h as usize);
    for round in 0..h {
        let out = leader_compression_round(&p, graph, collect_edges, &coins(round));
        p = out.partition;
        per_round.push(out.merge_edges);
    }
    (p, per_round)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{merge_with_edges, refines};
    use proptest::prelude::*;

    fn keyed(seed: u64, round: u32) -> KeyedCoins {
        KeyedCoins { seed, level: 0, stage: 0, round }
    }

    #[test]
    fn forced_coins_merge_pair() {
        let p = Partition::singletons(2);
        let g = EdgeSet::new([(0, 1)]).unwrap();
        let out = leader_compression_round(&p, &g, true, &|l: u32| l == 0);
        assert_eq!(out.partition.num_components(), 1);
        assert_eq!(out.merge_edges, vec![(0, 1)]);
        assert_eq!(out.partition.leader(1), 0);
    }

    #[test]
    fn empty_graph_changes_nothing() {
        let p = Partition::from_labels(&[0, 0, 1, 2]);
        let out = leader_compression_round(&p, &EdgeSet::default(), true, &keyed(1, 0));
        assert_eq!(out.partition, p);
        assert!(out.merge_edges.is_empty());
    }

    #[test]
    fn tie_breaks_are_smallest_sender_and_descendant() {
        // Component {2,3} led by 2 with bit 0; 0 and 1 are bit-1 singletons.
        let p = Partition::from_labels(&[0, 1, 2, 2]);
        let g = EdgeSet::new([(1, 2), (0, 3), (1, 3)]).unwrap();
        let out = leader_compression_round(&p, &g, true, &|l: u32| l != 2);
        // Vertex 2 hears from 1, vertex 3 from 0 (smaller); leader 2 keeps vertex 2's pick.
        assert_eq!(out.merge_edges, vec![(1, 2)]);
        assert_eq!(out.partition.leader(3), 1);
    }

    #[test]
    fn keyed_coins_are_balanced_and_stable() {
        let c = keyed(42, 3);
        let ones = (0..10_000u32).filter(|&l| c.coin(l)).count();
        assert!((4_700..5_300).contains(&ones), "{ones}");
        assert_eq!(c.coin(17), keyed(42, 3).coin(17));
    }

    fn arb_graph(n: u32) -> impl Strategy<Value = EdgeSet> {
        prop::collection::vec((0..n, 0..n), 0..(2 * n as usize))
            .prop_map(|v| EdgeSet::new(v.into_iter().filter(|(a, b)| a != b)).unwrap())
    }

    proptest! {
        #[test]
        fn round_stays_between_bounds(
            labels in prop::collection::vec(0u32..10, 20),
            g in arb_graph(20),
            seed in any::<u64>(),
        ) {
            let p = Partition::from_labels(&labels);
            let out = leader_compression_round(&p, &g, true, &keyed(seed, 0));
            let q = out.partition;
            prop_assert!(Partition::from_leaders(q.leaders().to_vec()).is_ok());
            prop_assert!(refines(&p, &q).unwrap());
            prop_assert!(refines(&q, &merge_with_edges(&p, g.as_slice())).unwrap());
            // Merge edges exactly account for the drop and join distinct old components.
            prop_assert_eq!(p.num_components() - q.num_components(), out.merge_edges.len());
            prop_assert!(merge_with_edges(&p, &out.merge_edges).same_blocks(&q));
            for &(x, y) in &out.merge_edges {
                prop_assert!(g.contains(x, y));
                prop_assert_ne!(p.leader(x), p.leader(y));
            }
        }
    }
}
