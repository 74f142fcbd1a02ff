//! Hamiltonian cycles from tree tours by shortcutting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::EulerTour;
use crate::geometry::PointSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianCycle {
    pub order: Vec<u32>,
    /// Sum of consecutive distances including the closing edge, in input units.
    pub cost: f64,
}

impl HamiltonianCycle {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Cost of visiting `order` cyclically.
pub fn cycle_cost(order: &[u32], points: &PointSet) -> f64 {
    match order.len() {
        0 | 1 => 0.0,
        m => (0..m).map(|i| points.dist(order[i] as usize, order[(i + 1) % m] as usize)).sum(),
    }
}

/// Keeps the first appearance of each point along the tour, root first.
pub fn shortcut(tour: &EulerTour, points: &PointSet) -> Result<HamiltonianCycle> {
    let n = points.len();
    if n == 0 {
        return Err(Error::invalid("no points"));
    }
    if tour.is_empty() {
        if n > 1 {
            return Err(Error::invalid(format!("empty tour for {n} points")));
        }
        return Ok(HamiltonianCycle { order: vec![0], cost: 0.0 });
    }
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for &(u, _) in &tour.seq {
        let slot = seen
            .get_mut(u as usize)
            .ok_or_else(|| Error::invalid(format!("tour visits unknown point {u}")))?;
        if !*slot {
            *slot = true;
            order.push(u);
        }
    }
    if order.len() != n {
        return Err(Error::invalid(format!("tour covers {} of {n} points", order.len())));
    }
    let cost = cycle_cost(&order, points);
    Ok(HamiltonianCycle { order, cost })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::dfs_euler_tour;
    use crate::oracle::exact_mst;
    use proptest::prelude::*;

    #[test]
    fn two_points_double_the_edge() {
        let pts = PointSet::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        let c = shortcut(&dfs_euler_tour(&[(0, 1)], 0).unwrap(), &pts).unwrap();
        assert_eq!(c.order, vec![0, 1]);
        assert_eq!(c.cost, 10.0);
    }

    #[test]
    fn star_keeps_first_appearances() {
        let pts = PointSet::from_rows(&[[0.0], [1.0], [-1.0]]).unwrap();
        let tour = dfs_euler_tour(&[(0, 1), (0, 2)], 0).unwrap();
        assert_eq!(shortcut(&tour, &pts).unwrap().order, vec![0, 1, 2]);
    }

    #[test]
    fn single_point_and_partial_cover() {
        let one = PointSet::from_rows(&[[2.0]]).unwrap();
        assert_eq!(shortcut(&EulerTour::default(), &one).unwrap().cost, 0.0);
        let three = PointSet::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        assert!(shortcut(&dfs_euler_tour(&[(0, 1)], 0).unwrap(), &three).is_err());
    }

    proptest! {
        #[test]
        fn cycle_sandwiched_by_tree(rows in prop::collection::vec(prop::array::uniform2(-50.0f64..50.0), 2..40)) {
            let pts = PointSet::from_rows(&rows).unwrap();
            let (tree, weight) = exact_mst(&pts).unwrap();
            let cycle = shortcut(&dfs_euler_tour(&tree, 0).unwrap(), &pts).unwrap();
            prop_assert!(cycle.cost <= 2.0 * weight * (1.0 + 1e-12) + 1e-9);
            prop_assert!(weight <= cycle.cost * (1.0 + 1e-12) + 1e-9);
        }
    }
}
