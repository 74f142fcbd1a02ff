//! Level bookkeeping: which powers of 2 exist, which are checkpoints, and
//! which grid cell confines each level.
//!
//! Levels are identified by their exponent `e`, with `t = 2^e`.

use serde::{Deserialize, Serialize};

use crate::config::AlgorithmConfig;
use crate::geometry::delta_for;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelPlan {
    /// `log2 alpha`.
    pub alpha_log2: u32,
    /// `log2 log2 alpha`; the number of intermediate waves.
    pub waves: u32,
    /// Index of the top checkpoint: `t_max = alpha^top_checkpoint`.
    pub top_checkpoint: u32,
    pub beta: f64,
    pub delta: f64,
}

impl LevelPlan {
    /// Plan for `n` points in dimension `d` (the working dimension).
    ///
    /// The top checkpoint is the first power of alpha reaching `delta * sqrt(d)`,
    /// so every pair lies within the top level and its spanner is connected.
    pub fn new(config: &AlgorithmConfig, n: usize, d: usize) -> Self {
        let delta = delta_for(n);
        let alpha_log2 = config.alpha_log2();
        let reach = (delta * (d as f64).sqrt()).log2();
        let top_checkpoint = (reach / alpha_log2 as f64).ceil().max(1.0) as u32;
        LevelPlan {
            alpha_log2,
            waves: config.g(),
            top_checkpoint,
            beta: config.beta,
            delta,
        }
    }

    pub fn top_exp(&self) -> u32 {
        self.top_checkpoint * self.alpha_log2
    }

    pub fn exponents(&self) -> std::ops::RangeInclusive<u32> {
        0..=self.top_exp()
    }

    pub fn num_levels(&self) -> usize {
        self.top_exp() as usize + 1
    }

    pub fn is_checkpoint(&self, e: u32) -> bool {
        e % self.alpha_log2 == 0
    }

    /// `k` with `alpha^(k-1) < t <= alpha^k`.
    pub fn checkpoint_above(&self, e: u32) -> u32 {
        e.div_ceil(self.alpha_log2)
    }

    /// Side of the cells that confine level `e`, or `None` when the whole set is one cell.
    pub fn big_cell_level(&self, e: u32) -> Option<f64> {
        let k = self.checkpoint_above(e);
        if k >= self.top_checkpoint {
            None
        } else {
            Some(2f64.powi(((k + 1) * self.alpha_log2) as i32) / self.beta)
        }
    }

    /// Side of the cells that seed a checkpoint's initial partition: `t / beta`.
    pub fn seed_cell_level(&self, e: u32) -> f64 {
        2f64.powi(e as i32) / self.beta
    }

    /// `log2 kappa` for an intermediate level: `2^v2(e)`.
    pub fn kappa_exp(&self, e: u32) -> u32 {
        debug_assert!(!self.is_checkpoint(e));
        1 << e.trailing_zeros()
    }

    /// Intermediate levels grouped into waves of decreasing 2-adic valuation.
    pub fn part2_waves(&self) -> Vec<Vec<u32>> {
        (0..self.waves)
            .rev()
            .map(|v| {
                self.exponents()
                    .filter(|&e| !self.is_checkpoint(e) && e.trailing_zeros() == v)
                    .collect()
            })
            .collect()
    }
}

pub fn level_t(e: u32) -> f64 {
    2f64.powi(e as i32)
}
