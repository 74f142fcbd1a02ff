//! Algorithm parameters and the theory-inequality report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which 2-hop spanner builder a level uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpannerStrategy {
    ExactThreshold,
    CellLeader,
    SampledLeader,
}

impl SpannerStrategy {
    pub const ALL: [SpannerStrategy; 3] = [
        SpannerStrategy::ExactThreshold,
        SpannerStrategy::CellLeader,
        SpannerStrategy::SampledLeader,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpannerStrategy::ExactThreshold => "exact-threshold",
            SpannerStrategy::CellLeader => "cell-leader",
            SpannerStrategy::SampledLeader => "sampled-leader",
        }
    }

    /// Maximum edge length at level `t`, as a multiple of `t`.
    pub fn stretch_bound(self) -> f64 {
        match self {
            SpannerStrategy::ExactThreshold => 1.0,
            SpannerStrategy::CellLeader | SpannerStrategy::SampledLeader => 2.0,
        }
    }
}

impl std::str::FromStr for SpannerStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SpannerStrategy::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown spanner strategy `{s}`")))
    }
}

impl std::fmt::Display for SpannerStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    /// Checkpoint ratio; must be `2^(2^g)`.
    pub alpha: u64,
    /// Ratio between a level and the side of its grouping cells; must exceed `sqrt(d)`.
    pub beta: f64,
    /// Leader-compression rounds per stage.
    pub h: u32,
    /// Spanner density knob in (0, 1).
    pub epsilon: f64,
    pub seed: u64,
    pub strategy: SpannerStrategy,
    pub strict_memory: bool,
    /// Words per machine; only read in strict mode.
    pub machine_memory_s: u64,
    /// Side of the snapping grid after scaling; a power of 2 of at least 4.
    pub snap_level: f64,
    /// Project to this many dimensions first when it is below `d`.
    pub jl_dim: Option<usize>,
}

impl AlgorithmConfig {
    /// Defaults for dimension `d`.
    pub fn for_dim(d: usize) -> Self {
        AlgorithmConfig {
            alpha: 16,
            beta: default_beta(d),
            h: 6,
            epsilon: 0.5,
            seed: 0,
            strategy: SpannerStrategy::CellLeader,
            strict_memory: false,
            machine_memory_s: 1 << 16,
            snap_level: 4.0,
            jl_dim: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_strategy(mut self, strategy: SpannerStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    /// `log2 alpha`, i.e. `2^g`.
    pub fn alpha_log2(&self) -> u32 {
        self.alpha.trailing_zeros()
    }

    /// `g = log2 log2 alpha`, the number of intermediate waves.
    pub fn g(&self) -> u32 {
        self.alpha_log2().trailing_zeros()
    }

    /// Dimension the pipeline works in after the optional projection.
    pub fn working_dim(&self, d: usize) -> usize {
        match self.jl_dim {
            Some(k) if k < d => k,
            _ => d,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let a = self.alpha;
        if a < 2 || !a.is_power_of_two() || !self.alpha_log2().is_power_of_two() || a > 1 << 32 {
            return Err(Error::invalid(format!(
                "alpha must be 2^(2^g) with 0 <= g <= 5, got {a}"
            )));
        }
        let dim = self.working_dim(d);
        if !(self.beta > (dim as f64).sqrt()) {
            return Err(Error::invalid(format!(
                "beta must exceed sqrt(d) = {:.3}, got {}",
                (dim as f64).sqrt(),
                self.beta
            )));
        }
        if self.h < 1 {
            return Err(Error::invalid("h must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        let s = self.snap_level;
        if !(s >= 4.0 && s.log2().fract() == 0.0) {
            return Err(Error::invalid(format!(
                "snap level must be a power of 2 and at least 4, got {s}"
            )));
        }
        if self.strict_memory && self.machine_memory_s == 0 {
            return Err(Error::invalid("machine memory must be positive in strict mode"));
        }
        if self.jl_dim == Some(0) {
            return Err(Error::invalid("projection dimension must be at least 1"));
        }
        Ok(())
    }

    /// Reports which of the asymptotic parameter inequalities hold at this `n`.
    /// Nothing here is enforced.
    pub fn theory_check(&self, n: usize, d: usize) -> Vec<TheoryCheck> {
        let log_n = (n.max(2) as f64).log2();
        let alpha = self.alpha as f64;
        let sqrt_d = (self.working_dim(d) as f64).sqrt();
        let mut out = vec![
            TheoryCheck::new("alpha / beta >= log2 n", alpha / self.beta, log_n),
            TheoryCheck::new("beta >= log2 n", self.beta, log_n),
            TheoryCheck::new("alpha >= sqrt(d) * beta * log2 n", alpha, sqrt_d * self.beta * log_n),
            TheoryCheck::new("h >= log2 log2 n", self.h as f64, log_n.log2()),
        ];
        out.retain(|c| c.lhs.is_finite());
        out
    }
}

fn default_beta(d: usize) -> f64 {
    (2.0 * (d as f64).sqrt()).max(8.0)
}

/// One inequality `lhs >= rhs` and whether it holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryCheck {
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl TheoryCheck {
    fn new(inequality: &str, lhs: f64, rhs: f64) -> Self {
        TheoryCheck {
            inequality: inequality.to_string(),
            lhs,
            rhs,
            holds: lhs >= rhs,
        }
    }
}
