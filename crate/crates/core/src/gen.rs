//! Synthetic point sets.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{seeded_rng, PointSet};

const STREAM_GEN: u64 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Uniform,
    GaussianClusters,
    ParallelPaths,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::Uniform, Generator::GaussianClusters, Generator::ParallelPaths];

    pub fn name(self) -> &'static str {
        match self {
            Generator::Uniform => "uniform",
            Generator::GaussianClusters => "gaussian-clusters",
            Generator::ParallelPaths => "parallel-paths",
        }
    }
}

impl std::fmt::Display for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Generator::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown generator `{s}`")))
    }
}

/// Gap between parallel copies when none is given.
pub const DEFAULT_PATH_SPACING: f64 = 16.0;

/// Points `e_1, 2 e_1, .., len e_1` plus `k` copies shifted by
/// `spacing / sqrt(2)` along `e_1 .. e_k`.
pub fn parallel_paths(k: usize, len: usize, d: usize, spacing: f64) -> Result<PointSet> {
    if d == 0 || len == 0 {
        return Err(Error::invalid("parallel paths need d >= 1 and len >= 1"));
    }
    if k > d {
        return Err(Error::invalid(format!("{k} shifted copies need at least {k} dimensions, got {d}")));
    }
    let offset = spacing / std::f64::consts::SQRT_2;
    let mut coords = Vec::with_capacity((k + 1) * len * d);
    for j in 0..=k {
        for i in 1..=len {
            let mut p = vec![0.0; d];
            p[0] = i as f64;
            if j > 0 {
                p[j - 1] += offset;
            }
            coords.extend(p);
        }
    }
    PointSet::new(coords, d)
}

/// `n` points of the given kind in `d` dimensions.
///
/// Parallel paths use `min(d, 3)` shifted copies and the shortest paths that
/// reach `n` points, truncated to exactly `n`.
pub fn generate(kind: Generator, n: usize, d: usize, seed: u64) -> Result<PointSet> {
    if n == 0 || d == 0 {
        return Err(Error::invalid("n and d must be at least 1"));
    }
    let mut rng = seeded_rng(seed, STREAM_GEN);
    let coords: Vec<f64> = match kind {
        Generator::Uniform => (0..n * d).map(|_| rng.gen::<f64>()).collect(),
        Generator::GaussianClusters => {
            let clusters = ((n as f64).sqrt() / 2.0).ceil().clamp(2.0, 12.0) as usize;
            let centers: Vec<f64> = (0..clusters * d).map(|_| rng.gen::<f64>()).collect();
            let noise = Normal::new(0.0, 0.02).expect("valid deviation");
            let mut out = Vec::with_capacity(n * d);
            for _ in 0..n {
                let c = rng.gen_range(0..clusters);
                out.extend((0..d).map(|j| centers[c * d + j] + noise.sample(&mut rng)));
            }
            out
        }
        Generator::ParallelPaths => {
            let k = d.min(3);
            let len = n.div_ceil(k + 1);
            let all = parallel_paths(k, len, d, DEFAULT_PATH_SPACING)?;
            all.coords()[..n * d].to_vec()
        }
    };
    PointSet::new(coords, d)
}
