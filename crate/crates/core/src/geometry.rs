//! Point sets, projection, aspect-ratio normalization and the randomly
//! shifted quadtree grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::AlgorithmConfig;
use crate::error::{Error, Result};

/// RNG stream ids, so the shift, projection and generators never share draws.
pub(crate) const STREAM_SHIFT: u64 = 1;
pub(crate) const STREAM_JL: u64 = 2;

pub(crate) fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Points with dense ids `0..n`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    coords: Vec<f64>,
    n: usize,
    d: usize,
    /// Coordinate upper bound, set once the set is normalized.
    pub delta: Option<f64>,
}

impl PointSet {
    pub fn new(coords: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if coords.len() % d != 0 {
            return Err(Error::invalid(format!(
                "{} coordinates do not split into rows of {d}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate {bad}")));
        }
        Ok(PointSet {
            n: coords.len() / d,
            coords,
            d,
            delta: None,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(1);
        let mut coords = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            if r.as_ref().len() != d {
                return Err(Error::invalid(format!("row {i} has dimension {}, expected {d}", r.as_ref().len())));
            }
            coords.extend_from_slice(r.as_ref());
        }
        PointSet::new(coords, d)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        dist(self.point(i), self.point(j))
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Random offsets `a_i in [0, delta)` shared by every grid level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftVector {
    pub a: Vec<f64>,
    pub seed: u64,
}

impl ShiftVector {
    pub fn random(d: usize, delta: f64, seed: u64) -> Self {
        let mut rng = seeded_rng(seed, STREAM_SHIFT);
        let a = (0..d).map(|_| rng.gen_range(0.0..delta)).collect();
        ShiftVector { a, seed }
    }

    pub fn zero(d: usize) -> Self {
        ShiftVector { a: vec![0.0; d], seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridCellId {
    /// Level as raw `f64` bits so the id can be hashed.
    level_bits: u64,
    pub coords: Vec<i64>,
}

impl GridCellId {
    pub fn level(&self) -> f64 {
        f64::from_bits(self.level_bits)
    }
}

pub fn cell_of(point: &[f64], level: f64, shift: &ShiftVector) -> GridCellId {
    debug_assert!(level > 0.0);
    GridCellId {
        level_bits: level.to_bits(),
        coords: cell_coords(point, level, shift),
    }
}

pub(crate) fn cell_coords(point: &[f64], level: f64, shift: &ShiftVector) -> Vec<i64> {
    point
        .iter()
        .zip(&shift.a)
        .map(|(x, a)| ((x + a) / level).floor() as i64)
        .collect()
}

/// Seeded Gaussian projection to `target_dim` coordinates, scaled by `1/sqrt(target_dim)`.
pub fn jl_project(points: &PointSet, target_dim: usize, seed: u64) -> Result<PointSet> {
    if target_dim == 0 {
        return Err(Error::invalid("target dimension must be at least 1"));
    }
    if points.is_empty() {
        return Err(Error::invalid("cannot project an empty point set"));
    }
    let d = points.dim();
    let mut rng = seeded_rng(seed, STREAM_JL);
    let scale = 1.0 / (target_dim as f64).sqrt();
    let matrix: Vec<f64> = (0..target_dim * d)
        .map(|_| rng.sample::<f64, _>(StandardNormal) * scale)
        .collect();
    let mut out = Vec::with_capacity(points.len() * target_dim);
    for p in points.rows() {
        for row in matrix.chunks_exact(d) {
            out.push(row.iter().zip(p).map(|(m, x)| m * x).sum());
        }
    }
    PointSet::new(out, target_dim)
}

/// How normalized coordinates map back to the input's units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleRecord {
    pub offset: Vec<f64>,
    /// Normalized length = input length * factor.
    pub factor: f64,
    pub delta: f64,
    pub snap: f64,
}

impl ScaleRecord {
    pub fn to_original(&self, normalized_length: f64) -> f64 {
        normalized_length / self.factor
    }
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub points: PointSet,
    pub scale: ScaleRecord,
    /// All input points coincide; the caller emits a zero-cost star.
    pub degenerate: bool,
}

/// Smallest power of 2 that is at least `4 n^2 / log2 n`.
pub fn delta_for(n: usize) -> f64 {
    let n = n.max(2) as f64;
    let target = 4.0 * n * n / n.log2();
    2f64.powi(target.log2().ceil() as i32)
}

/// Shifts the minimum to 0, scales the widest coordinate to `delta_for(n)` and
/// snaps every coordinate to a multiple of `config.snap_level` (ties go down).
/// Distinct snapped points are therefore at least `snap_level` apart.
pub fn normalize_aspect(points: &PointSet, config: &AlgorithmConfig) -> Result<Normalized> {
    if points.is_empty() {
        return Err(Error::invalid("cannot normalize an empty point set"));
    }
    let d = points.dim();
    let n = points.len();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in points.rows() {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let extent = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
    let delta = delta_for(n);
    let snap = config.snap_level;
    if extent == 0.0 {
        let mut out = PointSet::new(vec![0.0; n * d], d)?;
        out.delta = Some(delta);
        return Ok(Normalized {
            points: out,
            scale: ScaleRecord { offset: lo, factor: 1.0, delta, snap },
            degenerate: true,
        });
    }
    let factor = delta / extent;
    let coords = points
        .rows()
        .flat_map(|p| {
            let lo = &lo;
            p.iter().enumerate().map(move |(k, x)| {
                let scaled = (x - lo[k]) * factor;
                (snap * (scaled / snap - 0.5).ceil()).clamp(0.0, delta)
            })
        })
        .collect();
    let mut out = PointSet::new(coords, d)?;
    out.delta = Some(delta);
    Ok(Normalized {
        points: out,
        scale: ScaleRecord { offset: lo, factor, delta, snap },
        degenerate: false,
    })
}
