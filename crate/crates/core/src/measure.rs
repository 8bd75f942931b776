//! Areas, Monte Carlo volumes and the Mahler-type volume bound.
//!
//! Monte Carlo estimates are split into shards with independent ChaCha8
//! streams, so a run is reproducible whatever the number of worker threads:
//! shards can be evaluated in any order and [`merge_shards`] sums them in
//! shard order.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::hypersurface::{ray_solve, signed_area, PlanarCurve};
use crate::linalg::Vector;
use crate::rng;
use crate::symplectic::omega;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    Shoelace,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub method: VolumeMethod,
}

/// Area enclosed by a closed counterclockwise polyline.
pub fn shoelace_area(curve: &PlanarCurve) -> Result<VolumeEstimate> {
    if curve.len() < 3 {
        return Err(Error::invalid("polygon needs at least three vertices"));
    }
    let area = signed_area(curve);
    if area <= 0.0 {
        return Err(Error::invalid("polygon must be counterclockwise with positive area"));
    }
    Ok(VolumeEstimate {
        value: area,
        stderr: 0.0,
        n_samples: curve.len(),
        method: VolumeMethod::Shoelace,
    })
}

/// `ω(z_2 - z_1, z_4 - z_1)` of a parallelogram `z_1 z_2 z_3 z_4`, together
/// with the closing defect `|z_1 + z_3 - z_2 - z_4|`.
pub fn symplectic_parallelogram_area(z: &[Vector; 4]) -> Result<(f64, f64)> {
    let area = omega(&(&z[1] - &z[0]), &(&z[3] - &z[0]))?;
    let closing = (&z[0] + &z[2] - &z[1] - &z[3]).norm();
    Ok((area, closing))
}

/// Sampling box `[-r_i, r_i]` per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub half_widths: Vec<f64>,
}

impl BoundingBox {
    pub fn volume(&self) -> f64 {
        self.half_widths.iter().map(|r| 2.0 * r).product()
    }

    pub fn contains(&self, x: &Vector) -> bool {
        x.iter().zip(&self.half_widths).all(|(c, r)| c.abs() <= *r)
    }
}

/// Boundary samples used to validate a bounding box.
pub const BOX_VALIDATION_SAMPLES: usize = 2000;

/// Exact box from the support function, `r_i = h_X(e_i)`, checked against
/// random boundary points.
pub fn bounding_box(body: &ConvexBody, seed: u64) -> Result<BoundingBox> {
    let dim = body.dim();
    let mut half_widths = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut e = Vector::zeros(dim);
        e[i] = 1.0;
        half_widths.push(body.support(&e)? * (1.0 + 1e-9));
    }
    let bbox = BoundingBox { half_widths };
    let mut r = rng::seeded(seed, 0x626f_7865);
    for _ in 0..BOX_VALIDATION_SAMPLES {
        let x = body.random_boundary_point(&mut r)?;
        if !bbox.contains(&x.x) {
            return Err(Error::NumericFailure {
                what: "bounding box validation",
                best_value: x.x.amax(),
                residual: 0.0,
            });
        }
    }
    Ok(bbox)
}

/// One independent piece of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shard {
    pub index: u64,
    pub n_samples: usize,
}

/// Samples per shard.
pub const SHARD_SIZE: usize = 1 << 16;

pub fn plan_shards(n_samples: usize) -> Vec<Shard> {
    let mut shards = Vec::new();
    let mut left = n_samples;
    let mut index = 0;
    while left > 0 {
        let n = left.min(SHARD_SIZE);
        shards.push(Shard { index, n_samples: n });
        left -= n;
        index += 1;
    }
    shards
}

/// Number of uniform box points with `inside(p)`, drawn from the shard's own stream.
pub fn count_shard<F>(bbox: &BoundingBox, shard: Shard, seed: u64, inside: F) -> usize
where
    F: Fn(&Vector) -> bool,
{
    let mut r = rng::seeded(seed, 0x6d63_0000 + shard.index);
    let dim = bbox.half_widths.len();
    let mut hits = 0;
    let mut p = Vector::zeros(dim);
    for _ in 0..shard.n_samples {
        for (c, w) in p.iter_mut().zip(&bbox.half_widths) {
            *c = r.gen_range(-*w..*w);
        }
        if inside(&p) {
            hits += 1;
        }
    }
    hits
}

/// Hit-fraction estimate with the binomial standard error.
pub fn merge_shards(bbox: &BoundingBox, counts: &[(Shard, usize)]) -> VolumeEstimate {
    let n: usize = counts.iter().map(|(s, _)| s.n_samples).sum();
    let hits: usize = counts.iter().map(|(_, h)| *h).sum();
    let p = hits as f64 / n as f64;
    let vol = bbox.volume();
    VolumeEstimate {
        value: vol * p,
        stderr: vol * libm::sqrt(p * (1.0 - p) / n as f64),
        n_samples: n,
        method: VolumeMethod::MonteCarlo,
    }
}

fn check_samples(n_samples: usize) -> Result<()> {
    if n_samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    Ok(())
}

/// Single-threaded Monte Carlo volume; the std crate runs the same shards in parallel.
pub fn mc_volume(body: &ConvexBody, n_samples: usize, seed: u64) -> Result<VolumeEstimate> {
    check_samples(n_samples)?;
    let bbox = bounding_box(body, seed)?;
    let g = body.gauge_fn();
    let counts: Vec<(Shard, usize)> = plan_shards(n_samples)
        .into_iter()
        .map(|s| (s, count_shard(&bbox, s, seed, |p| g.value(p) <= 1.0)))
        .collect();
    Ok(merge_shards(&bbox, &counts))
}

/// `2^n / n!` for a body in `R^{2n}`.
pub fn mahler_bound(dim: usize) -> f64 {
    let n = dim / 2;
    (1..=n).fold(1.0, |acc, k| acc * 2.0 / k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MahlerReport {
    pub volume: VolumeEstimate,
    pub bound: f64,
    /// `(value - bound) / stderr`; infinite for an exact volume.
    pub margin: f64,
    /// Set when the estimate falls below the bound.
    pub flagged: bool,
}

pub fn mahler_diagnostic(body: &ConvexBody, volume: VolumeEstimate) -> MahlerReport {
    let bound = mahler_bound(body.dim());
    let gap = volume.value - bound;
    let margin = if volume.stderr > 0.0 {
        gap / volume.stderr
    } else if gap >= 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    };
    MahlerReport {
        volume,
        bound,
        margin,
        flagged: margin < 0.0,
    }
}

/// Experimental `vol(Y-region) / vol(X)` with both volumes estimated from the
/// same box samples. Each sample costs one ray solve, so keep `n_samples` small.
pub fn y_volume_ratio(body: &ConvexBody, n_samples: usize, seed: u64) -> Result<VolumeEstimate> {
    check_samples(n_samples)?;
    let bbox = bounding_box(body, seed)?;
    // f(x) lies on ∂X for self-polar X, so Y fits in twice the box
    let outer = BoundingBox {
        half_widths: bbox.half_widths.iter().map(|r| 2.0 * r).collect(),
    };
    let mut r = rng::seeded(seed, 0x7972_6174);
    let dim = body.dim();
    let (mut in_x, mut in_y) = (0usize, 0usize);
    for _ in 0..n_samples {
        let p = Vector::from_iterator(dim, outer.half_widths.iter().map(|w| r.gen_range(-*w..*w)));
        if p.norm() == 0.0 {
            continue;
        }
        if body.gauge(&p)? <= 1.0 {
            in_x += 1;
        }
        if p.norm() <= ray_solve(body, &p)?.radius {
            in_y += 1;
        }
    }
    if in_x == 0 {
        return Err(Error::NumericFailure {
            what: "volume ratio",
            best_value: 0.0,
            residual: 0.0,
        });
    }
    let ratio = in_y as f64 / in_x as f64;
    // delta method on the ratio of two binomial counts from shared samples
    let n = n_samples as f64;
    let (px, py) = (in_x as f64 / n, in_y as f64 / n);
    let var = (py * (1.0 - py) + ratio * ratio * px * (1.0 - px) - 2.0 * ratio * px * (1.0 - py)) / (n * px * px);
    Ok(VolumeEstimate {
        value: ratio,
        stderr: libm::sqrt(var.max(0.0)),
        n_samples,
        method: VolumeMethod::MonteCarlo,
    })
}
