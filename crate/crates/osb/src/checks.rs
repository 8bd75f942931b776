//! Sampled invariant checks over one body, each summarized as a [`CheckReport`].
//!
//! Sample `i` of a check draws from its own random stream, so checks run in
//! parallel and still give the same report for the same seed.

use std::f64::consts::TAU;

use osb_core::billiard::{check_family, four_periodic_family};
use osb_core::bodies::self_polarity_tolerance;
use osb_core::hypersurface::{
    area_construction_2d, area_ratio_2d, boundary_curve_2d, hausdorff_2d, invariance_defect, line_two_point_check,
    planarity_defect, radial_transversality, ray_multiplicity, sample_y, star_shape_check, RadialOracle,
};
use osb_core::measure::mahler_diagnostic;
use osb_core::rng;
use osb_core::symplectic::{check_involution, positivity_scan, self_polarity_defect};
use osb_core::{ConvexBody, Error, Result, Smoothness};
use serde::{Deserialize, Serialize};

use crate::parallel::{self, par_map};

/// Stream id of sample `i` of the check numbered `check`.
fn stream(check: u64, i: usize) -> u64 {
    (check << 32) | i as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Pass iff `worst_value <= tolerance`.
    AtMost,
    /// Pass iff `worst_value > tolerance`.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub body_hash: String,
    pub n_samples: usize,
    /// Largest defect (or smallest margin for [`Bound::Above`]); `None` if the
    /// check could not be evaluated.
    pub worst_value: Option<f64>,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
    /// Reported only; does not count toward an overall verdict.
    pub advisory: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn new(check: &str, body_hash: &str, n_samples: usize, bound: Bound, tolerance: f64, worst: Result<f64>) -> Self {
        let (worst_value, note) = match worst {
            Ok(w) if w.is_finite() => (Some(w), None),
            Ok(w) => (None, Some(format!("non-finite worst value {w}"))),
            Err(e) => (None, Some(e.to_string())),
        };
        let pass = match (worst_value, bound) {
            (Some(w), Bound::AtMost) => w <= tolerance,
            (Some(w), Bound::Above) => w > tolerance,
            (None, _) => false,
        };
        Self {
            check: check.into(),
            body_hash: body_hash.into(),
            n_samples,
            worst_value,
            tolerance,
            bound,
            pass,
            advisory: false,
            note,
        }
    }

    pub fn advisory(mut self) -> Self {
        self.advisory = true;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note.get_or_insert_with(|| note.into());
        self
    }

    /// Failing report for a construction the factories rejected.
    pub fn rejected(body_hash: &str, err: &Error) -> Self {
        let (check, worst, tol, bound) = match err {
            Error::ConstructionRejected {
                metric,
                value,
                threshold,
            } => {
                let bound = if *metric == "curvature" { Bound::Above } else { Bound::AtMost };
                (*metric, *value, *threshold, bound)
            }
            Error::NotSelfPolar { defect, tolerance } => ("self_polarity", *defect, *tolerance, Bound::AtMost),
            _ => ("construction", f64::NAN, 0.0, Bound::AtMost),
        };
        let mut r = Self::new(check, body_hash, 0, bound, tol, Ok(worst));
        r.pass = false;
        r.note = Some(err.to_string());
        r
    }
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// A body, its spec hash and the base seed shared by all checks.
#[derive(Debug, Clone, Copy)]
pub struct Checker<'a> {
    pub body: &'a ConvexBody,
    pub hash: &'a str,
    pub seed: u64,
}

impl<'a> Checker<'a> {
    pub fn new(body: &'a ConvexBody, hash: &'a str, seed: u64) -> Self {
        Self { body, hash, seed }
    }

    fn numeric_or(&self, analytic: f64, numeric: f64) -> f64 {
        if self.body.is_numeric() {
            numeric
        } else {
            analytic
        }
    }

    fn boundary_sample(&self, check: u64, i: usize) -> Result<osb_core::BoundaryPoint> {
        self.body
            .random_boundary_point(&mut rng::seeded(self.seed, stream(check, i)))
    }

    /// Per-sample values of `f` at `n` random boundary points.
    fn over_boundary<F>(&self, check: u64, n: usize, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&osb_core::BoundaryPoint) -> Result<f64> + Sync + Send,
    {
        par_map(n, |i| f(&self.boundary_sample(check, i)?))
    }

    /// Chunked runs of a sequential sampler, each with its own seed.
    fn chunked<F>(&self, check: u64, n: usize, f: F) -> Result<Vec<f64>>
    where
        F: Fn(usize, u64) -> Result<f64> + Sync + Send,
    {
        const CHUNK: usize = 64;
        let chunks = n.div_ceil(CHUNK);
        par_map(chunks, |c| {
            let len = CHUNK.min(n - c * CHUNK);
            f(len, self.seed ^ stream(check, c))
        })
    }

    pub fn convexity(&self, n: usize) -> CheckReport {
        let eq = self.body.tolerances().eq_tol;
        let worst = self.body.convexity_probe(n, self.seed).max_violation;
        CheckReport::new("convexity_probe", self.hash, n, Bound::AtMost, eq, Ok(worst))
    }

    /// Relative homogeneity and evenness defects of the gauge.
    pub fn gauge_axioms(&self, n: usize) -> CheckReport {
        let body = self.body;
        let worst = par_map(n, |i| {
            let mut r = rng::seeded(self.seed, stream(1, i));
            let x = rng::unit_vector(&mut r, body.dim());
            let s = 0.1 + 9.9 * (i as f64 + 0.5) / n as f64;
            let g = body.gauge(&x)?;
            let hom = (body.gauge(&(&x * s))? - s * g).abs() / (s * g);
            let even = (body.gauge(&-&x)? - g).abs() / g;
            Ok(hom.max(even))
        });
        CheckReport::new("gauge_axioms", self.hash, n, Bound::AtMost, self.body.tolerances().eq_tol, worst.map(|v| max_of(&v)))
    }

    /// `|<∇G(x), x> - G(x)| / G(x)`; finite-difference gradients are held to `1e-6`.
    pub fn euler(&self, n: usize) -> CheckReport {
        let body = self.body;
        let fd = (0..4).any(|i| {
            let x = rng::unit_vector(&mut rng::seeded(self.seed, stream(2, i)), body.dim());
            body.gauge_fn().gradient(&x).is_none()
        });
        let tol = if fd { body.tolerances().eq_tol.max(1e-6) } else { body.tolerances().eq_tol };
        let worst = par_map(n, |i| {
            let x = rng::unit_vector(&mut rng::seeded(self.seed, stream(2, i)), body.dim()) * 1.7;
            let g = body.gauge(&x)?;
            Ok((body.gauge_gradient(&x)?.dot(&x) - g).abs() / g)
        });
        CheckReport::new("euler", self.hash, n, Bound::AtMost, tol, worst.map(|v| max_of(&v)))
    }

    pub fn self_polarity(&self, n: usize) -> CheckReport {
        let tol = self_polarity_tolerance(self.body);
        let worst = self.chunked(3, n, |len, seed| Ok(self_polarity_defect(self.body, len, seed)?.polar_defect));
        CheckReport::new("self_polarity", self.hash, n, Bound::AtMost, tol, worst.map(|v| max_of(&v)))
    }

    /// `max |f(f(x)) + x|`.
    pub fn involution(&self, n: usize) -> CheckReport {
        let worst = self.over_boundary(4, n, |x| Ok(check_involution(self.body, x)?.defect));
        let tol = self.numeric_or(1e-8, 1e-5);
        CheckReport::new("involution", self.hash, n, Bound::AtMost, tol, worst.map(|v| max_of(&v)))
    }

    /// Smallest `ω(ξ, ∇_ξ f)` over random unit tangents; `C^2` bodies only.
    pub fn positivity(&self, n: usize) -> CheckReport {
        let worst = self.chunked(5, n, |len, seed| positivity_scan(self.body, len, seed));
        CheckReport::new("positivity", self.hash, n, Bound::Above, 0.0, worst.map(|v| min_of(&v)))
    }

    /// Edge defects and `|area - 4|` of the 4-periodic families through `n` points.
    pub fn four_periodic(&self, n: usize) -> [CheckReport; 2] {
        let results = self.over_boundary_pairs(6, n, |x| {
            let fam = four_periodic_family(self.body, x)?;
            let c = check_family(self.body, &fam)?;
            Ok((c.edge_defect, (c.area - 4.0).abs()))
        });
        let edge_tol = self.numeric_or(1e-7, 1e-5);
        match results {
            Ok(v) => {
                let edges: Vec<f64> = v.iter().map(|p| p.0).collect();
                let areas: Vec<f64> = v.iter().map(|p| p.1).collect();
                [
                    CheckReport::new("four_periodic_edges", self.hash, n, Bound::AtMost, edge_tol, Ok(max_of(&edges))),
                    CheckReport::new("four_periodic_area", self.hash, n, Bound::AtMost, 1e-9, Ok(max_of(&areas))),
                ]
            }
            Err(e) => [
                CheckReport::new("four_periodic_edges", self.hash, n, Bound::AtMost, edge_tol, Err(e.clone())),
                CheckReport::new("four_periodic_area", self.hash, n, Bound::AtMost, 1e-9, Err(e)),
            ],
        }
    }

    fn over_boundary_pairs<F>(&self, check: u64, n: usize, f: F) -> Result<Vec<(f64, f64)>>
    where
        F: Fn(&osb_core::BoundaryPoint) -> Result<(f64, f64)> + Sync + Send,
    {
        par_map(n, |i| f(&self.boundary_sample(check, i)?))
    }

    /// `max |T(x + f(x)) - (f(x) - x)|`.
    pub fn invariance(&self, n: usize) -> CheckReport {
        let worst = self.over_boundary(7, n, |x| invariance_defect(self.body, x));
        let tol = self.numeric_or(1e-7, 1e-5);
        CheckReport::new("invariance", self.hash, n, Bound::AtMost, tol, worst.map(|v| max_of(&v)))
    }

    /// Planar: smallest angle increment of `Y` on an `n`-point grid. Higher
    /// dimensions: `max |multiplicity - 1|` over `rays` random rays.
    pub fn star_shape(&self, n: usize, rays: usize) -> CheckReport {
        if self.body.dim() == 2 {
            let worst = star_shape_check(self.body, n, 0, self.seed).map(|r| r.min_angle_step.unwrap_or(f64::NAN));
            return CheckReport::new("star_shape", self.hash, n, Bound::Above, 0.0, worst);
        }
        let body = self.body;
        let worst = par_map(rays, |k| {
            let mut r = rng::seeded(self.seed, stream(8, k));
            let dir = rng::unit_vector(&mut r, body.dim());
            let m = ray_multiplicity(body, &dir, 2 * body.dim() + 1, self.seed ^ stream(9, k))?;
            Ok((m as f64 - 1.0).abs())
        });
        CheckReport::new("ray_multiplicity", self.hash, rays, Bound::AtMost, 0.0, worst.map(|v| max_of(&v)))
    }

    /// Smallest normalized determinant of `dg` on the tangent space plus the radial direction.
    pub fn transversality(&self, n: usize) -> CheckReport {
        let worst = self.over_boundary(10, n, |x| radial_transversality(self.body, x));
        CheckReport::new("transversality", self.hash, n, Bound::Above, 0.0, worst.map(|v| min_of(&v)))
    }

    /// Lines `x + t f(x)` must meet `Y` exactly at `t = ±1`; worst is the largest
    /// crossing error, infinite if a line has the wrong number of crossings.
    pub fn two_point(&self, lines: usize) -> CheckReport {
        const RANGE: (f64, f64) = (-3.0, 3.0);
        let body = self.body;
        let sample = if body.dim() == 2 {
            match sample_y(body, 10_000, self.seed) {
                Ok(s) => Some(s),
                Err(e) => return CheckReport::new("two_point", self.hash, lines, Bound::AtMost, 1e-6, Err(e)),
            }
        } else {
            None
        };
        let (oracle, resolution) = match &sample {
            Some(s) => (RadialOracle::Sample(s), 600),
            None => (RadialOracle::Solve, 120),
        };
        let worst = self.over_boundary(11, lines, |x| {
            let rep = line_two_point_check(body, oracle, x, RANGE, resolution)?;
            if rep.count != 2 {
                return Ok(f64::INFINITY);
            }
            Ok((rep.crossings[0] + 1.0).abs().max((rep.crossings[1] - 1.0).abs()))
        })
        .map(|v| max_of(&v));
        let report = CheckReport::new("two_point", self.hash, lines, Bound::AtMost, 1e-6, worst.clone());
        match worst {
            Ok(w) if w.is_infinite() => report.with_note("a line did not cross Y exactly twice"),
            _ => report,
        }
    }

    /// Largest planarity or characteristic-image defect over `starts` flows of
    /// length `2π`. Zero for images of the ball; advisory.
    pub fn planarity(&self, starts: usize) -> CheckReport {
        let defects = self.over_boundary_pairs(12, starts, |x| {
            let r = planarity_defect(self.body, x, TAU, 400)?;
            Ok((r.gamma_defect, r.delta_char_defect))
        });
        let parts = defects.as_ref().ok().map(|v| {
            let gamma: Vec<f64> = v.iter().map(|p| p.0).collect();
            let delta: Vec<f64> = v.iter().map(|p| p.1).collect();
            (max_of(&gamma), max_of(&delta))
        });
        let worst = defects.map(|_| parts.map_or(f64::NAN, |(g, d)| g.max(d)));
        let report = CheckReport::new("planarity", self.hash, starts, Bound::AtMost, 1e-6, worst).advisory();
        match parts {
            Some((g, d)) => report.with_note(format!("gamma_defect {g:.3e}, delta_char_defect {d:.3e}")),
            None => report,
        }
    }

    /// Hausdorff distance between `∂X` and the curve recovered from an `n`-vertex `Y`.
    pub fn area_construction(&self, n: usize) -> CheckReport {
        let worst = (|| {
            let s = sample_y(self.body, n, self.seed)?;
            let curve = s
                .curve
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("area construction is planar only".into()))?;
            let recovered = area_construction_2d(curve)?;
            hausdorff_2d(&recovered, &boundary_curve_2d(self.body, n)?)
        })();
        let tol = self.numeric_or(1e-5, 1e-4);
        CheckReport::new("area_construction", self.hash, n, Bound::AtMost, tol, worst)
    }

    /// `|area(Y) / area(X) - 2|`.
    pub fn area_ratio(&self, n: usize) -> CheckReport {
        let worst = area_ratio_2d(self.body, n).map(|r| (r - 2.0).abs());
        CheckReport::new("area_ratio", self.hash, n, Bound::AtMost, 1e-4, worst)
    }

    /// Margin of the Monte Carlo volume over `2^n / n!`, in standard errors; advisory.
    pub fn mahler(&self, n: usize) -> CheckReport {
        let worst = parallel::mc_volume(self.body, n, self.seed).map(|v| mahler_diagnostic(self.body, v).margin);
        CheckReport::new("mahler", self.hash, n, Bound::Above, 0.0, worst).advisory()
    }

    pub fn is_c2(&self) -> bool {
        self.body.smoothness() >= Smoothness::C2
    }
}
