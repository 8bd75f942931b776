//! The hypersurface `Y = {x + f(x) : x ∈ ∂X}` and the planar area construction.
//!
//! `g(x) = x + f(x)` maps `∂X` onto `Y`. Every `y = g(x)` starts the 4-periodic
//! orbit through `x`, so `T(Y) = Y`; the checks here probe that invariance,
//! star-shapedness and radial transversality of `Y`, the two-point property of
//! characteristic lines, and planarity of characteristic pairs. In the plane,
//! the area construction recovers `∂X` from `Y` alone.

use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::billiard::{newton_settings, outer_map, tangency_solve, Orientation, C1_HESSIAN_STEP};
use crate::convex::{gradient_of, hessian_of, BoundaryPoint, ConvexBody, Smoothness, HESSIAN_STEP};
use crate::error::{Error, Result};
use crate::linalg::{j_matrix, tangent_frame, Matrix, Vector};
use crate::newton::{damped_newton, Settings};
use crate::rng;
use crate::symplectic::{apply_j, char_flow, char_map, char_map_at};

fn require_dim2(body: &ConvexBody) -> Result<()> {
    if body.dim() != 2 {
        return Err(Error::invalid("this operation is planar only"));
    }
    Ok(())
}

fn require_even(body: &ConvexBody) -> Result<()> {
    if body.dim() % 2 != 0 {
        return Err(Error::invalid("Y needs an even dimension"));
    }
    Ok(())
}

/// `g(x) = x + f(x)`.
pub fn y_point(x: &BoundaryPoint) -> Result<Vector> {
    Ok(&x.x + char_map(x)?)
}

/// Boundary point at polar angle `theta` of a planar body.
pub fn boundary_at_angle(body: &ConvexBody, theta: f64) -> Result<BoundaryPoint> {
    body.boundary_project(&Vector::from_column_slice(&[libm::cos(theta), libm::sin(theta)]))
}

/// Unwrapped polar angles of a closed planar polyline, starting in `(-π, π]`.
fn unwrapped_angles(points: &[[f64; 2]]) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len());
    let mut prev = 0.0;
    for (k, p) in points.iter().enumerate() {
        let a = libm::atan2(p[1], p[0]);
        let a = if k == 0 {
            a
        } else {
            let mut d = a - prev;
            while d <= -PI {
                d += 2.0 * PI;
            }
            while d > PI {
                d -= 2.0 * PI;
            }
            prev + d
        };
        out.push(a);
        prev = a;
    }
    out
}

/// Closed polyline in the plane; closure is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarCurve {
    pub vertices: Vec<[f64; 2]>,
}

impl PlanarCurve {
    pub fn new(vertices: Vec<[f64; 2]>) -> Self {
        Self { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Smallest angular increment between consecutive vertices, with the
    /// closing edge included. Positive iff the curve winds once around the
    /// origin in strictly increasing angle, which makes it star-shaped and simple.
    pub fn min_angle_step(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return f64::NEG_INFINITY;
        }
        let angles = unwrapped_angles(&self.vertices);
        let mut min = f64::INFINITY;
        for k in 1..n {
            min = min.min(angles[k] - angles[k - 1]);
        }
        let closing = angles[0] + 2.0 * PI - angles[n - 1];
        let total_ok = (angles[n - 1] - angles[0] - 2.0 * PI).abs() < PI;
        if total_ok {
            min.min(closing)
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Radius of the polyline along the ray at angle `theta`; requires a
    /// positive [`min_angle_step`](Self::min_angle_step).
    pub fn radius_at(&self, theta: f64) -> f64 {
        let n = self.vertices.len();
        let angles = unwrapped_angles(&self.vertices);
        let mut t = theta;
        while t < angles[0] {
            t += 2.0 * PI;
        }
        while t >= angles[0] + 2.0 * PI {
            t -= 2.0 * PI;
        }
        let k = angles.partition_point(|a| *a <= t).max(1) - 1;
        let a = self.vertices[k];
        let b = self.vertices[(k + 1) % n];
        let d = [libm::cos(t), libm::sin(t)];
        // ray s·d meets a + λ(b - a)
        let e = [b[0] - a[0], b[1] - a[1]];
        let denom = d[0] * e[1] - d[1] * e[0];
        (a[0] * e[1] - a[1] * e[0]) / denom
    }
}

/// Sampled `Y` with its source points.
#[derive(Debug, Clone)]
pub struct HypersurfaceSample {
    pub points: Vec<BoundaryPoint>,
    pub ys: Vec<Vector>,
    pub dim: usize,
    /// In the plane, `Y` as a polyline in boundary-angle order.
    pub curve: Option<PlanarCurve>,
    radial: Option<RadialIndex>,
}

/// Unwrapped vertex angles and radii of an angle-monotone planar `Y`.
#[derive(Debug, Clone)]
struct RadialIndex {
    angles: Vec<f64>,
    radii: Vec<f64>,
}

impl RadialIndex {
    fn new(curve: &PlanarCurve) -> Option<Self> {
        if curve.min_angle_step() <= 0.0 {
            return None;
        }
        Some(Self {
            angles: unwrapped_angles(&curve.vertices),
            radii: curve.vertices.iter().map(|p| libm::hypot(p[0], p[1])).collect(),
        })
    }

    /// Cubic Lagrange interpolation of `r(θ)` through the four vertices around `theta`.
    fn radius(&self, theta: f64) -> f64 {
        let n = self.angles.len() as isize;
        let base = self.angles[0];
        let mut t = theta;
        while t < base {
            t += 2.0 * PI;
        }
        while t >= base + 2.0 * PI {
            t -= 2.0 * PI;
        }
        let k = self.angles.partition_point(|a| *a <= t) as isize - 1;
        let node = |i: isize| {
            let m = i.rem_euclid(n);
            let turns = ((i - m) / n) as f64;
            (self.angles[m as usize] + 2.0 * PI * turns, self.radii[m as usize])
        };
        let nodes = [node(k - 1), node(k), node(k + 1), node(k + 2)];
        let mut r = 0.0;
        for (i, (ai, ri)) in nodes.iter().enumerate() {
            let mut w = 1.0;
            for (j, (aj, _)) in nodes.iter().enumerate() {
                if i != j {
                    w *= (t - aj) / (ai - aj);
                }
            }
            r += w * ri;
        }
        r
    }
}

/// Planar bodies use a uniform grid of boundary angles; higher dimensions
/// use uniformly random directions.
pub fn sample_y(body: &ConvexBody, n_samples: usize, seed: u64) -> Result<HypersurfaceSample> {
    require_even(body)?;
    if n_samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let dim = body.dim();
    let mut points = Vec::with_capacity(n_samples);
    if dim == 2 {
        for k in 0..n_samples {
            points.push(boundary_at_angle(body, 2.0 * PI * k as f64 / n_samples as f64)?);
        }
    } else {
        let mut r = rng::seeded(seed, 0x7973_616d);
        for _ in 0..n_samples {
            points.push(body.random_boundary_point(&mut r)?);
        }
    }
    let ys = points.iter().map(y_point).collect::<Result<Vec<_>>>()?;
    let curve = (dim == 2).then(|| PlanarCurve::new(ys.iter().map(|y| [y[0], y[1]]).collect()));
    let radial = curve.as_ref().and_then(RadialIndex::new);
    Ok(HypersurfaceSample {
        points,
        ys,
        dim,
        curve,
        radial,
    })
}

impl HypersurfaceSample {
    fn planar(&self) -> Result<&PlanarCurve> {
        self.curve
            .as_ref()
            .ok_or_else(|| Error::invalid("radial lookup needs a planar sample"))
    }
}

/// `|T(x + f(x)) - (f(x) - x)|`.
pub fn invariance_defect(body: &ConvexBody, x: &BoundaryPoint) -> Result<f64> {
    let f = char_map(x)?;
    let image = outer_map(body, &(&x.x + &f))?;
    Ok((image - (f - &x.x)).norm())
}

/// Radius of `Y` at angle `theta`, interpolated from the sampled vertices.
pub fn radial_function_2d(sample: &HypersurfaceSample, theta: f64) -> Result<f64> {
    sample.planar()?;
    match &sample.radial {
        Some(index) => Ok(index.radius(theta)),
        None => Err(Error::DegenerateBoundary("Y is not angle-monotone".into())),
    }
}

/// The point of `Y` on the ray through `dir`, with its source on `∂X`.
#[derive(Debug, Clone)]
pub struct RayHit {
    pub x: BoundaryPoint,
    pub y: Vector,
    /// `|y|`.
    pub radius: f64,
    pub residual: f64,
}

fn ray_settings(body: &ConvexBody) -> Settings {
    newton_settings(body, body.tolerances().newton_tol * 10.0, 1.0)
}

/// Newton on `x + f(x) = s·d`, `G(x) = 1` from `x0`.
pub fn ray_solve_from(body: &ConvexBody, dir: &Vector, x0: &Vector) -> Option<RayHit> {
    let dim = body.dim();
    let g = body.gauge_fn().as_ref();
    let fd = body.tolerances().fd_step;
    let d = dir / dir.norm();
    let j = j_matrix(dim);
    let hess_step = if body.smoothness() >= Smoothness::C2 {
        HESSIAN_STEP
    } else {
        C1_HESSIAN_STEP
    };
    let residual = |u: &Vector| -> Option<Vector> {
        let s = u[dim];
        if s <= 0.0 {
            return None;
        }
        let x = u.rows(0, dim).into_owned();
        let mut r = Vector::zeros(dim + 1);
        r.rows_mut(0, dim)
            .copy_from(&(&x + &j * gradient_of(g, &x, fd) - &d * s));
        r[dim] = g.value(&x) - 1.0;
        Some(r)
    };
    let jacobian = |u: &Vector| -> Matrix {
        let x = u.rows(0, dim).into_owned();
        let h = hessian_of(g, &x, hess_step, fd);
        let mut jac = Matrix::zeros(dim + 1, dim + 1);
        jac.view_mut((0, 0), (dim, dim))
            .copy_from(&(Matrix::identity(dim, dim) + &j * h));
        jac.view_mut((0, dim), (dim, 1)).copy_from(&(-&d));
        jac.view_mut((dim, 0), (1, dim))
            .copy_from(&gradient_of(g, &x, fd).transpose());
        jac
    };
    let p = body.boundary_project(x0).ok()?;
    let mut u0 = Vector::zeros(dim + 1);
    u0.rows_mut(0, dim).copy_from(&p.x);
    u0[dim] = (&p.x + p.f()).norm();
    let out = damped_newton(u0, residual, jacobian, &ray_settings(body));
    if !out.converged {
        return None;
    }
    let x = body.boundary_project(&out.u.rows(0, dim).into_owned()).ok()?;
    let y = y_point(&x).ok()?;
    Some(RayHit {
        radius: y.norm(),
        residual: out.residual,
        y,
        x,
    })
}

/// Initial guess `(I - J) d`, exact for the ball.
fn ray_guess(dir: &Vector) -> Result<Vector> {
    Ok(dir - apply_j(dir)?)
}

/// The unique point of `Y` on the ray through `dir`.
pub fn ray_solve(body: &ConvexBody, dir: &Vector) -> Result<RayHit> {
    require_even(body)?;
    body.check_vector(dir)?;
    if dir.norm() == 0.0 {
        return Err(Error::invalid("ray direction must be nonzero"));
    }
    let d = dir / dir.norm();
    if let Some(hit) = ray_solve_from(body, &d, &ray_guess(&d)?) {
        return Ok(hit);
    }
    let mut r = rng::seeded(0x7261_7973, 0);
    for _ in 0..4 * body.dim() {
        let start = ray_guess(&d)? + rng::gaussian_vector(&mut r, body.dim()) * 0.5;
        if start.norm() == 0.0 {
            continue;
        }
        if let Some(hit) = ray_solve_from(body, &d, &start) {
            return Ok(hit);
        }
    }
    ray_bisect(body, &d)
}

/// Bisection on `s ↦ t(s·d) - 1`, with `t` the backward tangency parameter:
/// `s·d` lies on `Y` exactly when `t = 1`. Slow but indifferent to the
/// nonsmooth gradients that stall Newton on `C^1` bodies.
fn ray_bisect(body: &ConvexBody, d: &Vector) -> Result<RayHit> {
    let phi = |s: f64| -> Result<f64> { Ok(tangency_solve(body, &(d * s), Orientation::Backward)?.t - 1.0) };
    let failure = |s: f64| Error::NumericFailure {
        what: "ray solve",
        best_value: s,
        residual: f64::INFINITY,
    };
    let mut lo = (1.0 + 1e-6) / body.gauge(d)?;
    if phi(lo)? >= 0.0 {
        return Err(failure(lo));
    }
    let mut hi = 2.0 * lo;
    let mut doublings = 0;
    while phi(hi)? <= 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(failure(hi));
        }
    }
    while hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if phi(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let x = tangency_solve(body, &(d * s), Orientation::Backward)?.x;
    let y = y_point(&x)?;
    Ok(RayHit {
        radius: y.norm(),
        residual: (&y - d * s).amax(),
        y,
        x,
    })
}

/// Normalized determinant `|det M| / Π |M_i|` of the tangent frame pushed
/// through `dg` together with the radial direction `g(x)`.
pub fn radial_transversality(body: &ConvexBody, x: &BoundaryPoint) -> Result<f64> {
    require_even(body)?;
    body.require(Smoothness::C2)?;
    let dg = Matrix::identity(body.dim(), body.dim()) + j_matrix(body.dim()) * body.hessian(&x.x)?;
    Ok(normalized_det(&dg, x)?)
}

fn normalized_det(dg: &Matrix, x: &BoundaryPoint) -> Result<f64> {
    let dim = x.x.len();
    let frame = tangent_frame(&x.normal);
    let mut m = Matrix::zeros(dim, dim);
    m.view_mut((0, 0), (dim, dim - 1)).copy_from(&(dg * frame));
    m.set_column(dim - 1, &y_point(x)?);
    let scale: f64 = m.column_iter().map(|c| c.norm()).product();
    Ok(m.determinant().abs() / scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarShapeReport {
    /// Planar: smallest angular increment of the sampled `Y` (positive iff monotone).
    pub min_angle_step: Option<f64>,
    /// `dim >= 4`: smallest normalized determinant from [`radial_transversality`].
    pub min_transversality: Option<f64>,
    /// `dim >= 4`: largest number of distinct `Y` points found on one ray.
    pub max_ray_multiplicity: Option<usize>,
    /// `dim >= 4`: smallest number found on one ray (zero means a solver miss).
    pub min_ray_multiplicity: Option<usize>,
    pub n_samples: usize,
}

impl StarShapeReport {
    pub fn passed(&self) -> bool {
        self.min_angle_step.map_or(true, |m| m > 0.0)
            && self.min_transversality.map_or(true, |m| m > 0.0)
            && self.max_ray_multiplicity.map_or(true, |m| m == 1)
            && self.min_ray_multiplicity.map_or(true, |m| m == 1)
    }
}

/// Distinct solutions closer than this are merged into one cluster.
pub const CLUSTER_RADIUS: f64 = 1e-6;

/// Number of distinct points of `Y` on the ray through `dir`, found by
/// multistart Newton from `starts` random initial points.
pub fn ray_multiplicity(body: &ConvexBody, dir: &Vector, starts: usize, seed: u64) -> Result<usize> {
    let dim = body.dim();
    let d = dir / dir.norm();
    let mut r = rng::seeded(seed, 0x6d75_6c74);
    let mut clusters: Vec<Vector> = Vec::new();
    for k in 0..starts {
        let start = if k == 0 {
            ray_guess(&d)?
        } else {
            rng::gaussian_vector(&mut r, dim)
        };
        if let Some(hit) = ray_solve_from(body, &d, &start) {
            if !clusters.iter().any(|c| (c - &hit.y).norm() < CLUSTER_RADIUS) {
                clusters.push(hit.y);
            }
        }
    }
    Ok(clusters.len())
}

/// Planar: angle monotonicity of `Y` on a uniform grid of `n_samples` boundary
/// angles. Higher dimensions: transversality on `n_samples` boundary points
/// (`C^2` bodies only) and multistart ray multiplicity on `n_rays` random rays.
pub fn star_shape_check(body: &ConvexBody, n_samples: usize, n_rays: usize, seed: u64) -> Result<StarShapeReport> {
    require_even(body)?;
    if body.dim() == 2 {
        let sample = sample_y(body, n_samples, seed)?;
        return Ok(StarShapeReport {
            min_angle_step: Some(sample.planar()?.min_angle_step()),
            min_transversality: None,
            max_ray_multiplicity: None,
            min_ray_multiplicity: None,
            n_samples,
        });
    }
    let mut r = rng::seeded(seed, 0x7374_6172);
    let min_transversality = if body.smoothness() >= Smoothness::C2 {
        let mut min = f64::INFINITY;
        for _ in 0..n_samples {
            let x = body.random_boundary_point(&mut r)?;
            min = min.min(radial_transversality(body, &x)?);
        }
        Some(min)
    } else {
        None
    };
    let (mut lo, mut hi) = (usize::MAX, 0);
    for k in 0..n_rays {
        let dir = rng::unit_vector(&mut r, body.dim());
        let m = ray_multiplicity(body, &dir, 2 * body.dim() + 1, seed.wrapping_add(k as u64))?;
        lo = lo.min(m);
        hi = hi.max(m);
    }
    Ok(StarShapeReport {
        min_angle_step: None,
        min_transversality,
        max_ray_multiplicity: (n_rays > 0).then_some(hi),
        min_ray_multiplicity: (n_rays > 0).then_some(lo),
        n_samples,
    })
}

/// Source of the radius of `Y` in a given direction.
#[derive(Debug, Clone, Copy)]
pub enum RadialOracle<'a> {
    /// Polyline lookup on a planar sample.
    Sample(&'a HypersurfaceSample),
    /// Exact ray solve in any dimension.
    Solve,
}

impl RadialOracle<'_> {
    pub fn radius(&self, body: &ConvexBody, dir: &Vector) -> Result<f64> {
        match self {
            RadialOracle::Sample(s) => radial_function_2d(s, libm::atan2(dir[1], dir[0])),
            RadialOracle::Solve => Ok(ray_solve(body, dir)?.radius),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPointReport {
    pub count: usize,
    /// Line parameters `t` of the crossings, in increasing order.
    pub crossings: Vec<f64>,
}

/// Counts where the line `x + t f(x)`, `t ∈ [t_min, t_max]`, crosses `Y`.
pub fn line_two_point_check(
    body: &ConvexBody,
    oracle: RadialOracle<'_>,
    x: &BoundaryPoint,
    t_range: (f64, f64),
    resolution: usize,
) -> Result<TwoPointReport> {
    require_even(body)?;
    let (t_min, t_max) = t_range;
    if resolution < 2 || !(t_max > t_min) {
        return Err(Error::invalid("need t_min < t_max and resolution >= 2"));
    }
    let f = char_map(x)?;
    let phi = |t: f64| -> Result<f64> {
        let p = &x.x + &f * t;
        Ok(p.norm() - oracle.radius(body, &p)?)
    };
    let h = (t_max - t_min) / (resolution - 1) as f64;
    let mut crossings = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for k in 0..resolution {
        let t = t_min + h * k as f64;
        let v = phi(t)?;
        if v == 0.0 {
            continue;
        }
        if let Some((tp, vp)) = last {
            if vp * v < 0.0 {
                let (mut lo, mut hi) = (tp, t);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if phi(mid)? * vp > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                crossings.push(0.5 * (lo + hi));
            }
        }
        last = Some((t, v));
    }
    Ok(TwoPointReport {
        count: crossings.len(),
        crossings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarityReport {
    /// Largest distance of `γ(t)` from `span{γ(0), f(γ(0))}`.
    pub gamma_defect: f64,
    /// Largest angle between `d/dt f(γ(t))` and `f(f(γ(t)))`.
    pub delta_char_defect: f64,
}

fn line_angle(a: &Vector, b: &Vector) -> f64 {
    let b_hat = b / b.norm();
    let along = a.dot(&b_hat);
    libm::atan2((a - &b_hat * along).norm(), along.abs())
}

/// Follows the characteristic curve `γ` from `x0` and measures how far `γ`
/// leaves its initial symplectic plane and how far `δ = f∘γ` is from being
/// characteristic itself.
pub fn planarity_defect(body: &ConvexBody, x0: &BoundaryPoint, t_max: f64, steps: usize) -> Result<PlanarityReport> {
    body.require(Smoothness::C2)?;
    if steps < 2 {
        return Err(Error::invalid("planarity needs at least two flow steps"));
    }
    let trace = char_flow(body, x0, t_max, steps)?;
    let e1 = &x0.x / x0.x.norm();
    let f0 = char_map(x0)?;
    let e2 = &f0 - &e1 * f0.dot(&e1);
    let e2 = &e2 / e2.norm();
    let gamma_defect = trace
        .points
        .iter()
        .map(|p| (&p.x - &e1 * p.x.dot(&e1) - &e2 * p.x.dot(&e2)).norm())
        .fold(0.0, f64::max);
    let delta: Vec<Vector> = trace.points.iter().map(char_map).collect::<Result<_>>()?;
    let h = t_max / steps as f64;
    let mut delta_char_defect: f64 = 0.0;
    for k in 1..delta.len() - 1 {
        let velocity = (&delta[k + 1] - &delta[k - 1]) / (2.0 * h);
        let ff = char_map_at(body, &delta[k])?;
        delta_char_defect = delta_char_defect.max(line_angle(&velocity, &ff));
    }
    Ok(PlanarityReport {
        gamma_defect,
        delta_char_defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    /// Smallest `|g(x_i) - g(x_j)|` over pairs with distinct sources.
    pub min_distance: f64,
    /// Pairs with `|x_i - x_j| > 1e-9` but `|g(x_i) - g(x_j)| <= 1e-9`.
    pub collisions: usize,
}

pub fn injectivity(sample: &HypersurfaceSample) -> InjectivityReport {
    let mut min_distance = f64::INFINITY;
    let mut collisions = 0;
    let n = sample.ys.len();
    for i in 0..n {
        for j in i + 1..n {
            if (&sample.points[i].x - &sample.points[j].x).norm() <= 1e-9 {
                continue;
            }
            let d = (&sample.ys[i] - &sample.ys[j]).norm();
            min_distance = min_distance.min(d);
            if d <= 1e-9 {
                collisions += 1;
            }
        }
    }
    InjectivityReport {
        min_distance,
        collisions,
    }
}

/// `max_k |g(-x_k) + g(x_k)|` over the sample; zero because `f` is odd.
pub fn symmetry_defect(body: &ConvexBody, sample: &HypersurfaceSample) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (p, y) in sample.points.iter().zip(&sample.ys) {
        let q = body.boundary_project(&-&p.x)?;
        worst = worst.max((y_point(&q)? + y).norm());
    }
    Ok(worst)
}

/// Signed area of a closed polyline (positive when counterclockwise).
pub fn signed_area(curve: &PlanarCurve) -> f64 {
    let v = &curve.vertices;
    let n = v.len();
    (0..n)
        .map(|k| {
            let a = v[k];
            let b = v[(k + 1) % n];
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        / 2.0
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Recovers `∂X` from `Y`: for every vertex `y`, the chord `[y, z(y)]` cutting
/// off area `(A - 4)/4` counterclockwise from `y`, and the midpoint `(y + z)/2`.
pub fn area_construction_2d(y_curve: &PlanarCurve) -> Result<PlanarCurve> {
    let n = y_curve.len();
    if n < 3 {
        return Err(Error::invalid("curve needs at least three vertices"));
    }
    if y_curve.min_angle_step() <= 0.0 {
        return Err(Error::invalid(
            "curve must wind once counterclockwise around the origin without backtracking",
        ));
    }
    let area = signed_area(y_curve);
    if area <= 4.0 {
        return Err(Error::invalid(alloc::format!(
            "enclosed area {area} <= 4: segment area would be <= 0"
        )));
    }
    let target = (area - 4.0) / 4.0;
    let p = |k: usize| y_curve.vertices[k % n];
    // prefix[m] = Σ_{k<m} cross(P_k, P_{k+1}) over the doubled vertex list
    let mut prefix = Vec::with_capacity(2 * n + 1);
    prefix.push(0.0);
    for k in 0..2 * n {
        prefix.push(prefix[k] + cross(p(k), p(k + 1)));
    }
    // area between the arc P_i → P_j → z and the chord z → P_i, z on edge (P_j, P_{j+1})
    let cut = |i: usize, j: usize, s: f64| -> f64 {
        let a = p(j);
        let b = p(j + 1);
        let z = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
        0.5 * (prefix[j] - prefix[i] + cross(a, z) + cross(z, p(i)))
    };
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        j = j.max(i);
        while j + 1 < i + n && cut(i, j + 1, 0.0) < target {
            j += 1;
        }
        // cut is affine in s on one edge
        let c0 = cut(i, j, 0.0);
        let c1 = cut(i, j, 1.0);
        if !(c0 <= target && target <= c1) || c1 == c0 {
            return Err(Error::NumericFailure {
                what: "area construction chord",
                best_value: c0,
                residual: target - c0,
            });
        }
        let s = (target - c0) / (c1 - c0);
        let a = p(j);
        let b = p(j + 1);
        let z = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
        let y = p(i);
        out.push([0.5 * (y[0] + z[0]), 0.5 * (y[1] + z[1])]);
    }
    Ok(PlanarCurve::new(out))
}

/// `∂X` of a planar body on a uniform grid of `n` polar angles.
pub fn boundary_curve_2d(body: &ConvexBody, n: usize) -> Result<PlanarCurve> {
    require_dim2(body)?;
    let mut v = Vec::with_capacity(n);
    for k in 0..n {
        let x = boundary_at_angle(body, 2.0 * PI * k as f64 / n as f64)?;
        v.push([x.x[0], x.x[1]]);
    }
    Ok(PlanarCurve::new(v))
}

/// `area(Y) / area(X)` from `n_samples` boundary points.
pub fn area_ratio_2d(body: &ConvexBody, n_samples: usize) -> Result<f64> {
    require_dim2(body)?;
    if n_samples < 3 {
        return Err(Error::invalid("need at least three samples"));
    }
    let sample = sample_y(body, n_samples, 0)?;
    let x_curve = PlanarCurve::new(sample.points.iter().map(|p| [p.x[0], p.x[1]]).collect());
    Ok(signed_area(sample.planar()?) / signed_area(&x_curve))
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let e = [b[0] - a[0], b[1] - a[1]];
    let w = [p[0] - a[0], p[1] - a[1]];
    let len2 = e[0] * e[0] + e[1] * e[1];
    let s = if len2 == 0.0 {
        0.0
    } else {
        ((w[0] * e[0] + w[1] * e[1]) / len2).clamp(0.0, 1.0)
    };
    libm::hypot(w[0] - s * e[0], w[1] - s * e[1])
}

/// Edges searched on each side of the angular match in [`hausdorff_2d`].
pub const HAUSDORFF_WINDOW: usize = 32;

fn directed_hausdorff(a: &PlanarCurve, b: &PlanarCurve) -> f64 {
    let m = b.len();
    let angles = unwrapped_angles(&b.vertices);
    let base = angles[0];
    let mut worst: f64 = 0.0;
    for &p in &a.vertices {
        let mut t = libm::atan2(p[1], p[0]);
        while t < base {
            t += 2.0 * PI;
        }
        while t >= base + 2.0 * PI {
            t -= 2.0 * PI;
        }
        let k = angles.partition_point(|x| *x <= t);
        let mut best = f64::INFINITY;
        let w = HAUSDORFF_WINDOW.min(m);
        for off in 0..2 * w {
            let idx = (k + m + off - w) % m;
            best = best.min(point_segment_distance(p, b.vertices[idx], b.vertices[(idx + 1) % m]));
        }
        worst = worst.max(best);
    }
    worst
}

/// Hausdorff distance between two closed star-shaped polylines around the
/// origin, searching a window of edges around the angular match.
pub fn hausdorff_2d(a: &PlanarCurve, b: &PlanarCurve) -> Result<f64> {
    if a.min_angle_step() <= 0.0 || b.min_angle_step() <= 0.0 {
        return Err(Error::invalid("Hausdorff distance needs star-shaped curves"));
    }
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

/// `max_θ |r(θ) - r(θ + π)|` on a grid of `n` angles.
pub fn radial_symmetry_defect(sample: &HypersurfaceSample, n: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let theta = PI * k as f64 / n as f64;
        let d = radial_function_2d(sample, theta)? - radial_function_2d(sample, theta + PI)?;
        worst = worst.max(d.abs());
    }
    Ok(worst)
}
