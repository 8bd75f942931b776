//! The symplectic outer billiard map, its inverse and the 4-periodic family.
//!
//! For `z` outside `X`, the forward tangency point is the unique `x ∈ ∂X` with
//! `z = x - t f(x)` for some `t > 0`; then `ω(x, x - z) = t ω(x, f(x)) = t > 0`
//! and `T(z) = 2x - z`. The backward tangency `z = x + t f(x)` gives `T^{-1}`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bodies::self_polarity_tolerance;
use crate::convex::{gradient_of, hessian_of, BoundaryPoint, ConvexBody, Smoothness, HESSIAN_STEP};
use crate::error::{Error, Result};
use crate::linalg::{j_matrix, Matrix, Vector};
use crate::newton::{damped_newton, Outcome, Settings};
use crate::rng;
use crate::symplectic::{local_self_polarity_defect, omega, random_tangent};

/// Points with `G(z) <= 1 + BOUNDARY_MARGIN` count as on or inside the body.
pub const BOUNDARY_MARGIN: f64 = 1e-9;
/// Size of the random tangent offsets used for multistart.
pub const MULTISTART_OFFSET: f64 = 0.3;
/// Relative Hessian step used when the body is only `C^1`.
pub const C1_HESSIAN_STEP: f64 = 1e-5;
const BISECTION_GRID: usize = 720;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `z = x - t f(x)`: the map `T`.
    Forward,
    /// `z = x + t f(x)`: the map `T^{-1}`.
    Backward,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::Forward => 1.0,
            Orientation::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TangencySolution {
    pub x: BoundaryPoint,
    /// Ray parameter, always positive.
    pub t: f64,
    /// `max(|x ∓ t f(x) - z|, |G(x) - 1|)`.
    pub residual: f64,
    pub iterations: usize,
}

struct Problem<'a> {
    body: &'a ConvexBody,
    z: Vector,
    sign: f64,
    j: Matrix,
    fd: f64,
    hess_step: f64,
}

impl Problem<'_> {
    fn f(&self, x: &Vector) -> Vector {
        &self.j * gradient_of(self.body.gauge_fn().as_ref(), x, self.fd)
    }

    /// `(x - s t f(x) - z, G(x) - 1)` at `u = (x, t)`, defined for `t > 0`.
    fn residual(&self, u: &Vector) -> Option<Vector> {
        let dim = self.z.len();
        let t = u[dim];
        if t <= 0.0 {
            return None;
        }
        let x = u.rows(0, dim).into_owned();
        let mut r = Vector::zeros(dim + 1);
        r.rows_mut(0, dim)
            .copy_from(&(&x - self.f(&x) * (self.sign * t) - &self.z));
        r[dim] = self.body.gauge_fn().value(&x) - 1.0;
        Some(r)
    }

    fn jacobian(&self, u: &Vector) -> Matrix {
        let g = self.body.gauge_fn().as_ref();
        let dim = self.z.len();
        let t = u[dim];
        let x = u.rows(0, dim).into_owned();
        let grad = gradient_of(g, &x, self.fd);
        let h = hessian_of(g, &x, self.hess_step, self.fd);
        let mut jac = Matrix::zeros(dim + 1, dim + 1);
        let block = Matrix::identity(dim, dim) - (&self.j * h) * (self.sign * t);
        jac.view_mut((0, 0), (dim, dim)).copy_from(&block);
        jac.view_mut((0, dim), (dim, 1))
            .copy_from(&(&self.j * &grad * -self.sign));
        jac.view_mut((dim, 0), (1, dim)).copy_from(&grad.transpose());
        jac
    }

    fn solve_from(&self, x0: &Vector, t0: f64, settings: &Settings) -> Outcome {
        let dim = self.z.len();
        let mut u0 = Vector::zeros(dim + 1);
        u0.rows_mut(0, dim).copy_from(x0);
        u0[dim] = t0;
        damped_newton(u0, |u| self.residual(u), |u| self.jacobian(u), settings)
    }
}

/// Angle bisection for planar bodies on `cross(z - x(θ), f(x(θ)))`.
fn planar_fallback(p: &Problem<'_>) -> Option<(Vector, f64)> {
    let g = p.body.gauge_fn();
    let point = |theta: f64| {
        let d = Vector::from_column_slice(&[libm::cos(theta), libm::sin(theta)]);
        let x = &d / g.value(&d);
        let f = p.f(&x);
        let w = &p.z - &x;
        (x, f.clone(), w[0] * f[1] - w[1] * f[0], w.dot(&f))
    };
    let step = 2.0 * core::f64::consts::PI / BISECTION_GRID as f64;
    let mut prev = point(0.0);
    for k in 1..=BISECTION_GRID {
        let theta = step * k as f64;
        let cur = point(theta);
        // forward wants z - x = -t f, i.e. <z - x, f> < 0
        let wanted = |dot: f64| dot * p.sign < 0.0;
        if prev.2 * cur.2 <= 0.0 && (wanted(prev.3) || wanted(cur.3)) {
            let (mut lo, mut hi) = (theta - step, theta);
            let lo_sign = prev.2;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if point(mid).2 * lo_sign > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (x, f, _, dot) = point(0.5 * (lo + hi));
            if wanted(dot) {
                let t = (&p.z - &x).norm() / f.norm();
                return Some((x, t));
            }
        }
        prev = cur;
    }
    None
}

/// Iteration budget multiplier for `C^1` bodies.
pub const C1_BUDGET: usize = 4;

/// Newton settings for `body`, with residuals relative to `scale`. Where a
/// `C^1` gradient has a Hölder kink, like `|x_i|^(1/3)` for an `l_{4/3}` block,
/// the damped iteration halves the error in the kinked coordinate per step and
/// the residual shrinks only by `2^(-1/3)`. Those bodies get a larger budget,
/// and since rounding in the kinked coordinate is magnified the same way,
/// their stalls are accepted at `eq_tol`.
pub(crate) fn newton_settings(body: &ConvexBody, accept: f64, scale: f64) -> Settings {
    let tol = body.tolerances();
    let (stall, budget) = if body.smoothness() >= Smoothness::C2 {
        (1e-3 * tol.eq_tol, 1)
    } else {
        (tol.eq_tol, C1_BUDGET)
    };
    Settings {
        accept: accept * scale,
        stall_accept: stall * scale,
        max_iter: budget * tol.newton_max_iter,
    }
}

/// Finds the tangency point of `z` for the given orientation.
pub fn tangency_solve(body: &ConvexBody, z: &Vector, orientation: Orientation) -> Result<TangencySolution> {
    body.check_vector(z)?;
    if body.dim() % 2 != 0 {
        return Err(Error::invalid("outer billiard needs an even dimension"));
    }
    let r = body.gauge(z)?;
    if r <= 1.0 + BOUNDARY_MARGIN {
        return Err(Error::invalid(format!(
            "start point must lie outside the body, gauge {r}"
        )));
    }
    let tol = body.tolerances();
    let dim = body.dim();
    let problem = Problem {
        body,
        z: z.clone(),
        sign: orientation.sign(),
        j: j_matrix(dim),
        fd: tol.fd_step,
        hess_step: if body.smoothness() >= Smoothness::C2 {
            HESSIAN_STEP
        } else {
            C1_HESSIAN_STEP
        },
    };
    let scale = z.amax().max(1.0);
    let settings = newton_settings(body, tol.newton_tol, scale);

    // exact for the ball and its linear symplectic images
    let p = body.boundary_project(z)?;
    let t_ball = libm::sqrt(r * r - 1.0);
    let guess = body.boundary_project(&(&p.x + p.f() * (problem.sign * t_ball)))?;
    let ray = |q: &BoundaryPoint| (z - &q.x).norm() / q.f().norm();
    let mut starts = alloc::vec![(guess.x.clone(), ray(&guess)), (p.x.clone(), ray(&p))];
    let mut rng = rng::seeded(0x7461_6e67, 0);
    for _ in 0..dim {
        let offset = random_tangent(&mut rng, &guess) * MULTISTART_OFFSET;
        if let Ok(q) = body.boundary_project(&(&guess.x + offset)) {
            starts.push((q.x.clone(), ray(&q)));
        }
    }

    let mut best: Option<Outcome> = None;
    let mut keep = |o: Outcome| -> bool {
        let done = o.converged;
        if best.as_ref().map_or(true, |b| done || o.residual < b.residual) {
            best = Some(o);
        }
        done
    };
    let mut solved = starts
        .iter()
        .any(|(x0, t0)| keep(problem.solve_from(x0, *t0, &settings)));
    if !solved && dim == 2 {
        if let Some((x0, t0)) = planar_fallback(&problem) {
            solved = keep(problem.solve_from(&x0, t0, &settings));
        }
    }
    let best = best.expect("at least one start");
    let t = best.u[dim];
    if !solved {
        return Err(Error::NumericFailure {
            what: "tangency solve",
            best_value: t,
            residual: best.residual,
        });
    }
    let x = body.boundary_project(&best.u.rows(0, dim).into_owned())?;
    let mut u = best.u.clone();
    u.rows_mut(0, dim).copy_from(&x.x);
    let residual = problem.residual(&u).map_or(f64::INFINITY, |r| r.amax());
    Ok(TangencySolution {
        x,
        t,
        residual,
        iterations: best.iterations,
    })
}

/// `T(z) = 2x - z` with the forward tangency point `x`.
pub fn outer_map(body: &ConvexBody, z: &Vector) -> Result<Vector> {
    Ok(outer_step(body, z, Orientation::Forward)?.0)
}

/// `T^{-1}(z)`, reflecting in the backward tangency point.
pub fn outer_map_inverse(body: &ConvexBody, z: &Vector) -> Result<Vector> {
    Ok(outer_step(body, z, Orientation::Backward)?.0)
}

fn outer_step(body: &ConvexBody, z: &Vector, orientation: Orientation) -> Result<(Vector, TangencySolution)> {
    let sol = tangency_solve(body, z, orientation)?;
    Ok((&sol.x.x * 2.0 - z, sol))
}

#[derive(Debug, Clone)]
pub struct OrbitTrace {
    pub body_label: String,
    pub start: Vector,
    pub orientation: Orientation,
    /// `z_0, z_1, ...`; one longer than `tangencies`.
    pub points: Vec<Vector>,
    pub tangencies: Vec<TangencySolution>,
    /// Reason the orbit stopped early, if it did.
    pub failure: Option<String>,
}

impl OrbitTrace {
    pub fn steps(&self) -> usize {
        self.tangencies.len()
    }
}

pub fn iterate(body: &ConvexBody, z0: &Vector, steps: usize) -> Result<OrbitTrace> {
    iterate_oriented(body, z0, steps, Orientation::Forward)
}

/// Iterates `T` (or `T^{-1}`) from `z0`; a failed step truncates the trace and
/// is recorded in `failure`.
pub fn iterate_oriented(body: &ConvexBody, z0: &Vector, steps: usize, orientation: Orientation) -> Result<OrbitTrace> {
    if steps == 0 {
        return Err(Error::invalid("need at least one step"));
    }
    body.check_vector(z0)?;
    if body.gauge(z0)? <= 1.0 + BOUNDARY_MARGIN {
        return Err(Error::invalid("start point must lie outside the body"));
    }
    let mut trace = OrbitTrace {
        body_label: body.label().into(),
        start: z0.clone(),
        orientation,
        points: alloc::vec![z0.clone()],
        tangencies: Vec::with_capacity(steps),
        failure: None,
    };
    let mut z = z0.clone();
    for k in 0..steps {
        match outer_step(body, &z, orientation) {
            Ok((next, sol)) => {
                trace.points.push(next.clone());
                trace.tangencies.push(sol);
                z = next;
            }
            Err(e) => {
                trace.failure = Some(format!("step {k}: {e}"));
                break;
            }
        }
        if body.gauge(&z)? <= 1.0 + BOUNDARY_MARGIN {
            trace.failure = Some(format!("step {}: iterate fell inside the body", k + 1));
            break;
        }
    }
    Ok(trace)
}

/// The centrally symmetric 4-periodic orbit through `x`.
#[derive(Debug, Clone)]
pub struct FourPeriodic {
    /// `x + f, -x + f, -x - f, x - f`.
    pub vertices: [Vector; 4],
    pub x: BoundaryPoint,
}

/// Builds the four vertices after checking `f(f(x)) = -x` at `x`.
pub fn four_periodic_family(body: &ConvexBody, x: &BoundaryPoint) -> Result<FourPeriodic> {
    let tolerance = self_polarity_tolerance(body);
    let defect = local_self_polarity_defect(body, x)?;
    if defect > tolerance {
        return Err(Error::NotSelfPolar { defect, tolerance });
    }
    let f = x.f();
    Ok(FourPeriodic {
        vertices: [&x.x + f, -&x.x + f, -&x.x - f, &x.x - f],
        x: x.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyCheck {
    /// `max_i |T(z_i) - z_{i+1}|`.
    pub edge_defect: f64,
    /// `ω(z_2 - z_1, z_4 - z_1)`.
    pub area: f64,
    /// `max(|z_3 + z_1|, |z_4 + z_2|)`.
    pub symmetry_defect: f64,
}

/// Verifies every edge of the family with the outer billiard map.
pub fn check_family(body: &ConvexBody, family: &FourPeriodic) -> Result<FamilyCheck> {
    let z = &family.vertices;
    let mut edge_defect: f64 = 0.0;
    for i in 0..4 {
        let image = outer_map(body, &z[i])?;
        edge_defect = edge_defect.max((image - &z[(i + 1) % 4]).norm());
    }
    Ok(FamilyCheck {
        edge_defect,
        area: omega(&(&z[1] - &z[0]), &(&z[3] - &z[0]))?,
        symmetry_defect: (&z[2] + &z[0]).norm().max((&z[3] + &z[1]).norm()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityReport {
    /// `max_k |z_{k+p} - z_k|`.
    pub defect: f64,
    /// `max_k |z_{k+p/2} + z_k|` for even `p`.
    pub symmetry_defect: Option<f64>,
}

pub fn periodicity_defect(trace: &OrbitTrace, period: usize) -> Result<PeriodicityReport> {
    let pts = &trace.points;
    if period == 0 || pts.len() <= period {
        return Err(Error::invalid(format!(
            "trace of {} points is too short for period {period}",
            pts.len()
        )));
    }
    let defect = (0..pts.len() - period)
        .map(|k| (&pts[k + period] - &pts[k]).norm())
        .fold(0.0, f64::max);
    let symmetry_defect = (period % 2 == 0).then(|| {
        let half = period / 2;
        (0..pts.len() - half)
            .map(|k| (&pts[k + half] + &pts[k]).norm())
            .fold(0.0, f64::max)
    });
    Ok(PeriodicityReport {
        defect,
        symmetry_defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundednessStats {
    pub max_norm: f64,
    pub min_norm: f64,
    /// `|z_N| - |z_0|`.
    pub drift: f64,
    pub steps: usize,
}

pub fn boundedness_stats(trace: &OrbitTrace) -> BoundednessStats {
    let norms: Vec<f64> = trace.points.iter().map(|z| z.norm()).collect();
    BoundednessStats {
        max_norm: norms.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min_norm: norms.iter().copied().fold(f64::INFINITY, f64::min),
        drift: norms[norms.len() - 1] - norms[0],
        steps: trace.steps(),
    }
}
