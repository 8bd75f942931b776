//! Gauge, gradient, support function and convexity primitives for centrally
//! symmetric convex bodies given by evaluators.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, j_matrix, Matrix, Vector};
use crate::rng;

/// Boundary regularity class of a body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Smoothness {
    C1,
    C2,
    Cinf,
}

impl Smoothness {
    /// One class less regular, saturating at `C1`.
    pub fn downgrade(self) -> Self {
        match self {
            Smoothness::Cinf => Smoothness::C2,
            Smoothness::C2 | Smoothness::C1 => Smoothness::C1,
        }
    }
}

impl fmt::Display for Smoothness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Smoothness::C1 => "C1",
            Smoothness::C2 => "C2",
            Smoothness::Cinf => "Cinf",
        })
    }
}

/// Numerical tolerances carried by every body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Absolute tolerance for identity checks.
    pub eq_tol: f64,
    /// Residual norm accepted by the tangency and support solvers.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Relative central-difference step for gradients.
    pub fd_step: f64,
}

impl ToleranceConfig {
    pub const ANALYTIC: Self = Self {
        eq_tol: 1e-9,
        newton_tol: 1e-12,
        newton_max_iter: 50,
        fd_step: 1e-6,
    };

    /// Bodies whose gauge involves an inner optimization.
    pub const NUMERIC: Self = Self {
        eq_tol: 1e-6,
        ..Self::ANALYTIC
    };

    pub fn validate(&self) -> Result<()> {
        let ok = self.eq_tol > 0.0
            && self.newton_tol > 0.0
            && self.fd_step > 0.0
            && self.newton_max_iter > 0
            && self.eq_tol.is_finite()
            && self.newton_tol.is_finite()
            && self.fd_step.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("tolerances must be positive and finite"))
        }
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self::ANALYTIC
    }
}

/// Value and maximizer of a support function evaluation `h_X(u) = max <x, u>`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPoint {
    pub value: f64,
    /// Boundary point attaining the maximum; equals `∇h_X(u)`.
    pub point: Vector,
}

/// A positively 1-homogeneous, even, convex gauge function.
///
/// Only `dim`, `value` and `smoothness` are mandatory. Every `None` from the
/// optional methods means "no closed form here", and callers fall back to
/// finite differences or numerical maximization.
pub trait Gauge: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, v: &Vector) -> f64;

    fn gradient(&self, _v: &Vector) -> Option<Vector> {
        None
    }

    fn hessian(&self, _v: &Vector) -> Option<Matrix> {
        None
    }

    /// Closed-form support function, when one is known.
    fn support(&self, _u: &Vector) -> Option<SupportPoint> {
        None
    }

    fn smoothness(&self) -> Smoothness;

    /// Whether `G^2` is a quadratic form (so it stays smooth through the origin).
    fn quadratic_square(&self) -> bool {
        false
    }

    /// Closed-form gauge of the polar body.
    fn polar(&self) -> Option<Arc<dyn Gauge>> {
        None
    }

    /// Whether evaluating the gauge involves an inner optimization.
    fn is_numeric(&self) -> bool {
        false
    }
}

/// Analytic gradient if available, otherwise central differences with step
/// `fd_step * |v|`.
pub fn gradient_of(g: &dyn Gauge, v: &Vector, fd_step: f64) -> Vector {
    if let Some(grad) = g.gradient(v) {
        if all_finite(&grad) {
            return grad;
        }
    }
    let h = fd_step * v.norm().max(f64::MIN_POSITIVE);
    let mut grad = Vector::zeros(v.len());
    let mut probe = v.clone();
    for i in 0..v.len() {
        probe[i] = v[i] + h;
        let up = g.value(&probe);
        probe[i] = v[i] - h;
        let down = g.value(&probe);
        probe[i] = v[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    grad
}

/// Relative step of the second-order Hessian stencil.
pub const HESSIAN_STEP: f64 = 1e-4;

/// Analytic Hessian if available, otherwise central differences of the
/// gradient with step `rel_step * |v|`, symmetrized.
pub fn hessian_of(g: &dyn Gauge, v: &Vector, rel_step: f64, fd_step: f64) -> Matrix {
    if let Some(h) = g.hessian(v) {
        if h.iter().all(|c| c.is_finite()) {
            return h;
        }
    }
    let n = v.len();
    let h = rel_step * v.norm().max(f64::MIN_POSITIVE);
    let mut hess = Matrix::zeros(n, n);
    let mut probe = v.clone();
    for j in 0..n {
        probe[j] = v[j] + h;
        let up = gradient_of(g, &probe, fd_step);
        probe[j] = v[j] - h;
        let down = gradient_of(g, &probe, fd_step);
        probe[j] = v[j];
        hess.set_column(j, &((up - down) / (2.0 * h)));
    }
    (&hess + hess.transpose()) * 0.5
}

/// Outcome of one projected-gradient ascent run for the support function.
#[derive(Debug, Clone)]
pub struct Ascent {
    pub value: f64,
    pub direction: Vector,
    /// Norm of the Riemannian gradient at the final iterate.
    pub residual: f64,
    pub converged: bool,
}

/// Maximize `phi(d) = <d, u> / G(d)` over unit directions `d`, starting at `start`.
///
/// Projected (Riemannian) gradient ascent on the sphere with Barzilai-Borwein
/// steps and a non-monotone Armijo safeguard. `phi(d)` is `<x, u>` at the
/// boundary point `x = d / G(d)`, so the maximum is `h_X(u)`.
pub fn support_ascent(g: &dyn Gauge, u: &Vector, start: &Vector, tol: &ToleranceConfig) -> Ascent {
    const MEMORY: usize = 6;
    let max_iter = 40 * tol.newton_max_iter;
    let unorm = u.norm();

    let eval = |d: &Vector| -> (f64, Vector) {
        let gd = g.value(d);
        let du = d.dot(u);
        let grad_g = gradient_of(g, d, tol.fd_step);
        let full = u / gd - grad_g * (du / (gd * gd));
        let radial = full.dot(d);
        (du / gd, full - d * radial)
    };

    let mut d = start / start.norm();
    let (mut phi, mut grad) = eval(&d);
    let mut history: Vec<f64> = alloc::vec![phi];
    let mut step = 1.0 / unorm;
    let mut converged = false;

    for _ in 0..max_iter {
        let gnorm = grad.norm();
        if gnorm <= tol.newton_tol * unorm {
            converged = true;
            break;
        }
        let reference = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut s = step;
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial = &d + &grad * s;
            trial /= trial.norm();
            let (phi_t, grad_t) = eval(&trial);
            if phi_t >= reference + 1e-4 * s * gnorm * gnorm || (phi_t >= phi && s * gnorm < 1e-14) {
                accepted = Some((trial, phi_t, grad_t));
                break;
            }
            s *= 0.5;
        }
        let Some((trial, phi_t, grad_t)) = accepted else {
            // no ascent possible at machine precision: value has converged
            converged = gnorm <= 1e-8 * unorm;
            break;
        };
        let dd = &trial - &d;
        let dg = &grad_t - &grad;
        let curvature = -dd.dot(&dg);
        let moved = dd.norm();
        d = trial;
        phi = phi_t;
        grad = grad_t;
        history.push(phi);
        if history.len() > MEMORY {
            history.remove(0);
        }
        if moved < 1e-15 {
            converged = grad.norm() <= 1e-8 * unorm;
            break;
        }
        step = if curvature > 0.0 {
            (dd.dot(&dd) / curvature).clamp(1e-10 / unorm, 1e10 / unorm)
        } else {
            1.0 / unorm
        };
    }
    Ascent {
        value: phi,
        residual: grad.norm(),
        direction: d,
        converged,
    }
}

fn ascent_point(g: &dyn Gauge, a: &Ascent) -> SupportPoint {
    SupportPoint {
        value: a.value,
        point: &a.direction / g.value(&a.direction),
    }
}

/// Support function by multistart ascent from `u/|u|` and the `dim` signed
/// coordinate directions.
pub fn support_numeric_of(g: &dyn Gauge, u: &Vector, tol: &ToleranceConfig) -> Result<SupportPoint> {
    let dim = u.len();
    let unorm = u.norm();
    let mut starts = Vec::with_capacity(dim + 1);
    starts.push(u / unorm);
    for i in 0..dim {
        let mut e = Vector::zeros(dim);
        e[i] = if u[i] < 0.0 { -1.0 } else { 1.0 };
        starts.push(e);
    }
    let mut best: Option<Ascent> = None;
    for s in &starts {
        let a = support_ascent(g, u, s, tol);
        let better = match &best {
            None => true,
            Some(b) => (a.converged && !b.converged) || (a.converged == b.converged && a.value > b.value),
        };
        if better {
            best = Some(a);
        }
    }
    let best = best.expect("at least one start");
    if !best.converged {
        return Err(Error::NumericFailure {
            what: "support maximization",
            best_value: best.value,
            residual: best.residual,
        });
    }
    Ok(ascent_point(g, &best))
}

/// Support value from a single warm start; used inside other gauges where the
/// body is known to be a small perturbation of the ball.
pub fn support_warm(g: &dyn Gauge, u: &Vector, start: &Vector, tol: &ToleranceConfig) -> SupportPoint {
    let a = support_ascent(g, u, start, tol);
    ascent_point(g, &a)
}

/// Closed form if the gauge has one, multistart ascent otherwise.
pub fn support_of(g: &dyn Gauge, u: &Vector, tol: &ToleranceConfig) -> Result<SupportPoint> {
    match g.support(u) {
        Some(sp) => Ok(sp),
        None => support_numeric_of(g, u, tol),
    }
}

/// A point on `∂X` with its cached first-order data.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint {
    pub x: Vector,
    pub grad: Vector,
    /// Unit outward normal `∇G / |∇G|`.
    pub normal: Vector,
    /// Characteristic vector `f(x) = J∇G(x)`; present in even dimension.
    pub fvec: Option<Vector>,
}

impl BoundaryPoint {
    /// `f(x)`; panics in odd dimension, where it is undefined.
    pub fn f(&self) -> &Vector {
        self.fvec.as_ref().expect("characteristic vector needs even dimension")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub max_violation: f64,
    pub n_samples: usize,
}

/// Runtime evaluator bundle for a convex body.
#[derive(Clone)]
pub struct ConvexBody {
    gauge: Arc<dyn Gauge>,
    label: String,
    tol: ToleranceConfig,
}

impl fmt::Debug for ConvexBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexBody")
            .field("label", &self.label)
            .field("dim", &self.dim())
            .field("smoothness", &self.smoothness())
            .finish()
    }
}

impl ConvexBody {
    pub fn new(gauge: Arc<dyn Gauge>, label: impl Into<String>) -> Self {
        let tol = if gauge.is_numeric() {
            ToleranceConfig::NUMERIC
        } else {
            ToleranceConfig::ANALYTIC
        };
        Self {
            gauge,
            label: label.into(),
            tol,
        }
    }

    pub fn with_tolerances(mut self, tol: ToleranceConfig) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.gauge.dim()
    }

    pub fn smoothness(&self) -> Smoothness {
        self.gauge.smoothness()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn tolerances(&self) -> &ToleranceConfig {
        &self.tol
    }

    pub fn gauge_fn(&self) -> &Arc<dyn Gauge> {
        &self.gauge
    }

    pub fn is_numeric(&self) -> bool {
        self.gauge.is_numeric()
    }

    pub(crate) fn check_vector(&self, v: &Vector) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        if !all_finite(v) {
            return Err(Error::invalid("non-finite coordinates"));
        }
        Ok(())
    }

    pub(crate) fn require(&self, required: Smoothness) -> Result<()> {
        if self.smoothness() < required {
            return Err(Error::Smoothness {
                required,
                actual: self.smoothness(),
            });
        }
        Ok(())
    }

    /// `‖v‖_X = inf{λ > 0 : v/λ ∈ X}`.
    pub fn gauge(&self, v: &Vector) -> Result<f64> {
        self.check_vector(v)?;
        Ok(self.gauge.value(v))
    }

    /// `∇G(x)`, analytic when available, central differences otherwise.
    pub fn gauge_gradient(&self, x: &Vector) -> Result<Vector> {
        self.check_vector(x)?;
        if x.norm() == 0.0 {
            return Err(Error::SingularPoint("gauge gradient at the origin".into()));
        }
        Ok(gradient_of(self.gauge.as_ref(), x, self.tol.fd_step))
    }

    /// Hessian of the gauge; analytic or a second-order stencil with step `1e-4 |x|`.
    pub fn hessian(&self, x: &Vector) -> Result<Matrix> {
        self.hessian_with_step(x, HESSIAN_STEP)
    }

    pub(crate) fn hessian_with_step(&self, x: &Vector, rel_step: f64) -> Result<Matrix> {
        self.check_vector(x)?;
        if x.norm() == 0.0 {
            return Err(Error::SingularPoint("gauge Hessian at the origin".into()));
        }
        Ok(hessian_of(self.gauge.as_ref(), x, rel_step, self.tol.fd_step))
    }

    /// Radial projection `v / G(v)` onto `∂X`, with cached gradient, normal and `f`.
    pub fn boundary_project(&self, v: &Vector) -> Result<BoundaryPoint> {
        self.check_vector(v)?;
        let g = self.gauge.value(v);
        if v.norm() == 0.0 || g <= 0.0 {
            return Err(Error::invalid("cannot project the origin onto the boundary"));
        }
        let x = v / g;
        let grad = gradient_of(self.gauge.as_ref(), &x, self.tol.fd_step);
        let gn = grad.norm();
        if gn == 0.0 || !gn.is_finite() {
            return Err(Error::DegenerateBoundary("vanishing gauge gradient".into()));
        }
        let normal = &grad / gn;
        let fvec = (self.dim() % 2 == 0).then(|| j_matrix(self.dim()) * &grad);
        Ok(BoundaryPoint { x, grad, normal, fvec })
    }

    /// Boundary point in a uniformly random direction.
    pub fn random_boundary_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BoundaryPoint> {
        self.boundary_project(&rng::unit_vector(rng, self.dim()))
    }

    /// `h_X(u) = max_{x ∈ X} <x, u>`.
    pub fn support(&self, u: &Vector) -> Result<f64> {
        Ok(self.support_point(u)?.value)
    }

    pub fn support_point(&self, u: &Vector) -> Result<SupportPoint> {
        self.check_vector(u)?;
        if u.norm() == 0.0 {
            return Err(Error::invalid("support function at the zero vector"));
        }
        support_of(self.gauge.as_ref(), u, &self.tol)
    }

    /// Support function by numerical maximization, ignoring any closed form.
    pub fn support_numeric(&self, u: &Vector) -> Result<SupportPoint> {
        self.check_vector(u)?;
        if u.norm() == 0.0 {
            return Err(Error::invalid("support function at the zero vector"));
        }
        support_numeric_of(self.gauge.as_ref(), u, &self.tol)
    }

    /// Largest sampled violation of `G(λa + (1-λ)b) <= λG(a) + (1-λ)G(b)`.
    ///
    /// Half of the pairs are independent boundary points; the other half are
    /// boundary neighbours at random scales, which is where a local dent shows.
    pub fn convexity_probe(&self, n_samples: usize, seed: u64) -> ConvexityReport {
        let mut rng = rng::seeded(seed, 0x636f_6e76);
        let dim = self.dim();
        let g = self.gauge.as_ref();
        let mut worst = f64::NEG_INFINITY;
        for k in 0..n_samples {
            let a = rng::unit_vector(&mut rng, dim);
            let a = &a / g.value(&a);
            let b = if k % 2 == 0 {
                rng::unit_vector(&mut rng, dim)
            } else {
                let scale = libm::pow(10.0, -rng.gen_range(0.0..3.0));
                &a + rng::gaussian_vector(&mut rng, dim) * scale
            };
            if b.norm() == 0.0 {
                continue;
            }
            let b = &b / g.value(&b);
            let lambda: f64 = rng.gen_range(0.0..1.0);
            let mid = &a * lambda + &b * (1.0 - lambda);
            let violation = g.value(&mid) - lambda * g.value(&a) - (1.0 - lambda) * g.value(&b);
            worst = worst.max(violation);
        }
        ConvexityReport {
            max_violation: worst.max(0.0),
            n_samples,
        }
    }
}
