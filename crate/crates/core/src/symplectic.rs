//! Standard symplectic structure, the characteristic map and symplectic polarity.
//!
//! Conventions, fixed once for the whole crate: coordinates are laid out as
//! `(x_1..x_n, y_1..y_n)`, `J(x, y) = (-y, x)` and `ω(u, v) = <Ju, v>`. With
//! these, the characteristic map is `f(x) = J∇G(x)` and Euler's identity gives
//! `ω(x, f(x)) = <x, ∇G(x)> = 1` on the boundary. The symplectic polar is
//! `X^ω = J X°`, so its gauge at `y` is `h_X(-Jy)`.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::convex::{gradient_of, BoundaryPoint, ConvexBody, Smoothness};
use crate::error::{Error, Result};
use crate::linalg::{tangent_frame, Vector};
use crate::rng;

fn check_even(v: &Vector) -> Result<usize> {
    if v.len() % 2 != 0 || v.is_empty() {
        return Err(Error::invalid("symplectic operations need an even dimension"));
    }
    Ok(v.len() / 2)
}

/// `J(x, y) = (-y, x)`.
pub fn apply_j(v: &Vector) -> Result<Vector> {
    let n = check_even(v)?;
    Ok(Vector::from_fn(2 * n, |i, _| if i < n { -v[n + i] } else { v[i - n] }))
}

/// `ω(u, v) = <Ju, v> = Σ (u_{x,i} v_{y,i} - u_{y,i} v_{x,i})`.
pub fn omega(u: &Vector, v: &Vector) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let n = check_even(u)?;
    Ok((0..n).map(|i| u[i] * v[n + i] - u[n + i] * v[i]).sum())
}

/// `f(x) = J∇G(x)`, the vector along the characteristic line with `ω(x, f(x)) = 1`.
pub fn char_map(x: &BoundaryPoint) -> Result<Vector> {
    if x.grad.norm() == 0.0 {
        return Err(Error::DegenerateBoundary("zero gauge gradient".into()));
    }
    match &x.fvec {
        Some(f) => Ok(f.clone()),
        None => apply_j(&x.grad),
    }
}

/// `J∇G(x)` evaluated at `x` as given (no projection onto the boundary).
pub fn char_map_at(body: &ConvexBody, x: &Vector) -> Result<Vector> {
    let grad = body.gauge_gradient(x)?;
    if grad.norm() == 0.0 {
        return Err(Error::DegenerateBoundary("zero gauge gradient".into()));
    }
    apply_j(&grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvolutionReport {
    /// `|f(f(x)) + x|`.
    pub defect: f64,
    /// `|G(f(x)) - 1|`; nonzero when `f(x)` leaves the boundary.
    pub gauge_defect: f64,
}

/// Checks `f ∘ f = -id` at `x`.
pub fn check_involution(body: &ConvexBody, x: &BoundaryPoint) -> Result<InvolutionReport> {
    let fx = char_map(x)?;
    let gauge_defect = (body.gauge(&fx)? - 1.0).abs();
    let ffx = char_map_at(body, &fx)?;
    Ok(InvolutionReport {
        defect: (ffx + &x.x).norm(),
        gauge_defect,
    })
}

/// Pointwise self-polarity defect `max(|G(f(x)) - 1|, |f(f(x)) + x|)`.
pub fn local_self_polarity_defect(body: &ConvexBody, x: &BoundaryPoint) -> Result<f64> {
    let r = check_involution(body, x)?;
    Ok(r.defect.max(r.gauge_defect))
}

fn tangent_tolerance(x: &BoundaryPoint, xi: &Vector) -> f64 {
    1e-6 * xi.norm() * x.grad.norm()
}

/// `∇_ξ f = J Hess G(x) ξ` for a tangent vector `ξ`.
pub fn char_map_derivative(body: &ConvexBody, x: &BoundaryPoint, xi: &Vector) -> Result<Vector> {
    body.require(Smoothness::C2)?;
    if xi.len() != x.x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.x.len(),
            found: xi.len(),
        });
    }
    if xi.dot(&x.grad).abs() > tangent_tolerance(x, xi) {
        return Err(Error::invalid("ξ is not tangent to the boundary"));
    }
    let h = body.hessian(&x.x)?;
    apply_j(&(h * xi))
}

/// Minimum of `ω(ξ, ∇_ξ f)` over random boundary points and unit tangents.
pub fn positivity_scan(body: &ConvexBody, n_samples: usize, seed: u64) -> Result<f64> {
    body.require(Smoothness::C2)?;
    check_even(&Vector::zeros(body.dim()))?;
    let mut rng = rng::seeded(seed, 0x706f_7369);
    let mut min = f64::INFINITY;
    for _ in 0..n_samples {
        let x = body.random_boundary_point(&mut rng)?;
        let frame = tangent_frame(&x.normal);
        let coeffs = rng::unit_vector(&mut rng, frame.ncols());
        let xi = frame * coeffs;
        let dxi = char_map_derivative(body, &x, &xi)?;
        min = min.min(omega(&xi, &dxi)?);
    }
    Ok(min)
}

/// Gauge of `X^ω` at `y`, i.e. `h_X(-Jy)`.
pub fn symplectic_polar_gauge(body: &ConvexBody, y: &Vector) -> Result<f64> {
    let u = -apply_j(y)?;
    body.support(&u)
}

/// Detector for `X = α X^ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfPolarityReport {
    /// `max |G_{X^ω}(x) - 1|` over boundary samples; zero iff `X = X^ω`.
    pub polar_defect: f64,
    /// Mean of `1 / ‖f(x)‖_X`; the scale in `X = α X^ω`.
    pub alpha: f64,
    /// `max |‖f(x)‖_X - mean|`; zero iff `‖f‖_X` is constant on the boundary.
    pub norm_spread: f64,
    pub n_samples: usize,
}

pub fn self_polarity_defect(body: &ConvexBody, n_samples: usize, seed: u64) -> Result<SelfPolarityReport> {
    check_even(&Vector::zeros(body.dim()))?;
    if n_samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let mut rng = rng::seeded(seed, 0x7365_6c66);
    let mut polar_defect: f64 = 0.0;
    let mut norms = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let x = body.random_boundary_point(&mut rng)?;
        polar_defect = polar_defect.max((symplectic_polar_gauge(body, &x.x)? - 1.0).abs());
        norms.push(body.gauge(x.f())?);
    }
    let mean = norms.iter().sum::<f64>() / n_samples as f64;
    let alpha = norms.iter().map(|v| 1.0 / v).sum::<f64>() / n_samples as f64;
    let norm_spread = norms.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    Ok(SelfPolarityReport {
        polar_defect,
        alpha,
        norm_spread,
        n_samples,
    })
}

/// Sampled characteristic curve `γ` on `∂X`.
#[derive(Debug, Clone)]
pub struct CharFlowTrace {
    pub times: Vec<f64>,
    pub points: Vec<BoundaryPoint>,
}

impl CharFlowTrace {
    /// `max_k |G(γ(t_k)) - 1|`.
    pub fn level_defect(&self, body: &ConvexBody) -> f64 {
        self.points
            .iter()
            .map(|p| (body.gauge_fn().value(&p.x) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Largest displacement the radial reprojection may apply to an RK4 step.
pub const MAX_REPROJECTION: f64 = 1e-3;

/// Integrates `γ' = f(γ)` with classical RK4, reprojecting radially onto `∂X`
/// after every step.
pub fn char_flow(body: &ConvexBody, x0: &BoundaryPoint, t_max: f64, steps: usize) -> Result<CharFlowTrace> {
    check_even(&x0.x)?;
    if steps == 0 || !t_max.is_finite() {
        return Err(Error::invalid("char_flow needs steps >= 1 and a finite horizon"));
    }
    let g = body.gauge_fn().as_ref();
    let fd = body.tolerances().fd_step;
    let field = |x: &Vector| -> Result<Vector> { apply_j(&gradient_of(g, x, fd)) };
    let h = t_max / steps as f64;
    let mut times = Vec::with_capacity(steps + 1);
    let mut points = Vec::with_capacity(steps + 1);
    times.push(0.0);
    points.push(x0.clone());
    let mut x = x0.x.clone();
    for k in 1..=steps {
        let k1 = field(&x)?;
        let k2 = field(&(&x + &k1 * (h / 2.0)))?;
        let k3 = field(&(&x + &k2 * (h / 2.0)))?;
        let k4 = field(&(&x + &k3 * h))?;
        let stepped = &x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let p = body.boundary_project(&stepped)?;
        if (&p.x - &stepped).norm() > MAX_REPROJECTION {
            return Err(Error::invalid("characteristic flow step too large"));
        }
        x = p.x.clone();
        times.push(h * k as f64);
        points.push(p);
    }
    Ok(CharFlowTrace { times, points })
}

/// Random unit tangent vector at `x`.
pub fn random_tangent<R: Rng + ?Sized>(rng: &mut R, x: &BoundaryPoint) -> Vector {
    let frame = tangent_frame(&x.normal);
    frame * rng::unit_vector(rng, x.x.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::j_matrix;

    fn v(c: &[f64]) -> Vector {
        Vector::from_column_slice(c)
    }

    #[test]
    fn omega_basis_values() {
        assert_eq!(omega(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 1.0);
        assert_eq!(omega(&v(&[1.0, 0.0, 0.0, 0.0]), &v(&[0.0, 0.0, 1.0, 0.0])).unwrap(), 1.0);
        let u = v(&[0.3, -1.2, 2.0, 0.7]);
        assert_eq!(omega(&u, &u).unwrap(), 0.0);
    }

    #[test]
    fn j_action() {
        assert_eq!(apply_j(&v(&[1.0, 0.0])).unwrap(), v(&[0.0, 1.0]));
        assert_eq!(apply_j(&v(&[0.0, 1.0])).unwrap(), v(&[-1.0, 0.0]));
        let u = v(&[0.3, -1.2, 2.0, 0.7]);
        assert_eq!(apply_j(&apply_j(&u).unwrap()).unwrap(), -u.clone());
        assert_eq!(apply_j(&u).unwrap(), j_matrix(4) * u);
    }

    #[test]
    fn odd_dimension_and_mismatch_are_errors() {
        assert!(apply_j(&v(&[1.0, 2.0, 3.0])).is_err());
        assert!(omega(&v(&[1.0, 2.0]), &v(&[1.0, 2.0, 3.0, 4.0])).is_err());
    }

    #[test]
    fn omega_is_j_invariant_and_antisymmetric() {
        let mut r = rng::seeded(5, 0);
        for _ in 0..100 {
            let a = rng::gaussian_vector(&mut r, 6);
            let b = rng::gaussian_vector(&mut r, 6);
            let w = omega(&a, &b).unwrap();
            assert!((w + omega(&b, &a).unwrap()).abs() < 1e-12);
            let ja = apply_j(&a).unwrap();
            let jb = apply_j(&b).unwrap();
            assert!((omega(&ja, &jb).unwrap() - w).abs() < 1e-12);
        }
    }
}
