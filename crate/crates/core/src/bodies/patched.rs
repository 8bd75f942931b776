//! Smooth self-polar body that is not a linear image of the ball.
//!
//! Start from the unit ball and press a `C^∞` dent into it over the direction
//! cone `C = {u : min_i u_i > ε}` and its antipode. Call the result `X`. Since
//! `X ⊂ B` agrees with `B` off the cones and every normal of the dent points
//! back into its cone, `X° = B` off the cones as well. The patched body `Z`
//! takes
//!
//! * `X` on `C ∪ -C`,
//! * `J X°` on `JC ∪ -JC`,
//! * the ball everywhere else,
//!
//! and satisfies `Z = J Z° = Z^ω` exactly. The dent profile is the normalized
//! product `Π_i exp(-w / (u_i - ε))` with width `w = 2ε`. It is flat to all
//! orders on the cone boundary and peaks at the cone centre.

use alloc::format;
use alloc::sync::Arc;

use rand::Rng;

use crate::convex::{
    gradient_of, hessian_of, support_warm, ConvexBody, Gauge, Smoothness, ToleranceConfig, HESSIAN_STEP,
};
use crate::error::{Error, Result};
use crate::linalg::{j_matrix, tangent_frame, Vector};
use crate::rng;
use crate::symplectic::{apply_j, self_polarity_defect};

/// Dent profile `ψ` on unit vectors, supported on `C ∪ -C` with `ψ(±c) = 1`.
#[derive(Debug, Clone)]
pub struct DentProfile {
    dim: usize,
    epsilon: f64,
    width: f64,
    log_norm: f64,
}

impl DentProfile {
    pub fn new(dim: usize, epsilon: f64) -> Self {
        let width = 2.0 * epsilon;
        let centre = 1.0 / libm::sqrt(dim as f64);
        let log_norm = -(dim as f64) * width / (centre - epsilon);
        Self {
            dim,
            epsilon,
            width,
            log_norm,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn in_cone(&self, u: &Vector) -> bool {
        u.iter().all(|c| *c > self.epsilon)
    }

    fn one_sided(&self, u: &Vector, sign: f64) -> Option<(f64, Vector)> {
        let mut log = -self.log_norm;
        for c in u.iter() {
            let t = sign * c - self.epsilon;
            if t <= 0.0 {
                return None;
            }
            log -= self.width / t;
        }
        let val = libm::exp(log);
        let grad = u.map(|c| {
            let t = sign * c - self.epsilon;
            sign * val * self.width / (t * t)
        });
        Some((val, grad))
    }

    /// `ψ(u)` and its Euclidean gradient in the ambient coordinates.
    pub fn eval(&self, u: &Vector) -> (f64, Vector) {
        self.one_sided(u, 1.0)
            .or_else(|| self.one_sided(u, -1.0))
            .unwrap_or_else(|| (0.0, Vector::zeros(self.dim)))
    }
}

/// Ball with radial function `r(u) = 1 - δψ(u)`.
#[derive(Debug, Clone)]
pub struct DentedBall {
    profile: DentProfile,
    delta: f64,
}

impl DentedBall {
    pub fn new(dim: usize, epsilon: f64, delta: f64) -> Self {
        Self {
            profile: DentProfile::new(dim, epsilon),
            delta,
        }
    }

    pub fn profile(&self) -> &DentProfile {
        &self.profile
    }
}

impl Gauge for DentedBall {
    fn dim(&self) -> usize {
        self.profile.dim
    }

    fn value(&self, v: &Vector) -> f64 {
        let r = v.norm();
        if r == 0.0 {
            return 0.0;
        }
        let (psi, _) = self.profile.eval(&(v / r));
        r / (1.0 - self.delta * psi)
    }

    fn gradient(&self, v: &Vector) -> Option<Vector> {
        let len = v.norm();
        let u = v / len;
        let (psi, dpsi) = self.profile.eval(&u);
        let r = 1.0 - self.delta * psi;
        let tangential = &dpsi - &u * u.dot(&dpsi);
        Some(&u / r + tangential * (self.delta / (r * r)))
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Cinf
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    Dent,
    Bulge,
    Round,
}

/// The patched body `Z`.
#[derive(Debug, Clone)]
pub struct PatchedSelfPolar {
    dented: DentedBall,
    inner_tol: ToleranceConfig,
}

impl PatchedSelfPolar {
    pub fn new(n: usize, epsilon: f64, delta: f64) -> Self {
        Self {
            dented: DentedBall::new(2 * n, epsilon, delta),
            inner_tol: ToleranceConfig {
                newton_tol: 1e-14,
                ..ToleranceConfig::ANALYTIC
            },
        }
    }

    pub fn dented(&self) -> &DentedBall {
        &self.dented
    }

    fn region(&self, v: &Vector) -> Region {
        let eps = self.dented.profile.epsilon;
        let u = v / v.norm();
        let in_double_cone = |w: &Vector| w.iter().all(|c| *c > eps) || w.iter().all(|c| *c < -eps);
        if in_double_cone(&u) {
            Region::Dent
        } else if in_double_cone(&-apply_j(&u).expect("even dimension")) {
            Region::Bulge
        } else {
            Region::Round
        }
    }

    /// Support point of the dented ball at `u`, warm-started at `u/|u|`.
    fn dent_support(&self, u: &Vector) -> crate::convex::SupportPoint {
        support_warm(&self.dented, u, &(u / u.norm()), &self.inner_tol)
    }
}

impl Gauge for PatchedSelfPolar {
    fn dim(&self) -> usize {
        self.dented.dim()
    }

    fn value(&self, v: &Vector) -> f64 {
        let r = v.norm();
        if r == 0.0 {
            return 0.0;
        }
        match self.region(v) {
            Region::Dent => self.dented.value(v),
            Region::Bulge => self.dent_support(&-apply_j(v).expect("even dimension")).value,
            Region::Round => r,
        }
    }

    fn gradient(&self, v: &Vector) -> Option<Vector> {
        match self.region(v) {
            Region::Dent => self.dented.gradient(v),
            // ∇_v h_X(-Jv) = J ∇h_X(-Jv) = J x*(-Jv)
            Region::Bulge => apply_j(&self.dent_support(&-apply_j(v).ok()?).point).ok(),
            Region::Round => Some(v / v.norm()),
        }
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Cinf
    }

    fn is_numeric(&self) -> bool {
        true
    }
}

/// Thresholds the patched construction must meet.
pub const CONVEXITY_SAMPLES: usize = 4000;
pub const SELF_POLARITY_SAMPLES: usize = 64;
pub const SELF_POLARITY_LIMIT: f64 = 1e-5;
pub const SEAM_LIMIT: f64 = 1e-4;

/// Builds `Z` without running the validation suite.
pub fn patched_unvalidated(n: usize, epsilon: f64, delta: f64) -> Result<ConvexBody> {
    check_parameters(n, epsilon, delta)?;
    Ok(ConvexBody::new(
        Arc::new(PatchedSelfPolar::new(n, epsilon, delta)),
        format!("patched_self_polar(n={n},epsilon={epsilon},delta={delta})"),
    ))
}

fn check_parameters(n: usize, epsilon: f64, delta: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("patched body needs n >= 1"));
    }
    let limit = 1.0 / libm::sqrt(2.0 * n as f64);
    if !(epsilon > 0.0 && epsilon < limit) {
        return Err(Error::invalid(format!(
            "epsilon must lie in (0, {limit}) so the cone is nonempty"
        )));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::invalid("delta must lie in [0, 1)"));
    }
    Ok(())
}

/// Random unit direction inside the cone `C`, concentrated towards its centre
/// when the cone is narrow.
fn cone_direction<R: Rng + ?Sized>(rng: &mut R, profile: &DentProfile) -> Vector {
    let dim = profile.dim;
    let centre = Vector::from_element(dim, 1.0 / libm::sqrt(dim as f64));
    let mut spread = 1.0;
    loop {
        for _ in 0..64 {
            let u = &centre + rng::gaussian_vector(rng, dim) * spread;
            let u = &u / u.norm();
            if profile.in_cone(&u) {
                return u;
            }
        }
        spread *= 0.5;
    }
}

/// Point where the segment from the cone centre towards `outside` crosses the cone boundary.
fn seam_point(profile: &DentProfile, outside: &Vector) -> Vector {
    let dim = profile.dim;
    let centre = Vector::from_element(dim, 1.0 / libm::sqrt(dim as f64));
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let p = &centre * (1.0 - mid) + outside * mid;
        if profile.in_cone(&(&p / p.norm())) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = &centre * (1.0 - lo) + outside * lo;
    &p / p.norm()
}

/// Builds `Z` and validates convexity, curvature, seam continuity and
/// self-polarity, rejecting the parameters if any metric fails.
pub fn make_patched_selfpolar(n: usize, epsilon: f64, delta: f64, seed: u64) -> Result<ConvexBody> {
    check_parameters(n, epsilon, delta)?;
    if delta == 0.0 {
        return Ok(super::make_ball(2 * n)?.with_label(format!(
            "patched_self_polar(n={n},epsilon={epsilon},delta=0)"
        )));
    }
    let body = patched_unvalidated(n, epsilon, delta)?;
    let z = PatchedSelfPolar::new(n, epsilon, delta);
    let tol = *body.tolerances();

    let convexity = body.convexity_probe(CONVEXITY_SAMPLES, seed);
    if convexity.max_violation > tol.eq_tol {
        return Err(Error::ConstructionRejected {
            metric: "convexity_probe",
            value: convexity.max_violation,
            threshold: tol.eq_tol,
        });
    }

    let mut rng = rng::seeded(seed, 0x7061_7463);
    let curvature = min_dent_curvature(&z, &mut rng, 400);
    if curvature <= 0.0 {
        return Err(Error::ConstructionRejected {
            metric: "curvature",
            value: curvature,
            threshold: 0.0,
        });
    }

    let seam = seam_jump(&z, &mut rng, 64);
    if seam > SEAM_LIMIT {
        return Err(Error::ConstructionRejected {
            metric: "seam_gradient_jump",
            value: seam,
            threshold: SEAM_LIMIT,
        });
    }

    let sp = self_polarity_defect(&body, SELF_POLARITY_SAMPLES, seed)?;
    if sp.polar_defect > SELF_POLARITY_LIMIT {
        return Err(Error::ConstructionRejected {
            metric: "self_polarity_defect",
            value: sp.polar_defect,
            threshold: SELF_POLARITY_LIMIT,
        });
    }
    Ok(body)
}

/// Smallest eigenvalue of the gauge Hessian on tangent spaces of the dent.
pub fn min_dent_curvature<R: Rng + ?Sized>(z: &PatchedSelfPolar, rng: &mut R, samples: usize) -> f64 {
    let dented = &z.dented;
    let fd = ToleranceConfig::ANALYTIC.fd_step;
    let mut min = f64::INFINITY;
    for _ in 0..samples {
        let u = cone_direction(rng, &dented.profile);
        let x = &u / dented.value(&u);
        let grad = gradient_of(dented, &x, fd);
        let frame = tangent_frame(&grad);
        let h = hessian_of(dented, &x, HESSIAN_STEP, fd);
        let restricted = frame.transpose() * h * &frame;
        let eig = restricted.symmetric_eigen();
        min = min.min(eig.eigenvalues.min());
    }
    min
}

/// Largest gradient jump across the seams of the dent and bulge cones.
pub fn seam_jump<R: Rng + ?Sized>(z: &PatchedSelfPolar, rng: &mut R, samples: usize) -> f64 {
    let dim = z.dim();
    let fd = ToleranceConfig::ANALYTIC.fd_step;
    let j = j_matrix(dim);
    let centre = Vector::from_element(dim, 1.0 / libm::sqrt(dim as f64));
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let outside = rng::unit_vector(rng, dim);
        if z.dented.profile.in_cone(&outside) {
            continue;
        }
        let seam = seam_point(&z.dented.profile, &outside);
        let across = (&outside - &centre).normalize() * 1e-7;
        for p in [seam.clone(), &j * &seam] {
            let shift = if p == seam { across.clone() } else { &j * &across };
            let inside = gradient_of(z, &(&p - &shift), fd);
            let out = gradient_of(z, &(&p + &shift), fd);
            worst = worst.max((inside - out).norm());
        }
    }
    worst
}
