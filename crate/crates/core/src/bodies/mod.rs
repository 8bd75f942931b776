//! Body factories and the serializable body description.

mod gauges;
pub mod patched;

use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use gauges::{Ball, L2Sum, LinearImage, LpBall, NumericPolar, SymplecticSum};
pub use patched::{make_patched_selfpolar, patched_unvalidated, DentProfile, DentedBall, PatchedSelfPolar};

use crate::convex::{ConvexBody, Gauge};
use crate::error::{Error, Result};
use crate::linalg::{symplectic_defect, Matrix};
use crate::symplectic::self_polarity_defect;

/// Algebraic description of a body, as read from and written to spec files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        dim: usize,
    },
    LpBall {
        p: f64,
        dim: usize,
    },
    L2Sum {
        left: Box<BodySpec>,
        right: Box<BodySpec>,
    },
    LagrangianSum {
        k: Box<BodySpec>,
    },
    SymplecticL2Sum {
        left: Box<BodySpec>,
        right: Box<BodySpec>,
    },
    LinearImage {
        inner: Box<BodySpec>,
        /// Row-major.
        matrix: Vec<Vec<f64>>,
    },
    PatchedSelfPolar {
        n: usize,
        epsilon: f64,
        delta: f64,
        seed: u64,
    },
    NumericPolar {
        inner: Box<BodySpec>,
    },
}

/// Samples used by the self-polarity gate of [`make_symplectic_l2_sum`].
pub const GATE_SAMPLES: usize = 64;

/// Self-polarity tolerance: tight for closed-form bodies, loose when the gauge
/// needs an inner optimization.
pub fn self_polarity_tolerance(body: &ConvexBody) -> f64 {
    if body.is_numeric() {
        1e-5
    } else {
        1e-8
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    Ok(())
}

fn check_even_dim(dim: usize) -> Result<()> {
    if dim < 2 || dim % 2 != 0 {
        return Err(Error::invalid(format!("body dimension must be even and >= 2, got {dim}")));
    }
    Ok(())
}

/// Euclidean unit ball. Dimension 1 gives the interval `[-1, 1]`, which is only
/// accepted as an ingredient of sums.
pub fn make_ball(dim: usize) -> Result<ConvexBody> {
    check_dim(dim)?;
    Ok(ConvexBody::new(Arc::new(Ball { dim }), format!("ball({dim})")))
}

pub fn make_lp_ball(p: f64, dim: usize) -> Result<ConvexBody> {
    check_dim(dim)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!(
            "l_p ball needs 1 < p < inf for a smooth strictly convex boundary, got p = {p}"
        )));
    }
    Ok(ConvexBody::new(Arc::new(LpBall { p, dim }), format!("lp_ball(p={p},{dim})")))
}

/// `A ⊕_2 B` on concatenated coordinates.
pub fn make_l2_sum(a: &ConvexBody, b: &ConvexBody) -> Result<ConvexBody> {
    let g = L2Sum::new(a.gauge_fn().clone(), b.gauge_fn().clone());
    Ok(ConvexBody::new(Arc::new(g), format!("l2_sum({}, {})", a.label(), b.label())))
}

/// Lagrangian sum `K ⊕_2 K°`, symplectically self-polar for every admissible `K`.
pub fn make_lagrangian_sum(k: &ConvexBody) -> Result<ConvexBody> {
    let polar = match k.gauge_fn().polar() {
        Some(p) => p,
        None => Arc::new(NumericPolar::new(k.gauge_fn().clone())) as Arc<dyn Gauge>,
    };
    let g = L2Sum::new(k.gauge_fn().clone(), polar);
    Ok(ConvexBody::new(Arc::new(g), format!("lagrangian_sum({})", k.label())))
}

fn self_polarity_gate(body: &ConvexBody) -> Result<()> {
    check_even_dim(body.dim())?;
    let tolerance = self_polarity_tolerance(body);
    let report = self_polarity_defect(body, GATE_SAMPLES, 0)?;
    if report.polar_defect > tolerance {
        return Err(Error::NotSelfPolar {
            defect: report.polar_defect,
            tolerance,
        });
    }
    Ok(())
}

/// Symplectic `l_2`-sum of two self-polar bodies, laid out in the joint
/// standard coordinates.
pub fn make_symplectic_l2_sum(x: &ConvexBody, y: &ConvexBody) -> Result<ConvexBody> {
    self_polarity_gate(x)?;
    self_polarity_gate(y)?;
    let g = SymplecticSum::new(x.gauge_fn().clone(), y.gauge_fn().clone());
    Ok(ConvexBody::new(
        Arc::new(g),
        format!("symplectic_l2_sum({}, {})", x.label(), y.label()),
    ))
}

/// Image of a body under a linear map, with its symplecticity flag.
#[derive(Debug, Clone)]
pub struct ImageBody {
    pub body: ConvexBody,
    /// `L^T J L = J` up to the body's `eq_tol`.
    pub is_symplectic: bool,
}

pub fn make_linear_image(inner: &ConvexBody, l: Matrix) -> Result<ImageBody> {
    let is_symplectic = l.nrows() % 2 == 0 && l.is_square() && symplectic_defect(&l) <= inner.tolerances().eq_tol;
    let g = LinearImage::new(inner.gauge_fn().clone(), l)?;
    let body = ConvexBody::new(Arc::new(g), format!("linear_image({})", inner.label()))
        .with_tolerances(*inner.tolerances());
    Ok(ImageBody { body, is_symplectic })
}

/// Polar body `K°` whose gauge is the numerically maximized support function of `K`.
pub fn numeric_polar(inner: &ConvexBody) -> Result<ConvexBody> {
    Ok(ConvexBody::new(
        Arc::new(NumericPolar::new(inner.gauge_fn().clone())),
        format!("numeric_polar({})", inner.label()),
    ))
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("matrix must be square and nonempty"));
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Builds any node of the spec tree, including odd-dimensional ingredients.
pub fn realize_component(spec: &BodySpec) -> Result<ConvexBody> {
    match spec {
        BodySpec::Ball { dim } => make_ball(*dim),
        BodySpec::LpBall { p, dim } => make_lp_ball(*p, *dim),
        BodySpec::L2Sum { left, right } => make_l2_sum(&realize_component(left)?, &realize_component(right)?),
        BodySpec::LagrangianSum { k } => make_lagrangian_sum(&realize_component(k)?),
        BodySpec::SymplecticL2Sum { left, right } => {
            make_symplectic_l2_sum(&realize_component(left)?, &realize_component(right)?)
        }
        BodySpec::LinearImage { inner, matrix } => {
            let inner = realize_component(inner)?;
            let l = matrix_from_rows(matrix)?;
            if l.nrows() != inner.dim() {
                return Err(Error::DimensionMismatch {
                    expected: inner.dim(),
                    found: l.nrows(),
                });
            }
            Ok(make_linear_image(&inner, l)?.body)
        }
        BodySpec::PatchedSelfPolar { n, epsilon, delta, seed } => make_patched_selfpolar(*n, *epsilon, *delta, *seed),
        BodySpec::NumericPolar { inner } => numeric_polar(&realize_component(inner)?),
    }
}

/// Builds a top-level body, which must live in an even dimension `>= 2`.
pub fn realize(spec: &BodySpec) -> Result<ConvexBody> {
    let body = realize_component(spec)?;
    check_even_dim(body.dim())?;
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{j_matrix, Vector};

    fn v(c: &[f64]) -> Vector {
        Vector::from_column_slice(c)
    }

    fn interval(half_width: f64) -> BodySpec {
        BodySpec::LinearImage {
            inner: Box::new(BodySpec::Ball { dim: 1 }),
            matrix: alloc::vec![alloc::vec![half_width]],
        }
    }

    #[test]
    fn lp_exponent_bounds() {
        assert!(make_lp_ball(1.0, 2).is_err());
        assert!(make_lp_ball(f64::INFINITY, 2).is_err());
        assert!(make_lp_ball(0.5, 2).is_err());
        assert!(make_lp_ball(1.01, 2).is_ok());
    }

    #[test]
    fn odd_top_level_rejected_but_allowed_as_ingredient() {
        assert!(realize(&BodySpec::Ball { dim: 3 }).is_err());
        assert!(realize(&interval(2.0)).is_err());
        let ellipse = BodySpec::LagrangianSum {
            k: Box::new(interval(2.0)),
        };
        let body = realize(&ellipse).unwrap();
        assert_eq!(body.dim(), 2);
        // {x^2/4 + 4y^2 <= 1}
        assert!((body.gauge(&v(&[2.0, 0.0])).unwrap() - 1.0).abs() < 1e-15);
        assert!((body.gauge(&v(&[0.0, 0.5])).unwrap() - 1.0).abs() < 1e-15);
        assert!((body.gauge(&v(&[1.0, 0.25])).unwrap() - libm::sqrt(0.5)).abs() < 1e-15);
    }

    #[test]
    fn linear_image_flags_symplectic_maps() {
        let ball = make_ball(2).unwrap();
        let d = Matrix::from_diagonal(&v(&[2.0, 0.5]));
        assert!(make_linear_image(&ball, d).unwrap().is_symplectic);
        assert!(make_linear_image(&ball, j_matrix(2)).unwrap().is_symplectic);
        let s = Matrix::from_diagonal(&v(&[2.0, 2.0]));
        assert!(!make_linear_image(&ball, s).unwrap().is_symplectic);
        assert!(make_linear_image(&ball, Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn symplectic_sum_rejects_non_self_polar_input() {
        let lp = make_lp_ball(4.0, 2).unwrap();
        let ball = make_ball(2).unwrap();
        match make_symplectic_l2_sum(&lp, &ball) {
            Err(Error::NotSelfPolar { defect, .. }) => assert!(defect > 1e-3),
            other => panic!("expected NotSelfPolar, got {other:?}"),
        }
    }

    #[test]
    fn non_square_matrix_is_input_error() {
        let spec = BodySpec::LinearImage {
            inner: Box::new(BodySpec::Ball { dim: 2 }),
            matrix: alloc::vec![alloc::vec![1.0, 0.0], alloc::vec![0.0]],
        };
        assert!(matches!(realize(&spec), Err(Error::InvalidInput(_))));
    }
}
