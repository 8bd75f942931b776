#![allow(dead_code)]

use osb_core::bodies::{self, BodySpec};
use osb_core::{ConvexBody, Matrix, Vector};

pub fn v(c: &[f64]) -> Vector {
    Vector::from_column_slice(c)
}

pub fn ball(dim: usize) -> ConvexBody {
    bodies::make_ball(dim).unwrap()
}

/// `{x^2/4 + 4y^2 <= 1}` as the image of the disk under `diag(2, 1/2)`.
pub fn ellipse() -> ConvexBody {
    let l = Matrix::from_diagonal(&v(&[2.0, 0.5]));
    bodies::make_linear_image(&ball(2), l).unwrap().body
}

pub fn interval_spec(half_width: f64) -> BodySpec {
    BodySpec::LinearImage {
        inner: Box::new(BodySpec::Ball { dim: 1 }),
        matrix: vec![vec![half_width]],
    }
}

/// The same ellipse as the Lagrangian sum of `[-2, 2]`.
pub fn ellipse_spec() -> BodySpec {
    BodySpec::LagrangianSum {
        k: Box::new(interval_spec(2.0)),
    }
}

pub fn lagrangian_l4() -> ConvexBody {
    bodies::make_lagrangian_sum(&bodies::make_lp_ball(4.0, 2).unwrap()).unwrap()
}

pub fn ellipse_sum() -> ConvexBody {
    bodies::make_symplectic_l2_sum(&ellipse(), &ellipse()).unwrap()
}

pub fn patched_r2() -> ConvexBody {
    bodies::make_patched_selfpolar(1, 0.2, 0.03, 7).unwrap()
}

pub fn patched_r4() -> ConvexBody {
    bodies::make_patched_selfpolar(2, 0.1, 0.02, 7).unwrap()
}

pub fn assert_close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
}

pub fn assert_vec_close(a: &Vector, b: &Vector, tol: f64) {
    assert!((a - b).amax() <= tol, "{a} vs {b} (tol {tol})");
}
