//! Dense linear algebra helpers on top of `nalgebra`.

use rand::Rng;

use crate::error::{Error, Result};

pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;

pub fn all_finite(v: &Vector) -> bool {
    v.iter().all(|c| c.is_finite())
}

/// Standard complex structure on `R^{2n}` in the layout `(x_1..x_n, y_1..y_n)`:
/// `J(x, y) = (-y, x)`.
pub fn j_matrix(dim: usize) -> Matrix {
    let n = dim / 2;
    let mut j = Matrix::zeros(dim, dim);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// Orthonormal basis of the hyperplane orthogonal to `normal`, as the columns
/// of a `dim x (dim - 1)` matrix.
///
/// Built from the Householder reflection that swaps `normal` with the
/// coordinate axis it is least aligned against, so the frame is smooth in
/// `normal` away from the switching set.
pub fn tangent_frame(normal: &Vector) -> Matrix {
    let dim = normal.len();
    let n = normal / normal.norm();
    // reflect e_k onto n, with k the coordinate of largest |n_k|
    let k = n.iamax();
    let sign = if n[k] >= 0.0 { 1.0 } else { -1.0 };
    let mut w = n.clone() * sign;
    w[k] -= 1.0;
    let wn = w.norm();
    let householder = if wn < 1e-14 {
        Matrix::identity(dim, dim)
    } else {
        let w = w / wn;
        Matrix::identity(dim, dim) - (&w * w.transpose()) * 2.0
    };
    let mut frame = Matrix::zeros(dim, dim - 1);
    let mut col = 0;
    for c in 0..dim {
        if c == k {
            continue;
        }
        frame.set_column(col, &householder.column(c));
        col += 1;
    }
    frame
}

/// `max |L^T J L - J|` entrywise; zero exactly for symplectic `L`.
pub fn symplectic_defect(l: &Matrix) -> f64 {
    let j = j_matrix(l.nrows());
    (l.transpose() * &j * l - j).amax()
}

/// Cayley transform `(I - A/2)^{-1} (I + A/2)` of a Hamiltonian matrix `A = J S`.
///
/// The result is symplectic to rounding whenever `I - A/2` is invertible.
pub fn cayley_symplectic(symmetric: &Matrix) -> Result<Matrix> {
    let dim = symmetric.nrows();
    if dim % 2 != 0 || symmetric.ncols() != dim {
        return Err(Error::invalid("Cayley generator must be square of even size"));
    }
    let a = j_matrix(dim) * symmetric;
    let id = Matrix::identity(dim, dim);
    let lhs = &id - &a * 0.5;
    let rhs = &id + &a * 0.5;
    lhs.lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularPoint("I - A/2 is singular".into()))
}

/// Random linear symplectomorphism of `R^{dim}` with generator entries of size `scale`.
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> Result<Matrix> {
    let g = Matrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0) * scale);
    let s = (&g + g.transpose()) * 0.5;
    cayley_symplectic(&s)
}

/// Solve `a x = b`, failing on a (numerically) singular matrix.
pub fn solve(a: Matrix, b: &Vector) -> Option<Vector> {
    a.lu().solve(b)
}
