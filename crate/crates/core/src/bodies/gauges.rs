//! Gauge implementations behind the body factories.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::convex::{
    gradient_of, hessian_of, support_numeric_of, support_of, Gauge, Smoothness, SupportPoint, ToleranceConfig,
    HESSIAN_STEP,
};
use crate::error::Error;
use crate::linalg::{Matrix, Vector};

const FD_STEP: f64 = ToleranceConfig::ANALYTIC.fd_step;

/// Euclidean unit ball.
#[derive(Debug, Clone)]
pub struct Ball {
    pub dim: usize,
}

impl Gauge for Ball {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, v: &Vector) -> f64 {
        v.norm()
    }

    fn gradient(&self, v: &Vector) -> Option<Vector> {
        Some(v / v.norm())
    }

    fn hessian(&self, v: &Vector) -> Option<Matrix> {
        let r = v.norm();
        let u = v / r;
        Some((Matrix::identity(self.dim, self.dim) - &u * u.transpose()) / r)
    }

    fn support(&self, u: &Vector) -> Option<SupportPoint> {
        let r = u.norm();
        Some(SupportPoint {
            value: r,
            point: u / r,
        })
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Cinf
    }

    fn quadratic_square(&self) -> bool {
        true
    }

    fn polar(&self) -> Option<Arc<dyn Gauge>> {
        Some(Arc::new(self.clone()))
    }
}

/// Unit ball of the `l_p` norm, `1 < p < ∞`.
#[derive(Debug, Clone)]
pub struct LpBall {
    pub p: f64,
    pub dim: usize,
}

impl LpBall {
    /// Conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn dual_exponent(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    fn norm(p: f64, v: &Vector) -> f64 {
        let m = v.amax();
        if m == 0.0 {
            return 0.0;
        }
        let s: f64 = v.iter().map(|c| libm::pow(c.abs() / m, p)).sum();
        m * libm::pow(s, 1.0 / p)
    }

    fn norm_gradient(p: f64, v: &Vector) -> Vector {
        let g = Self::norm(p, v);
        v.map(|c| libm::copysign(libm::pow(c.abs() / g, p - 1.0), c))
    }
}

impl Gauge for LpBall {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, v: &Vector) -> f64 {
        Self::norm(self.p, v)
    }

    fn gradient(&self, v: &Vector) -> Option<Vector> {
        Some(Self::norm_gradient(self.p, v))
    }

    fn hessian(&self, v: &Vector) -> Option<Matrix> {
        let p = self.p;
        if p < 2.0 && v.iter().any(|c| *c == 0.0) {
            return None;
        }
        let g = Self::norm(p, v);
        let grad = Self::norm_gradient(p, v);
        let mut h = -(&grad * grad.transpose());
        for i in 0..self.dim {
            h[(i, i)] += libm::pow(v[i].abs() / g, p - 2.0);
        }
        Some(h * ((p - 1.0) / g))
    }

    fn support(&self, u: &Vector) -> Option<SupportPoint> {
        let q = self.dual_exponent();
        Some(SupportPoint {
            value: Self::norm(q, u),
            point: Self::norm_gradient(q, u),
        })
    }

    fn smoothness(&self) -> Smoothness {
        let p = self.p;
        if p >= 2.0 && p == libm::round(p) && (p as u64) % 2 == 0 {
            Smoothness::Cinf
        } else if p >= 2.0 {
            Smoothness::C2
        } else {
            Smoothness::C1
        }
    }

    fn quadratic_square(&self) -> bool {
        self.p == 2.0 || self.dim == 1
    }

    fn polar(&self) -> Option<Arc<dyn Gauge>> {
        Some(Arc::new(LpBall {
            p: self.dual_exponent(),
            dim: self.dim,
        }))
    }
}

/// `l_2`-sum `A ⊕_2 B = {(a, b) : ‖a‖_A^2 + ‖b‖_B^2 <= 1}` on concatenated coordinates.
#[derive(Debug, Clone)]
pub struct L2Sum {
    pub left: Arc<dyn Gauge>,
    pub right: Arc<dyn Gauge>,
}

impl L2Sum {
    pub fn new(left: Arc<dyn Gauge>, right: Arc<dyn Gauge>) -> Self {
        Self { left, right }
    }

    fn split(&self, v: &Vector) -> (Vector, Vector) {
        let k = self.left.dim();
        (v.rows(0, k).into_owned(), v.rows(k, self.right.dim()).into_owned())
    }

    /// `Hess(G^2)/2 = ∇G ∇G^T + G Hess G` of one block.
    fn half_square_hessian(g: &dyn Gauge, v: &Vector) -> Option<Matrix> {
        let n = g.dim();
        if v.norm() == 0.0 {
            if !g.quadratic_square() {
                return None;
            }
            // a quadratic form has the same Hessian everywhere
            let mut e = Vector::zeros(n);
            e[0] = 1.0;
            return Self::half_square_hessian(g, &e);
        }
        let val = g.value(v);
        let grad = gradient_of(g, v, FD_STEP);
        let hess = hessian_of(g, v, HESSIAN_STEP, FD_STEP);
        Some(&grad * grad.transpose() + hess * val)
    }

    fn block_support(g: &dyn Gauge, u: &Vector) -> Option<SupportPoint> {
        if u.norm() == 0.0 {
            return Some(SupportPoint {
                value: 0.0,
                point: Vector::zeros(u.len()),
            });
        }
        support_of(g, u, &ToleranceConfig::ANALYTIC).ok()
    }
}

impl Gauge for L2Sum {
    fn dim(&self) -> usize {
        self.left.dim() + self.right.dim()
    }

    fn value(&self, v: &Vector) -> f64 {
        let (a, b) = self.split(v);
        libm::hypot(self.left.value(&a), self.right.value(&b))
    }

    fn gradient(&self, v: &Vector) -> Option<Vector> {
        let (a, b) = self.split(v);
        let ga = self.left.value(&a);
        let gb = self.right.value(&b);
        let g = libm::hypot(ga, gb);
        let block = |gauge: &dyn Gauge, w: &Vector, val: f64| {
            if w.norm() == 0.0 {
                Vector::zeros(w.len())
            } else {
                gradient_of(gauge, w, FD_STEP) * (val / g)
            }
        };
        let mut out = Vector::zeros(self.dim());
        out.rows_mut(0, a.len()).copy_from(&block(self.left.as_ref(), &a, ga));
        out.rows_mut(a.len(), b.len()).copy_from(&block(self.right.as_ref(), &b, gb));
        Some(out)
    }

    fn hessian(&self, v: &Vector) -> Option<Matrix> {
        let (a, b) = self.split(v);
        let ma = Self::half_square_hessian(self.left.as_ref(), &a)?;
        let mb = Self::half_square_hessian(self.right.as_ref(), &b)?;
        let g = self.value(v);
        let grad = self.gradient(v)?;
        let mut h = Matrix::zeros(self.dim(), self.dim());
        h.view_mut((0, 0), (a.len(), a.len())).copy_from(&ma);
        h.view_mut((a.len(), a.len()), (b.len(), b.len())).copy_from(&mb);
        Some((h - &grad * grad.transpose()) / g)
    }

    fn support(&self, u: &Vector) -> Option<SupportPoint> {
        // (A ⊕_2 B)° = A° ⊕_2 B°
        let (a, b) = self.split(u);
        let sa = Self::block_support(self.left.as_ref(), &a)?;
        let sb = Self::block_support(self.right.as_ref(), &b)?;
        let h = libm::hypot(sa.value, sb.value);
        let mut point = Vector::zeros(self.dim());
        point.rows_mut(0, a.len()).copy_from(&(sa.point * (sa.value / h)));
        point.rows_mut(a.len(), b.len()).copy_from(&(sb.point * (sb.value / h)));
        Some(SupportPoint { value: h, point })
    }

    fn smoothness(&self) -> Smoothness {
        let s = self.left.smoothness().min(self.right.smoothness());
        if self.left.quadratic_square() && self.right.quadratic_square() {
            s
        } else {
            s.min(Smoothness::C1)
        }
    }

    fn quadratic_square(&self) -> bool {
        self.left.quadratic_square() && self.right.quadratic_square()
    }

    fn polar(&self) -> Option<Arc<dyn Gauge>> {
        Some(Arc::new(L2Sum::new(self.left.polar()?, self.right.polar()?)))
    }

    fn is_numeric(&self) -> bool {
        self.left.is_numeric() || self.right.is_numeric()
    }
}

/// Symplectic `l_2`-sum of `X ⊂ R^{2n}` and `Y ⊂ R^{2m}`, stored as an `l_2`-sum
/// on concatenated coordinates plus the permutation into the joint standard
/// layout `(x_1..x_{n+m}, y_1..y_{n+m})`.
#[derive(Debug, Clone)]
pub struct SymplecticSum {
    inner: L2Sum,
    /// `perm[k]` is the joint coordinate holding concatenated coordinate `k`.
    perm: Vec<usize>,
}

impl SymplecticSum {
    pub fn new(left: Arc<dyn Gauge>, right: Arc<dyn Gauge>) -> Self {
        let n = left.dim() / 2;
        let m = right.dim() / 2;
        let total = n + m;
        let mut perm = Vec::with_capacity(2 * total);
        perm.extend(0..n);
        perm.extend(total..total + n);
        perm.extend(n..total);
        perm.extend(total + n..2 * total);
        Self {
            inner: L2Sum::new(left, right),
            perm,
        }
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    fn gather(&self, v: &Vector) -> Vector {
        Vector::from_iterator(v.len(), self.perm.iter().map(|&j| v[j]))
    }

    fn scatter(&self, w: &Vector) -> Vector {
        let mut v = Vector::zeros(w.len());
        for (k, &j) in self.perm.iter().enumerate() {
            v[j] = w[k];
        }
        v
    }
}

impl Gauge for SymplecticSum {
    fn dim(&self) -> usize {
        self.perm.len()
    }

    fn value(&self, v: &Vector) -> f64 {
        self.inner.value(&self.gather(v))
    }

    fn gradient(&self, v: &Vector) -> Option<Vector> {
        Some(self.scatter(&self.inner.gradient(&self.gather(v))?))
    }

    fn hessian(&self, v: &Vector) -> Option<Matrix> {
        let hw = self.inner.hessian(&self.gather(v))?;
        let dim = self.dim();
        let mut h = Matrix::zeros(dim, dim);
        for (a, &i) in self.perm.iter().enumerate() {
            for (b, &j) in self.perm.iter().enumerate() {
                h[(i, j)] = hw[(a, b)];
            }
        }
        Some(h)
    }

    fn support(&self, u: &Vector) -> Option<SupportPoint> {
        let sp = self.inner.support(&self.gather(u))?;
        Some(SupportPoint {
            value: sp.value,
            point: self.scatter(&sp.point),
        })
    }

    fn smoothness(&self) -> Smoothness {
        self.inner.smoothness()
    }

    fn quadratic_square(&self) -> bool {
        self.inner.quadratic_square()
    }

    fn polar(&self) -> Option<Arc<dyn Gauge>> {
        Some(Arc::new(SymplecticSum::new(
            self.inner.left.polar()?,
            self.inner.right.polar()?,
        )))
    }

    fn is_numeric(&self) -> bool {
        self.inner.is_numeric()
    }
}

/// Image `L X` of a body under an invertible linear map: `G(v) = G_X(L^{-1} v)`.
#[derive(Debug, Clone)]
pub struct LinearImage {
    inner: Arc<dyn Gauge>,
    map: Matrix,
    inverse: Matrix,
    inverse_t: Matrix,
}

impl LinearImage {
    pub fn new(inner: Arc<dyn Gauge>, map: Matrix) -> Result<Self, Error> {
        let n = inner.dim();
        if map.nrows() != n || map.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: map.nrows(),
            });
        }
        if !map.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let inverse = map
            .clone()
            .try_inverse()
            .filter(|inv| inv.iter().all(|c| c.is_finite()))
            .ok_or_else(|| Error::SingularPoint("linear map is singular".into()))?;
        let inverse_t = inverse.transpose();
        Ok(Self {
            inner,
            map,
            inverse,
            inverse_t,
        })
    }

    pub fn map(&self) -> &Matrix {
        &self.map
    }
}

impl Gauge for LinearImage {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, v: &Vector) -> f64 {
        self.inner.value(&(&self.inverse * v))
    }

    fn gradient(&self, v: &Vector) -> Option<Vector> {
        let w = &self.inverse * v;
        Some(&self.inverse_t * gradient_of(self.inner.as_ref(), &w, FD_STEP))
    }

    fn hessian(&self, v: &Vector) -> Option<Matrix> {
        let w = &self.inverse * v;
        let h = hessian_of(self.inner.as_ref(), &w, HESSIAN_STEP, FD_STEP);
        Some(&self.inverse_t * h * &self.inverse)
    }

    fn support(&self, u: &Vector) -> Option<SupportPoint> {
        let sp = support_of(self.inner.as_ref(), &(self.map.transpose() * u), &ToleranceConfig::ANALYTIC).ok()?;
        Some(SupportPoint {
            value: sp.value,
            point: &self.map * sp.point,
        })
    }

    fn smoothness(&self) -> Smoothness {
        self.inner.smoothness()
    }

    fn quadratic_square(&self) -> bool {
        self.inner.quadratic_square()
    }

    fn polar(&self) -> Option<Arc<dyn Gauge>> {
        let p = self.inner.polar()?;
        LinearImage::new(p, self.inverse_t.clone())
            .ok()
            .map(|l| Arc::new(l) as Arc<dyn Gauge>)
    }

    fn is_numeric(&self) -> bool {
        self.inner.is_numeric()
    }
}

/// Polar body whose gauge is the numerically maximized support function of `inner`.
#[derive(Debug, Clone)]
pub struct NumericPolar {
    inner: Arc<dyn Gauge>,
    tol: ToleranceConfig,
}

impl NumericPolar {
    pub fn new(inner: Arc<dyn Gauge>) -> Self {
        Self {
            inner,
            tol: ToleranceConfig::ANALYTIC,
        }
    }

    fn solve(&self, v: &Vector) -> SupportPoint {
        match support_numeric_of(self.inner.as_ref(), v, &self.tol) {
            Ok(sp) => sp,
            // keep the best iterate; callers see the residual through the checks
            Err(_) => {
                let a = crate::convex::support_ascent(self.inner.as_ref(), v, &(v / v.norm()), &self.tol);
                SupportPoint {
                    value: a.value,
                    point: &a.direction / self.inner.value(&a.direction),
                }
            }
        }
    }
}

impl Gauge for NumericPolar {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, v: &Vector) -> f64 {
        if v.norm() == 0.0 {
            return 0.0;
        }
        self.solve(v).value
    }

    fn gradient(&self, v: &Vector) -> Option<Vector> {
        // ∇h_K(v) is the maximizer
        Some(self.solve(v).point)
    }

    fn support(&self, u: &Vector) -> Option<SupportPoint> {
        // bipolar: h_{K°} = G_K
        Some(SupportPoint {
            value: self.inner.value(u),
            point: gradient_of(self.inner.as_ref(), u, FD_STEP),
        })
    }

    fn smoothness(&self) -> Smoothness {
        self.inner.smoothness().downgrade()
    }

    fn polar(&self) -> Option<Arc<dyn Gauge>> {
        Some(self.inner.clone())
    }

    fn is_numeric(&self) -> bool {
        true
    }
}
