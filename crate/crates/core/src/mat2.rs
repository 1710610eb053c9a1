//! Fixed-size 2×2 complex matrices used for coins, transfer matrices and
//! the cellwise symmetry blocks.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Row-major 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn sigma1() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn sigma2() -> Self {
        Self::new(ZERO, -I, I, ZERO)
    }

    pub fn sigma3() -> Self {
        Self::new(ONE, ZERO, ZERO, -ONE)
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }

    #[inline]
    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.0[0][0], self.0[1][0], self.0[0][1], self.0[1][1])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::new(f(self.0[0][0]), f(self.0[0][1]), f(self.0[1][0]), f(self.0[1][1]))
    }

    /// Inverse using a caller-supplied determinant (e.g. an analytic one).
    #[inline]
    pub fn inverse_with_det(&self, det: Complex64) -> Self {
        let r = det.inv();
        Self::new(self.0[1][1] * r, -self.0[0][1] * r, -self.0[1][0] * r, self.0[0][0] * r)
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            None
        } else {
            Some(self.inverse_with_det(d))
        }
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    /// Spectral norm, from the closed form of the largest singular value.
    pub fn op_norm(&self) -> f64 {
        let f = self.frobenius_sq();
        let d = self.det().norm();
        let disc = (f * f - 4.0 * d * d).max(0.0);
        ((f + disc.sqrt()) / 2.0).sqrt()
    }

    /// Principal square root. `None` if an eigenvalue lies on the closed
    /// negative real axis (principal root undefined) or the matrix is a
    /// nontrivial Jordan block with zero eigenvalue.
    pub fn principal_sqrt(&self) -> Option<Self> {
        let tr = self.trace();
        let det = self.det();
        let disc = (tr * tr / 4.0 - det).sqrt();
        let mu1 = tr / 2.0 + disc;
        let mu2 = tr / 2.0 - disc;
        let on_cut = |mu: Complex64| mu.re <= 0.0 && mu.im.abs() <= 1e-14 * (1.0 + mu.norm());
        if on_cut(mu1) || on_cut(mu2) {
            return None;
        }
        // sqrt(A) = (A + r1 r2 I) / (r1 + r2), r_i the principal roots of
        // the eigenvalues (Cayley-Hamilton).
        let (r1, r2) = (mu1.sqrt(), mu2.sqrt());
        let s = r1 * r2;
        let t = r1 + r2;
        if t.norm() < 1e-300 {
            return None;
        }
        Some((*self + Self::identity().scale(s)).scale(t.inv()))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][0] - b[1][0], a[1][1] - b[1][1])
    }
}
