//! Thin wrappers over the dense kernels of `faer`.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::linalg::lu::partial_pivoting::factor as lu;
use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, MatRef, Par};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues and, optionally, right eigenvectors (columns, unnormalized)
/// of a general complex matrix.
pub fn eig(a: MatRef<'_, Complex64>, want_vectors: bool) -> Result<(Vec<Complex64>, Option<Mat<Complex64>>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| Mat::zeros(0, 0))));
    }
    let right = if want_vectors { ComputeEigenvectors::Yes } else { ComputeEigenvectors::No };
    let mut s = faer::diag::Diag::<Complex64>::zeros(n);
    let mut u = want_vectors.then(|| Mat::<Complex64>::zeros(n, n));
    let req = evd::evd_scratch::<Complex64>(n, ComputeEigenvectors::No, right, Par::Seq, Default::default());
    let mut buf = MemBuffer::new(req);
    evd::evd_cplx(
        a,
        s.as_mut(),
        None,
        u.as_mut().map(|u| u.as_mut()),
        Par::Seq,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|e| Error::NoConvergence(format!("complex Schur iteration failed on a {n}x{n} matrix: {e:?}")))?;
    let vals: Vec<Complex64> = (0..n).map(|i| s[i]).collect();
    if vals.iter().any(|z| !z.is_finite()) {
        return Err(Error::NoConvergence(format!("non-finite eigenvalue in a {n}x{n} matrix")));
    }
    Ok((vals, u))
}

/// Determinant of a square matrix in polar form, from a partial-pivoting LU.
#[derive(Debug, Clone, Copy)]
pub struct LogDet {
    /// ln|det|
    pub log_abs: f64,
    /// arg(det), accumulated from pivot phases and permutation sign, in (−π, π]
    pub arg: f64,
    pub min_pivot: f64,
    pub max_pivot: f64,
}

pub fn log_det(mut a: Mat<Complex64>) -> LogDet {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut perm = vec![0usize; n];
    let mut perm_inv = vec![0usize; n];
    let req = lu::lu_in_place_scratch::<usize, Complex64>(n, n, Par::Seq, Default::default());
    let mut buf = MemBuffer::new(req);
    let (info, _) = lu::lu_in_place(
        a.as_mut(),
        &mut perm,
        &mut perm_inv,
        Par::Seq,
        MemStack::new(&mut buf),
        Default::default(),
    );
    let mut log_abs = 0.0;
    let mut arg = if info.transposition_count % 2 == 1 { std::f64::consts::PI } else { 0.0 };
    let (mut min_pivot, mut max_pivot) = (f64::INFINITY, 0.0f64);
    for i in 0..n {
        let u = a[(i, i)];
        let m = u.norm();
        min_pivot = min_pivot.min(m);
        max_pivot = max_pivot.max(m);
        log_abs += m.ln();
        arg += u.arg();
    }
    LogDet { log_abs, arg: wrap_angle(arg), min_pivot, max_pivot }
}

/// Folds an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    let mut s = a
        .singular_values()
        .map_err(|e| Error::NoConvergence(format!("SVD failed: {e:?}")))?;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Spectral (operator 2-) norm.
pub fn op_norm(a: MatRef<'_, Complex64>) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Inverse via partial-pivoting LU, refusing matrices with 2-norm condition
/// number above `max_condition`.
pub fn inverse_checked(a: MatRef<'_, Complex64>, max_condition: f64) -> Result<Mat<Complex64>> {
    let s = singular_values(a)?;
    let (hi, lo) = (s[0], *s.last().unwrap());
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= max_condition) {
        return Err(Error::IllConditioned { condition });
    }
    Ok(a.partial_piv_lu().inverse())
}

/// Largest entrywise modulus of a − b.
pub fn max_abs_diff(a: MatRef<'_, Complex64>, b: MatRef<'_, Complex64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

pub fn identity(n: usize) -> Mat<Complex64> {
    Mat::from_fn(n, n, |i, j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
}

/// Adjoint (conjugate transpose).
pub fn adjoint(a: MatRef<'_, Complex64>) -> Mat<Complex64> {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}

/// Entrywise complex conjugate.
pub fn conj(a: MatRef<'_, Complex64>) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].conj())
}

pub fn mat_vec(a: MatRef<'_, Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.ncols(), x.len());
    let mut y = vec![Complex64::new(0.0, 0.0); a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += a[(i, j)] * xj;
        }
    }
    y
}
