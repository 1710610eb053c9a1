//! Eigendecomposition of ring operators and spectral diagnostics.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::cocycle::{lyapunov_numeric, Direction};
use crate::error::{domain, Error, Result};
use crate::linalg::{self, adjoint, inverse_checked, log_det};
use crate::params::{coin_at, WalkParams};
use crate::walk::{
    build_realified_walk, build_walk, symmetry_operators, timeframe, Boundary, OperatorForm, RingOperator,
};

/// Default radial tolerance for "on the unit circle".
pub const TOL_CIRCLE: f64 = 1e-6;
/// Radial tolerance for claims that every eigenvalue has left the circle.
pub const TOL_CIRCLE_LOOSE: f64 = 1e-4;
/// Largest operator dimension accepted by [`eigendecompose`].
pub const MAX_DIM: usize = 4096;

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// sorted by (arg, |z|)
    pub eigenvalues: Vec<Complex64>,
    /// unit-norm right eigenvectors, column j for eigenvalue j
    pub eigenvectors: Option<Mat<Complex64>>,
    pub fractal_dims: Option<Vec<f64>>,
    pub on_circle: Vec<bool>,
    pub params: WalkParams,
    pub n_cells: usize,
    pub tol_circle: f64,
    /// max_j ‖W v_j − z_j v_j‖ / ‖W‖ (only when eigenvectors were computed)
    pub max_residual: Option<f64>,
}

fn spectral_order(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.arg().total_cmp(&b.arg()).then(a.norm().total_cmp(&b.norm()))
}

/// Sorts a list of eigenvalues by (arg, |z|).
pub fn sort_spectrum(v: &mut [Complex64]) {
    v.sort_by(spectral_order);
}

pub fn eigendecompose(op: &RingOperator, want_vectors: bool) -> Result<SpectrumResult> {
    let dim = op.dim();
    if dim > MAX_DIM {
        return domain(format!("operator dimension {dim} exceeds {MAX_DIM}"));
    }
    let (vals, vecs) = linalg::eig(op.matrix.as_ref(), want_vectors)?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| spectral_order(&vals[i], &vals[j]));
    let eigenvalues: Vec<Complex64> = order.iter().map(|&i| vals[i]).collect();
    let on_circle = eigenvalues.iter().map(|z| (z.norm() - 1.0).abs() <= TOL_CIRCLE).collect();

    let (eigenvectors, fractal_dims, max_residual) = match vecs {
        None => (None, None, None),
        Some(v) => {
            let mut out = Mat::<Complex64>::zeros(dim, dim);
            let mut dims = Vec::with_capacity(dim);
            for (k, &j) in order.iter().enumerate() {
                let nrm = (0..dim).map(|i| v[(i, j)].norm_sqr()).sum::<f64>().sqrt();
                if !(nrm > 0.0) {
                    return Err(Error::NoConvergence(format!("zero eigenvector for eigenvalue {}", vals[j])));
                }
                for i in 0..dim {
                    out[(i, k)] = v[(i, j)] / nrm;
                }
                let col: Vec<Complex64> = (0..dim).map(|i| out[(i, k)]).collect();
                dims.push(fractal_dimension(&col)?);
            }
            let wv = &op.matrix * &out;
            let w_norm = linalg::op_norm(op.matrix.as_ref())?;
            let mut res = 0.0f64;
            for (k, z) in eigenvalues.iter().enumerate() {
                let r = (0..dim).map(|i| (wv[(i, k)] - out[(i, k)] * z).norm_sqr()).sum::<f64>().sqrt();
                res = res.max(r / w_norm);
            }
            (Some(out), Some(dims), Some(res))
        }
    };
    Ok(SpectrumResult {
        eigenvalues,
        eigenvectors,
        fractal_dims,
        on_circle,
        params: op.params.clone(),
        n_cells: op.n_cells,
        tol_circle: TOL_CIRCLE,
        max_residual,
    })
}

/// IPR-based fractal dimension Γ = −ln(Σp²)/ln(dim), clipped to [0, 1].
pub fn fractal_dimension(v: &[Complex64]) -> Result<f64> {
    let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if !(total > 0.0) {
        return domain("fractal dimension of a zero vector");
    }
    if v.len() < 2 {
        return Ok(0.0);
    }
    let ipr: f64 = v.iter().map(|z| (z.norm_sqr() / total).powi(2)).sum();
    Ok((-ipr.ln() / (v.len() as f64).ln()).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleCounts {
    pub on_count: usize,
    pub off_count: usize,
    pub max_radial_dev: f64,
}

impl CircleCounts {
    pub fn off_fraction(&self) -> f64 {
        self.off_count as f64 / (self.on_count + self.off_count).max(1) as f64
    }
}

/// Counts eigenvalues with ||z| − 1| ≤ `tol`; also updates the per-eigenvalue
/// flags and tolerance stored in `spec`.
pub fn classify_circle(spec: &mut SpectrumResult, tol: f64) -> CircleCounts {
    spec.tol_circle = tol;
    spec.on_circle = spec.eigenvalues.iter().map(|z| (z.norm() - 1.0).abs() <= tol).collect();
    circle_counts(&spec.eigenvalues, tol)
}

pub fn circle_counts(eigenvalues: &[Complex64], tol: f64) -> CircleCounts {
    let mut c = CircleCounts { on_count: 0, off_count: 0, max_radial_dev: 0.0 };
    for z in eigenvalues {
        let d = (z.norm() - 1.0).abs();
        c.max_radial_dev = c.max_radial_dev.max(d);
        if d <= tol {
            c.on_count += 1;
        } else {
            c.off_count += 1;
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingMode {
    /// z ↔ 1/z̄
    Pseudo,
    /// z ↔ 1/z
    Chiral,
}

/// Greedy matching of off-circle eigenvalues to the partner images; returns
/// the largest match distance (0 if nothing is off the circle).
pub fn pairing_residual(eigenvalues: &[Complex64], tol: f64, mode: PairingMode) -> Result<f64> {
    let off: Vec<Complex64> = eigenvalues.iter().copied().filter(|z| (z.norm() - 1.0).abs() > tol).collect();
    if off.len() % 2 == 1 {
        return Err(Error::Structural(format!("{} eigenvalues off the circle cannot pair up", off.len())));
    }
    let image = |z: Complex64| match mode {
        PairingMode::Pseudo => z.conj().inv(),
        PairingMode::Chiral => z.inv(),
    };
    let mut used = vec![false; off.len()];
    let mut worst = 0.0f64;
    for i in 0..off.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let target = image(off[i]);
        let best = (0..off.len())
            .filter(|&j| !used[j])
            .map(|j| (j, (off[j] - target).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        match best {
            Some((j, d)) => {
                used[j] = true;
                worst = worst.max(d);
            }
            None => return Err(Error::Structural("unmatched off-circle eigenvalue".into())),
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryResiduals {
    /// ‖𝒫W⁻¹𝒫⁻¹ − W†‖
    pub pseudo_unitarity: f64,
    /// ‖(𝒫𝒯)W(𝒫𝒯)⁻¹ − W⁻¹‖
    pub pt: f64,
    /// ‖(𝒫𝒯)W_η(𝒫𝒯)⁻¹ − W_{−η}⁻¹‖ for operators that can be rebuilt at −η
    pub pt_reflected: Option<f64>,
}

/// Largest condition number accepted when inverting ring operators.
const MAX_CONDITION: f64 = 1e12;

/// Operator-norm residuals of the pseudo-unitarity and PT identities. The
/// identities hold for the realified walk and the timeframe (θ = 1/4 gauge).
pub fn symmetry_residuals(op: &RingOperator) -> Result<SymmetryResiduals> {
    let n = op.n_cells;
    let s = symmetry_operators(n);
    let w = &op.matrix;
    let inv = inverse_checked(w.as_ref(), MAX_CONDITION)?;
    let pu = &(&s.parity * &inv) * &s.parity - adjoint(w.as_ref());
    let pt = s.pt_conjugate(w) - &inv;
    let reflected_params = op.params.clone().with_eta(-op.params.eta);
    let reflected = match op.form {
        OperatorForm::Walk => Some(build_walk(&reflected_params, n, op.bc)?),
        OperatorForm::Realified => Some(build_realified_walk(&reflected_params, n, op.bc)?),
        OperatorForm::Timeframe => Some(timeframe(&reflected_params, n)?),
        _ => None,
    };
    let pt_reflected = match reflected {
        Some(r) => {
            let rinv = inverse_checked(r.matrix.as_ref(), MAX_CONDITION)?;
            Some(linalg::op_norm((s.pt_conjugate(w) - &rinv).as_ref())?)
        }
        None => None,
    };
    Ok(SymmetryResiduals {
        pseudo_unitarity: linalg::op_norm(pu.as_ref())?,
        pt: linalg::op_norm(pt.as_ref())?,
        pt_reflected,
    })
}

/// Symmetric Hausdorff distance between two finite point sets. Infinite if
/// exactly one set is empty.
pub fn spectral_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one_sided = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

/// Open-chain dual walk: transposed coin with coupling λ₁ at phase nΦ − iη
/// times the transposed shift with coupling λ₂, wrap bonds removed.
pub fn build_open_dual_walk(params: &WalkParams, n: usize) -> Result<Mat<Complex64>> {
    if n < 2 {
        return domain(format!("chain needs at least 2 cells, got {n}"));
    }
    let (p, exact) = params.for_ring(n)?;
    if !exact {
        log::warn!("N = {n} is not a convergent denominator; using phi_N = {}", p.phi());
    }
    let (l2, l2p) = (p.lambda2(), p.coupling2.lambda_prime());
    let h = Complex64::from_polar((-2.0 * PI * p.eps).exp(), 2.0 * PI * p.theta);
    let hi = Complex64::from_polar((2.0 * PI * p.eps).exp(), -2.0 * PI * p.theta);
    let mut m = Mat::<Complex64>::zeros(2 * n, 2 * n);
    for k in 0..n {
        let c = coin_at(p.coupling1, k as f64 * p.phi(), -p.eta).transpose();
        // row block k of C_k · S^⊤
        let mut shift_rows: Vec<(usize, [Complex64; 2])> = vec![
            (2 * k + 1, [Complex64::from(l2p), Complex64::new(0.0, 0.0)]),
            (2 * k, [Complex64::new(0.0, 0.0), Complex64::from(-l2p)]),
        ];
        if k + 1 < n {
            shift_rows.push((2 * (k + 1), [h * l2, Complex64::new(0.0, 0.0)]));
        }
        if k > 0 {
            shift_rows.push((2 * (k - 1) + 1, [Complex64::new(0.0, 0.0), hi * l2]));
        }
        for (col, s) in shift_rows {
            for i in 0..2 {
                m[(2 * k + i, col)] += c.get(i, 0) * s[0] + c.get(i, 1) * s[1];
            }
        }
    }
    Ok(m)
}

/// (1/2N) ln|det(W♯_open − z)| for the open-chain dual walk, from the LU
/// pivots.
pub fn char_poly_growth(z: Complex64, params: &WalkParams, n: usize) -> Result<f64> {
    let mut m = build_open_dual_walk(params, n)?;
    for i in 0..2 * n {
        m[(i, i)] -= z;
    }
    let ld = log_det(m);
    if ld.min_pivot < 1e-12 * ld.max_pivot {
        return Err(Error::NearSpectrum { z_re: z.re, z_im: z.im, pivot: ld.min_pivot / ld.max_pivot });
    }
    Ok(ld.log_abs / (2 * n) as f64)
}

/// Limit of [`char_poly_growth`]: ½L♯(z) − ½ln|2/(λ₂(1+λ₁′))| + ½ln|z|, with
/// the dual exponent L♯(z) estimated numerically.
pub fn char_poly_prediction(z: Complex64, params: &WalkParams, n_steps: usize, n_phases: usize) -> Result<f64> {
    let mirror = WalkParams {
        coupling1: params.coupling2,
        coupling2: params.coupling1,
        eta: params.eps,
        eps: params.eta,
        ..params.clone()
    };
    let l_sharp = lyapunov_numeric(z.conj().inv(), &mirror, n_steps, n_phases, Direction::Right)?.value;
    let (l2, l1p) = (params.lambda2(), params.coupling1.lambda_prime());
    Ok(0.5 * l_sharp - 0.5 * (2.0 / (l2 * (1.0 + l1p))).ln() + 0.5 * z.norm().ln())
}

/// Convenience: eigenvalues of the walk at `params` on a periodic ring.
pub fn walk_spectrum(params: &WalkParams, n: usize) -> Result<Vec<Complex64>> {
    Ok(eigendecompose(&build_walk(params, n, Boundary::Periodic)?, false)?.eigenvalues)
}
