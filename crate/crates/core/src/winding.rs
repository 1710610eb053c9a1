//! Spectral winding number of θ ↦ det(W_N(θ + iε) − z) for z on the unit
//! circle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::linalg::{log_det, wrap_angle};
use crate::spectral::SpectrumResult;
use crate::walk::{build_walk, Boundary};
use crate::WalkParams;

/// Default number of equispaced θ samples.
pub const DEFAULT_M_THETA: usize = 2048;
/// Largest |residual| for which the rounded value is trusted.
pub const RESIDUAL_TRUST: f64 = 0.1;
/// Minimum angular width of a spectral gap, in radians.
pub const MIN_GAP_WIDTH: f64 = 1e-3;

const MAX_REFINE: u32 = 4;
const PIVOT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingResult {
    pub value: i64,
    pub raw: f64,
    /// |raw − value|
    pub residual: f64,
    pub m_theta: usize,
    pub n_cells: usize,
    pub z: Complex64,
    pub eps: f64,
}

impl WindingResult {
    pub fn resolved(&self) -> bool {
        self.residual < RESIDUAL_TRUST
    }
}

/// Phase of det(W_N(θ + iε) − z) from the LU pivots.
fn det_phase(z: Complex64, params: &WalkParams, n: usize, theta: f64) -> Result<f64> {
    let p = params.clone().with_theta(theta);
    let mut m = build_walk(&p, n, Boundary::Periodic)?.matrix;
    for i in 0..2 * n {
        m[(i, i)] -= z;
    }
    let ld = log_det(m);
    if !(ld.min_pivot >= PIVOT_FLOOR * ld.max_pivot) {
        return Err(Error::NearSpectrum { z_re: z.re, z_im: z.im, pivot: ld.min_pivot / ld.max_pivot });
    }
    Ok(ld.arg)
}

/// Argument increment over [a, b], bisecting while a single step exceeds π/2.
fn increment(
    z: Complex64,
    params: &WalkParams,
    n: usize,
    (a, phase_a): (f64, f64),
    (b, phase_b): (f64, f64),
    depth: u32,
) -> Result<f64> {
    let d = wrap_angle(phase_b - phase_a);
    if d.abs() <= PI / 2.0 {
        return Ok(d);
    }
    if depth == MAX_REFINE {
        return Err(Error::InsufficientResolution { theta: a });
    }
    let mid = 0.5 * (a + b);
    let phase_mid = det_phase(z, params, n, mid)?;
    Ok(increment(z, params, n, (a, phase_a), (mid, phase_mid), depth + 1)?
        + increment(z, params, n, (mid, phase_mid), (b, phase_b), depth + 1)?)
}

/// ν_ε(z) on a ring of `n` cells (a convergent denominator of Φ) with
/// `m_theta` samples of θ ∈ [0, 1).
pub fn winding_number(
    z: Complex64,
    eps: f64,
    params: &WalkParams,
    n: usize,
    m_theta: usize,
) -> Result<WindingResult> {
    if m_theta < 4 {
        return domain(format!("m_theta must be at least 4, got {m_theta}"));
    }
    if params.freq.convergent_with_denominator(n as u64).is_none() {
        return domain(format!("N = {n} is not a convergent denominator of phi = {}", params.phi()));
    }
    let p = params.clone().with_eps(eps);
    let grid: Vec<f64> = (0..=m_theta).map(|j| j as f64 / m_theta as f64).collect();
    // θ = 1 repeats θ = 0 up to rounding of the phase argument
    let mut phases: Vec<f64> = grid[..m_theta]
        .par_iter()
        .map(|&t| det_phase(z, &p, n, t))
        .collect::<Result<_>>()?;
    phases.push(phases[0]);
    let mut total = 0.0;
    for j in 0..m_theta {
        total += increment(z, &p, n, (grid[j], phases[j]), (grid[j + 1], phases[j + 1]), 0)?;
    }
    let raw = total / (2.0 * PI * n as f64);
    let value = raw.round() as i64;
    let residual = (raw - value as f64).abs();
    if residual >= RESIDUAL_TRUST {
        log::warn!("winding at z = {z}, eps = {eps} is unresolved (raw {raw:.4})");
    }
    Ok(WindingResult { value, raw, residual, m_theta, n_cells: n, z, eps })
}

/// Midpoints of the `count` widest angular gaps between the on-circle
/// eigenvalues of a reference spectrum.
pub fn gap_points(spec: &SpectrumResult, count: usize) -> Vec<Complex64> {
    let on: Vec<Complex64> = spec
        .eigenvalues
        .iter()
        .zip(&spec.on_circle)
        .filter_map(|(z, &on)| on.then_some(*z))
        .collect();
    widest_gaps(&on, count)
}

pub(crate) fn widest_gaps(points: &[Complex64], count: usize) -> Vec<Complex64> {
    let mut args: Vec<f64> = points.iter().map(|z| z.arg().rem_euclid(2.0 * PI)).collect();
    args.sort_by(f64::total_cmp);
    let mut gaps: Vec<(f64, f64)> = Vec::new(); // (width, midpoint)
    match args.len() {
        0 => gaps.push((2.0 * PI, 0.0)),
        k => {
            for j in 0..k {
                let (a, b) = if j + 1 < k { (args[j], args[j + 1]) } else { (args[j], args[0] + 2.0 * PI) };
                gaps.push((b - a, 0.5 * (a + b)));
            }
        }
    }
    gaps.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.total_cmp(&y.1)));
    let out: Vec<Complex64> = gaps
        .iter()
        .filter(|g| g.0 > MIN_GAP_WIDTH)
        .take(count)
        .map(|g| Complex64::from_polar(1.0, g.1))
        .collect();
    if out.len() < count {
        log::warn!("requested {count} spectral gaps wider than {MIN_GAP_WIDTH} rad, found {}", out.len());
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct WindingProfile {
    pub points: Vec<WindingResult>,
    /// midpoint between the last ε with value 0 and the first following
    /// ε with nonzero value
    pub jump: Option<f64>,
}

pub fn winding_profile(
    z: Complex64,
    params: &WalkParams,
    n: usize,
    eps_grid: &[f64],
    m_theta: usize,
) -> Result<WindingProfile> {
    let points: Vec<WindingResult> = eps_grid
        .iter()
        .map(|&e| winding_number(z, e, params, n, m_theta))
        .collect::<Result<_>>()?;
    let jump = detect_jump(&points);
    Ok(WindingProfile { points, jump })
}

fn detect_jump(points: &[WindingResult]) -> Option<f64> {
    points
        .windows(2)
        .find(|w| w[0].value == 0 && w[1].value != 0)
        .map(|w| 0.5 * (w[0].eps + w[1].eps))
}
