use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{transfer_parts, SINGULAR_COIN};
use crate::error::{domain, Error, Result};
use crate::mat2::Mat2;
use crate::params::{coin_at, derived_constants, WalkParams};

const TWO_PI: f64 = 2.0 * PI;
/// Steps between max-entry renormalizations of the running product.
const RENORM_EVERY: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

/// Which cocycle is iterated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CocycleKind {
    /// the transfer matrices A_z themselves
    Plain,
    /// A_z multiplied by 2q₂₂/(1+λ₂′)
    Regularized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_steps: usize,
    pub n_phases: usize,
    pub direction: Direction,
    /// phase samples dropped because the orbit hit a vanishing coin entry
    pub skipped: usize,
}

/// Phase sample j of n: equispaced with the fixed offset 1/(2e).
fn phase_sample(j: usize, n: usize) -> f64 {
    (j as f64 / n as f64 + 0.5 / std::f64::consts::E).rem_euclid(1.0)
}

/// Finite-orbit Lyapunov exponent averaged over `n_phases` values of θ.
pub fn lyapunov_numeric(
    z: Complex64,
    params: &WalkParams,
    n_steps: usize,
    n_phases: usize,
    direction: Direction,
) -> Result<LyapunovEstimate> {
    lyapunov_numeric_with(z, params, n_steps, n_phases, direction, CocycleKind::Plain)
}

pub fn lyapunov_numeric_with(
    z: Complex64,
    params: &WalkParams,
    n_steps: usize,
    n_phases: usize,
    direction: Direction,
    kind: CocycleKind,
) -> Result<LyapunovEstimate> {
    if z.norm() == 0.0 || !z.is_finite() {
        return domain(format!("Lyapunov exponent needs finite z != 0, got {z}"));
    }
    if n_steps == 0 || n_phases == 0 {
        return domain("n_steps and n_phases must be positive");
    }
    if params.freq.convergents.last().is_some_and(|c| (c.value() - params.phi()).abs() < 1e-15) {
        log::warn!("phi = {} is rational; orbit averages are periodic", params.phi());
    }
    let samples: Vec<Option<f64>> = (0..n_phases)
        .into_par_iter()
        .map(|j| orbit_exponent(z, params, phase_sample(j, n_phases), n_steps, direction, kind))
        .collect();
    let good: Vec<f64> = samples.iter().flatten().copied().collect();
    let skipped = n_phases - good.len();
    if skipped as f64 > 0.01 * n_phases as f64 {
        return Err(Error::TooManySkipped { skipped, total: n_phases });
    }
    let k = good.len() as f64;
    let mean = good.iter().sum::<f64>() / k;
    let std_error = if good.len() > 1 {
        (good.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt() / k.sqrt()
    } else {
        0.0
    };
    Ok(LyapunovEstimate { value: mean, std_error, n_steps, n_phases, direction, skipped })
}

/// (1/n) ln‖product‖ along one orbit, `None` if a coin entry vanishes.
fn orbit_exponent(
    z: Complex64,
    params: &WalkParams,
    theta: f64,
    n_steps: usize,
    direction: Direction,
    kind: CocycleKind,
) -> Option<f64> {
    let phi = params.phi();
    let reg = 2.0 / (1.0 + params.coupling2.lambda_prime());
    let e4 = (4.0 * PI * params.eta).exp();
    let step = |k: i64| -> Option<Mat2> {
        let q = coin_at(params.coupling2, k as f64 * phi + theta, params.eps);
        let (m, q22) = transfer_parts(params.coupling1, params.eta, &q, z);
        let scale = q.max_abs();
        match (kind, direction) {
            (CocycleKind::Plain, Direction::Right) => {
                (q22.norm() > SINGULAR_COIN * scale).then(|| m.scale(q22.inv()))
            }
            (CocycleKind::Plain, Direction::Left) => {
                // A⁻¹ = q22·adj(m)/det(m), det(A) = e^{4πη} q11/q22
                let q11 = q.get(0, 0);
                (q11.norm() > SINGULAR_COIN * scale && q22.norm() > SINGULAR_COIN * scale)
                    .then(|| m.scale(q22.inv()).inverse_with_det(q11 / q22 * e4))
            }
            (CocycleKind::Regularized, Direction::Right) => Some(m.scale(Complex64::from(reg))),
            (CocycleKind::Regularized, Direction::Left) => {
                let b = m.scale(Complex64::from(reg));
                let q11 = q.get(0, 0);
                // det B = (2/(1+λ₂′))² e^{4πη} q11 q22
                let det = q11 * q.get(1, 1) * e4 * reg * reg;
                (det.norm() > SINGULAR_COIN * scale * scale).then(|| b.inverse_with_det(det))
            }
        }
    };
    let mut p = Mat2::identity();
    let mut log_acc = 0.0;
    for i in 0..n_steps {
        p = match direction {
            Direction::Right => step(i as i64)? * p,
            Direction::Left => step(-(i as i64) - 1)? * p,
        };
        if (i + 1) % RENORM_EVERY == 0 {
            let s = p.max_abs();
            if !(s > 0.0 && s.is_finite()) {
                return None;
            }
            log_acc += s.ln();
            p = p.scale(Complex64::from(1.0 / s));
        }
    }
    Some((log_acc + p.op_norm().ln()) / n_steps as f64)
}

/// Closed-form left/right exponents of the walk and of its dual, valid for z
/// in the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormLyapunov {
    pub right: f64,
    pub left: f64,
    pub overall: f64,
    pub dual_right: f64,
    pub dual_left: f64,
    pub dual_overall: f64,
}

pub fn lyapunov_closed_form(params: &WalkParams) -> ClosedFormLyapunov {
    let d = derived_constants(params);
    let ln0 = d.lambda0.ln();
    let (eta, eps) = (params.eta, params.eps);
    let base = (ln0 + TWO_PI * (eps.abs() - (eps.abs() - d.eps0).max(0.0))).max(0.0);
    let dual_base = (TWO_PI * eta.abs() - ln0 - TWO_PI * (eta.abs() - d.eta0).max(0.0)).max(0.0);
    let right = TWO_PI * eta + base;
    let left = -TWO_PI * eta + base;
    let dual_right = TWO_PI * eps + dual_base;
    let dual_left = -TWO_PI * eps + dual_base;
    ClosedFormLyapunov {
        right,
        left,
        overall: right.min(left).max(0.0),
        dual_right,
        dual_left,
        dual_overall: dual_right.min(dual_left).max(0.0),
    }
}

/// Kinks of ε ↦ L(ε) at η = 0 from the closed form: ±L♯/2π (or 0 when
/// λ₀ ≥ 1) and ±ε₀. Sorted ascending.
pub fn turning_points(params: &WalkParams) -> Vec<f64> {
    let d = derived_constants(params);
    let onset = if d.lambda0 < 1.0 { d.l_sharp / TWO_PI } else { 0.0 };
    let mut v = vec![-d.eps0, d.eps0, -onset, onset];
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AccelerationBackend {
    Numeric { n_steps: usize, n_phases: usize },
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Acceleration {
    pub value: f64,
    /// the difference quotient crosses a kink of the closed form
    pub straddles_turning_point: bool,
}

/// One-sided slope (L(ε+δ) − L(ε))/(2πδ) at the parameters' ε.
pub fn acceleration(
    z: Complex64,
    params: &WalkParams,
    delta_eps: f64,
    backend: AccelerationBackend,
) -> Result<Acceleration> {
    if !(delta_eps > 0.0) {
        return domain(format!("delta_eps must be positive, got {delta_eps}"));
    }
    let (a, b) = (params.eps, params.eps + delta_eps);
    let straddles = turning_points(params).iter().any(|&t| t > a && t < b);
    if straddles {
        log::warn!("acceleration difference [{a}, {b}] crosses a turning point");
    }
    let shifted = params.clone().with_eps(b);
    let (la, lb) = match backend {
        AccelerationBackend::ClosedForm => {
            (lyapunov_closed_form(params).overall, lyapunov_closed_form(&shifted).overall)
        }
        AccelerationBackend::Numeric { n_steps, n_phases } => {
            let f = |p: &WalkParams| -> Result<f64> {
                let r = lyapunov_numeric(z, p, n_steps, n_phases, Direction::Right)?.value;
                let l = lyapunov_numeric(z, p, n_steps, n_phases, Direction::Left)?.value;
                Ok(r.min(l).max(0.0))
            };
            (f(params)?, f(&shifted)?)
        }
    };
    Ok(Acceleration { value: (lb - la) / (TWO_PI * delta_eps), straddles_turning_point: straddles })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CocycleRegime {
    UniformlyHyperbolic,
    Subcritical,
    Critical,
    Supercritical,
}

/// Lyapunov exponent above which a cocycle counts as hyperbolic.
const POSITIVE_EXPONENT: f64 = 0.05;

/// Global-theory class of the η = 0 cocycle at z from the exponent and
/// acceleration at ε = 0.
pub fn cocycle_regime(z: Complex64, params: &WalkParams) -> Result<CocycleRegime> {
    let p = params.clone().with_eta(0.0).with_eps(0.0);
    let (n_steps, n_phases) = (20_000, 16);
    let l = lyapunov_numeric(z, &p, n_steps, n_phases, Direction::Right)?.value.max(0.0);
    let tp = turning_points(&p);
    let first = tp.iter().copied().filter(|&t| t > 0.0).fold(f64::INFINITY, f64::min);
    let delta = (0.5 * first).min(0.02);
    let omega = acceleration(z, &p, delta, AccelerationBackend::Numeric { n_steps, n_phases })?.value;
    let accelerating = omega > 0.5;
    Ok(match (l > POSITIVE_EXPONENT, accelerating) {
        (true, false) => CocycleRegime::UniformlyHyperbolic,
        (false, false) => CocycleRegime::Subcritical,
        (false, true) => CocycleRegime::Critical,
        (true, true) => CocycleRegime::Supercritical,
    })
}
