use num_complex::Complex64;
use serde::Serialize;

use super::{ring_coins, ring_params, step_into, Boundary, Hops, StateVector};
use crate::error::{domain, Result};
use crate::params::WalkParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveRecord {
    pub step: usize,
    /// ⟨(x − x₀)²⟩ with x folded into [−N/2, N/2) around the start cell
    pub second_moment: f64,
    /// inverse participation ratio Σₙ pₙ² of the cell weights
    pub participation: f64,
}

/// Runs `steps` periodic-ring time steps from `initial`, recording transport
/// diagnostics after every step (step 0 included).
///
/// The reference cell x₀ is the heaviest cell of the initial state.
pub fn evolve(params: &WalkParams, initial: &StateVector, steps: usize) -> Result<Vec<EvolveRecord>> {
    let n = initial.n_cells();
    if initial.norm() == 0.0 {
        return domain("initial state is zero");
    }
    let p = ring_params(params, n)?;
    if p.lambda1() * steps as f64 > n as f64 / 2.0 {
        log::warn!("{steps} steps may wrap around a ring of {n} cells");
    }
    let origin = start_cell(initial);
    let coins = ring_coins(&p, n);
    let hops = Hops::reciprocal(p.lambda1(), p.eta, Boundary::Periodic);
    let lp = p.coupling1.lambda_prime();
    let mut psi = initial.amplitudes.clone();
    let mut next = vec![Complex64::new(0.0, 0.0); psi.len()];
    let mut out = Vec::with_capacity(steps + 1);
    out.push(measure(0, &psi, origin));
    for t in 1..=steps {
        step_into(&coins, hops, lp, &psi, &mut next);
        std::mem::swap(&mut psi, &mut next);
        // rescale to keep non-unitary runs in range; moments are normalized
        let nrm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(1e-100..=1e100).contains(&nrm) {
            psi.iter_mut().for_each(|z| *z /= nrm);
        }
        out.push(measure(t, &psi, origin));
    }
    Ok(out)
}

fn start_cell(s: &StateVector) -> usize {
    let w = s.cell_weights();
    let (best, _) = w.iter().enumerate().fold((0, -1.0), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
    best
}

fn measure(step: usize, psi: &[Complex64], origin: usize) -> EvolveRecord {
    let n = psi.len() / 2;
    let weights: Vec<f64> = psi.chunks_exact(2).map(|c| c[0].norm_sqr() + c[1].norm_sqr()).collect();
    let total: f64 = weights.iter().sum();
    let half = n as i64 / 2;
    let mut m2 = 0.0;
    let mut ipr = 0.0;
    for (k, w) in weights.iter().enumerate() {
        let d = (k as i64 - origin as i64 + half).rem_euclid(n as i64) - half;
        let pk = w / total;
        m2 += pk * (d * d) as f64;
        ipr += pk * pk;
    }
    EvolveRecord { step, second_moment: m2, participation: ipr }
}
