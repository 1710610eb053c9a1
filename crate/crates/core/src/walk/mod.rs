//! Finite ring realizations of the split-step walk W = S_{λ₁,η} Q.
//!
//! Basis ordering: index `2n` is (cell n, +) and `2n + 1` is (cell n, −).

mod evolve;
mod transform;

pub use evolve::{evolve, EvolveRecord};
pub use transform::{
    build_dual_walk, build_realified_walk, cmv_factorize, dual_unitary, skin_conjugate, symmetry_operators,
    timeframe, BlockFactorization, SkinDirection, SymmetryOperators,
};

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mat2::Mat2;
use crate::params::{coin_at, WalkParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "open" => Ok(Boundary::Open),
            other => domain(format!("unknown boundary condition '{other}'")),
        }
    }
}

/// Which construction produced a [`RingOperator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorForm {
    Walk,
    Skin,
    Dual,
    Realified,
    Timeframe,
}

/// Dense 2N×2N matrix of a finite walk plus the data it was built from.
#[derive(Debug, Clone)]
pub struct RingOperator {
    pub matrix: Mat<Complex64>,
    pub bc: Boundary,
    /// Parameters with Φ already replaced by the ring frequency.
    pub params: WalkParams,
    pub n_cells: usize,
    pub form: OperatorForm,
}

impl RingOperator {
    pub fn dim(&self) -> usize {
        2 * self.n_cells
    }
}

/// Amplitudes ψₙ^± on N cells, stored interleaved as [ψ₀⁺, ψ₀⁻, ψ₁⁺, …].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(n_cells: usize) -> Self {
        Self { amplitudes: vec![ZERO; 2 * n_cells] }
    }

    pub fn from_vec(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_multiple_of(2) {
            return domain(format!("state length {} is odd", amplitudes.len()));
        }
        Ok(Self { amplitudes })
    }

    /// Unit amplitude on (cell, chirality); `plus = true` selects ψ⁺.
    pub fn delta(n_cells: usize, cell: usize, plus: bool) -> Self {
        let mut s = Self::zeros(n_cells);
        s.amplitudes[2 * cell + usize::from(!plus)] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn n_cells(&self) -> usize {
        self.amplitudes.len() / 2
    }

    pub fn plus(&self, n: usize) -> Complex64 {
        self.amplitudes[2 * n]
    }

    pub fn minus(&self, n: usize) -> Complex64 {
        self.amplitudes[2 * n + 1]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability weight per cell, |ψₙ⁺|² + |ψₙ⁻|².
    pub fn cell_weights(&self) -> Vec<f64> {
        self.amplitudes.chunks_exact(2).map(|c| c[0].norm_sqr() + c[1].norm_sqr()).collect()
    }
}

/// Ring copy of `params` for N cells, warning when N is not a convergent
/// denominator of Φ.
pub(crate) fn ring_params(params: &WalkParams, n: usize) -> Result<WalkParams> {
    if n < 2 {
        return domain(format!("ring needs at least 2 cells, got {n}"));
    }
    let (p, exact) = params.for_ring(n)?;
    if !exact {
        log::warn!(
            "N = {n} is not a convergent denominator of phi = {}; using phi_N = {}",
            params.phi(),
            p.phi()
        );
    }
    Ok(p)
}

/// Coins Q₀ … Q_{N−1} of a ring (parameters already snapped).
pub(crate) fn ring_coins(p: &WalkParams, n: usize) -> Vec<Mat2> {
    (0..n)
        .map(|k| coin_at(p.coupling2, k as f64 * p.phi() + p.theta, p.eps))
        .collect()
}

/// Hopping weights of a split-step shift: `fwd` multiplies the rightward
/// (ψ⁺) hop, `bwd` the leftward (ψ⁻) hop; the `wrap_*` values replace them on
/// the bond between cells N−1 and 0.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Hops {
    pub fwd: Complex64,
    pub bwd: Complex64,
    pub wrap_fwd: Complex64,
    pub wrap_bwd: Complex64,
}

impl Hops {
    pub fn reciprocal(lambda: f64, eta: f64, bc: Boundary) -> Self {
        let fwd = Complex64::from(lambda * (2.0 * PI * eta).exp());
        let bwd = Complex64::from(lambda * (-2.0 * PI * eta).exp());
        match bc {
            Boundary::Periodic => Self { fwd, bwd, wrap_fwd: fwd, wrap_bwd: bwd },
            Boundary::Open => Self { fwd, bwd, wrap_fwd: ZERO, wrap_bwd: ZERO },
        }
    }
}

/// Dense S·diag(coins) with the given hop weights and on-site coupling λ′.
pub(crate) fn assemble(coins: &[Mat2], hops: Hops, lambda_prime: f64) -> Mat<Complex64> {
    let n = coins.len();
    let lp = lambda_prime;
    let mut m = Mat::<Complex64>::zeros(2 * n, 2 * n);
    for k in 0..n {
        let q = &coins[k];
        let (prev, fwd) = if k == 0 { (n - 1, hops.wrap_fwd) } else { (k - 1, hops.fwd) };
        let (next, bwd) = if k == n - 1 { (0, hops.wrap_bwd) } else { (k + 1, hops.bwd) };
        let qp = &coins[prev];
        let qn = &coins[next];
        // row (k,+)
        m[(2 * k, 2 * prev)] += fwd * qp.get(0, 0);
        m[(2 * k, 2 * prev + 1)] += fwd * qp.get(0, 1);
        m[(2 * k, 2 * k)] += -q.get(1, 0) * lp;
        m[(2 * k, 2 * k + 1)] += -q.get(1, 1) * lp;
        // row (k,−)
        m[(2 * k + 1, 2 * next)] += bwd * qn.get(1, 0);
        m[(2 * k + 1, 2 * next + 1)] += bwd * qn.get(1, 1);
        m[(2 * k + 1, 2 * k)] += q.get(0, 0) * lp;
        m[(2 * k + 1, 2 * k + 1)] += q.get(0, 1) * lp;
    }
    m
}

/// Dense W_N = S_{λ₁,η,N} Q_N on a ring of `n` cells.
pub fn build_walk(params: &WalkParams, n: usize, bc: Boundary) -> Result<RingOperator> {
    let p = ring_params(params, n)?;
    let coins = ring_coins(&p, n);
    let hops = Hops::reciprocal(p.lambda1(), p.eta, bc);
    let matrix = assemble(&coins, hops, p.coupling1.lambda_prime());
    Ok(RingOperator { matrix, bc, params: p, n_cells: n, form: OperatorForm::Walk })
}

/// One step of the walk without forming the matrix.
pub fn apply_walk(params: &WalkParams, state: &StateVector, bc: Boundary) -> Result<StateVector> {
    let n = state.n_cells();
    let p = ring_params(params, n)?;
    let coins = ring_coins(&p, n);
    let hops = Hops::reciprocal(p.lambda1(), p.eta, bc);
    let mut out = StateVector::zeros(n);
    step_into(&coins, hops, p.coupling1.lambda_prime(), &state.amplitudes, &mut out.amplitudes);
    Ok(out)
}

/// ψ ↦ Wψ in O(N) given precomputed coins.
pub(crate) fn step_into(coins: &[Mat2], hops: Hops, lp: f64, psi: &[Complex64], out: &mut [Complex64]) {
    let n = coins.len();
    debug_assert_eq!(psi.len(), 2 * n);
    // coin first: φ = Qψ
    let phi: Vec<[Complex64; 2]> = (0..n).map(|k| coins[k].apply([psi[2 * k], psi[2 * k + 1]])).collect();
    for k in 0..n {
        let (prev, fwd) = if k == 0 { (n - 1, hops.wrap_fwd) } else { (k - 1, hops.fwd) };
        let (next, bwd) = if k == n - 1 { (0, hops.wrap_bwd) } else { (k + 1, hops.bwd) };
        out[2 * k] = fwd * phi[prev][0] - phi[k][1] * lp;
        out[2 * k + 1] = bwd * phi[next][1] + phi[k][0] * lp;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{adjoint, eig, identity, mat_vec, max_abs_diff};
    use crate::params::golden_mean;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        (0..2 * n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn unitary_without_deformation() {
        let p = WalkParams::new(0.6, 0.3).unwrap().with_theta(0.2);
        let w = build_walk(&p, 21, Boundary::Periodic).unwrap();
        let wtw = &adjoint(w.matrix.as_ref()) * &w.matrix;
        assert!(max_abs_diff(wtw.as_ref(), identity(42).as_ref()) < 1e-12);
        let (vals, _) = eig(w.matrix.as_ref(), false).unwrap();
        assert!(vals.iter().all(|z| (z.norm() - 1.0).abs() < 1e-10));
    }

    #[test]
    fn row_sparsity_and_corners() {
        let p = WalkParams::new(0.6, 0.3).unwrap().with_eps(0.1).with_eta(0.05);
        let n = 8;
        let w = build_walk(&p, n, Boundary::Periodic).unwrap().matrix;
        let mut corners = 0;
        for i in 0..2 * n {
            let nnz = (0..2 * n).filter(|&j| w[(i, j)] != ZERO).count();
            assert!(nnz <= 4);
            for j in 0..2 * n {
                if w[(i, j)] != ZERO && (i / 2).abs_diff(j / 2) > 1 {
                    corners += 1;
                }
            }
        }
        assert_eq!(corners, 4);
        let o = build_walk(&p, n, Boundary::Open).unwrap().matrix;
        for i in 0..2 * n {
            for j in 0..2 * n {
                if (i / 2).abs_diff(j / 2) > 1 {
                    assert_eq!(o[(i, j)], ZERO);
                }
            }
        }
    }

    #[test]
    fn perfect_shift() {
        let p = WalkParams::new(1.0, 1.0).unwrap().with_phi(0.0).unwrap();
        let n = 6;
        let s = apply_walk(&p, &StateVector::delta(n, 2, true), Boundary::Periodic).unwrap();
        assert_eq!(s, StateVector::delta(n, 3, true));
        let s = apply_walk(&p, &StateVector::delta(n, 2, false), Boundary::Periodic).unwrap();
        assert_eq!(s, StateVector::delta(n, 1, false));
        let w = build_walk(&p, n, Boundary::Periodic).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_state(n, &mut rng);
        assert!((norm(&mat_vec(w.matrix.as_ref(), &x)) - norm(&x)).abs() < 1e-12);
    }

    #[test]
    fn small_ring_rejected() {
        let p = WalkParams::new(0.5, 0.5).unwrap();
        assert!(build_walk(&p, 1, Boundary::Periodic).is_err());
    }

    #[test]
    fn norm_preserved_by_step() {
        let p = WalkParams::new(0.5, 0.25).unwrap().with_theta(0.4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = StateVector::from_vec(random_state(34, &mut rng)).unwrap();
        let t = apply_walk(&p, &s, Boundary::Periodic).unwrap();
        assert!((t.norm() - s.norm()).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn matrix_free_agrees_with_dense(
            l1 in 0.05f64..1.0, l2 in 0.05f64..1.0, theta in 0.0f64..1.0,
            eps in -0.3f64..0.3, eta in -0.2f64..0.2, n in 2usize..=16,
            open in any::<bool>(), seed in any::<u64>(),
        ) {
            let bc = if open { Boundary::Open } else { Boundary::Periodic };
            let p = WalkParams::new(l1, l2).unwrap().with_theta(theta).with_eps(eps).with_eta(eta)
                .with_phi(golden_mean()).unwrap();
            let w = build_walk(&p, n, bc).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_state(n, &mut rng);
            let dense = mat_vec(w.matrix.as_ref(), &x);
            let free = apply_walk(&p, &StateVector::from_vec(x).unwrap(), bc).unwrap();
            let scale = 1.0 + w.matrix.norm_max();
            for (a, b) in dense.iter().zip(&free.amplitudes) {
                prop_assert!((a - b).norm() < 1e-12 * scale);
            }
        }
    }
}
