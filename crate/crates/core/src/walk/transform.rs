//! Similarity, gauge and duality transformations of ring operators, and the
//! cellwise symmetry operators.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use super::{assemble, ring_coins, ring_params, Boundary, Hops, OperatorForm, RingOperator};
use crate::error::{domain, Error, Result};
use crate::mat2::Mat2;
use crate::params::{coin_at, realified_coin, WalkParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest admissible 2πN|η| before the corner weights leave double range.
pub const SKIN_EXPONENT_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkinDirection {
    /// W_N ↦ W̃_N: interior made reciprocal, η pushed into the wrap bond.
    Forward,
    /// W̃_N ↦ W_N.
    Inverse,
}

/// Conjugation by the exponential weight e^{2πηn} on cell n.
///
/// For periodic rings the result carries e^{±2πNη} on the two wrap-around
/// bonds and no η anywhere else; for open chains it is the η = 0 walk.
pub fn skin_conjugate(op: &RingOperator, direction: SkinDirection) -> Result<RingOperator> {
    let p = &op.params;
    let n = op.n_cells;
    let l1 = p.lambda1();
    match direction {
        SkinDirection::Forward => {
            if op.form != OperatorForm::Walk {
                return Err(Error::Structural(format!("forward skin transform expects a walk operator, got {:?}", op.form)));
            }
            let x = 2.0 * PI * n as f64 * p.eta;
            if x.abs() > SKIN_EXPONENT_LIMIT {
                return Err(Error::Range(format!("2*pi*N*|eta| = {:.1} exceeds {SKIN_EXPONENT_LIMIT}", x.abs())));
            }
            let l = Complex64::from(l1);
            let hops = match op.bc {
                Boundary::Periodic => Hops { fwd: l, bwd: l, wrap_fwd: l * x.exp(), wrap_bwd: l * (-x).exp() },
                Boundary::Open => Hops { fwd: l, bwd: l, wrap_fwd: ZERO, wrap_bwd: ZERO },
            };
            let coins = ring_coins(p, n);
            let matrix = assemble(&coins, hops, p.coupling1.lambda_prime());
            Ok(RingOperator { matrix, bc: op.bc, params: p.clone(), n_cells: n, form: OperatorForm::Skin })
        }
        SkinDirection::Inverse => {
            if op.form != OperatorForm::Skin {
                return Err(Error::Structural(format!("inverse skin transform expects a skin operator, got {:?}", op.form)));
            }
            super::build_walk(p, n, op.bc)
        }
    }
}

/// Two-factor splitting W = 𝓛𝓜 with 𝓛 = SΣ₁ block diagonal on tilted cells
/// {(k−1, −), (k, +)} and 𝓜 = Σ₁Q block diagonal on cells.
#[derive(Debug, Clone, Serialize)]
pub struct BlockFactorization {
    /// Block k acts on the ordered pair [(k−1 mod N, −), (k, +)].
    pub l_blocks: Vec<Mat2>,
    /// Block k acts on [(k, +), (k, −)].
    pub m_blocks: Vec<Mat2>,
}

impl BlockFactorization {
    pub fn n_cells(&self) -> usize {
        self.m_blocks.len()
    }

    pub fn assemble_l(&self) -> Mat<Complex64> {
        let n = self.n_cells();
        let mut m = Mat::zeros(2 * n, 2 * n);
        for (k, b) in self.l_blocks.iter().enumerate() {
            let idx = [2 * ((k + n - 1) % n) + 1, 2 * k];
            for i in 0..2 {
                for j in 0..2 {
                    m[(idx[i], idx[j])] = b.get(i, j);
                }
            }
        }
        m
    }

    pub fn assemble_m(&self) -> Mat<Complex64> {
        block_diagonal(&self.m_blocks)
    }

    pub fn product(&self) -> Mat<Complex64> {
        &self.assemble_l() * &self.assemble_m()
    }
}

pub fn cmv_factorize(params: &WalkParams, n: usize) -> Result<BlockFactorization> {
    let p = ring_params(params, n)?;
    let (l, lp) = (p.lambda1(), p.coupling1.lambda_prime());
    let e = (2.0 * PI * p.eta).exp();
    let lb = Mat2::from_real(lp, l / e, l * e, -lp);
    let l_blocks = vec![lb; n];
    let m_blocks = ring_coins(&p, n).into_iter().map(|q| Mat2::sigma1() * q).collect();
    Ok(BlockFactorization { l_blocks, m_blocks })
}

pub(crate) fn block_diagonal(blocks: &[Mat2]) -> Mat<Complex64> {
    let n = blocks.len();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for (k, b) in blocks.iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                m[(2 * k + i, 2 * k + j)] = b.get(i, j);
            }
        }
    }
    m
}

fn require_convergent(params: &WalkParams, n: usize) -> Result<WalkParams> {
    let (p, exact) = params.for_ring(n)?;
    if !exact || n < 2 {
        return domain(format!(
            "duality needs N equal to a convergent denominator of phi = {}, got N = {n}",
            params.phi()
        ));
    }
    Ok(p)
}

/// Aubry dual of the periodic ring walk: the transposed coin with coupling λ₁
/// at phase nΦ − iη times the transposed shift with coupling λ₂ and hopping weights
/// e^{±2πi(θ+iε)}. Unitarily equivalent to [`super::build_walk`] via
/// [`dual_unitary`].
pub fn build_dual_walk(params: &WalkParams, n: usize) -> Result<RingOperator> {
    let p = require_convergent(params, n)?;
    let coins: Vec<Mat2> =
        (0..n).map(|k| coin_at(p.coupling1, k as f64 * p.phi(), -p.eta).transpose()).collect();
    let (l2, l2p) = (p.lambda2(), p.coupling2.lambda_prime());
    // e^{2πiϑ}, ϑ = θ + iε
    let h = Complex64::from_polar((-2.0 * PI * p.eps).exp(), 2.0 * PI * p.theta);
    let hi = Complex64::from_polar((2.0 * PI * p.eps).exp(), -2.0 * PI * p.theta);
    let mut shift = Mat::<Complex64>::zeros(2 * n, 2 * n);
    for k in 0..n {
        shift[(2 * k, 2 * ((k + 1) % n))] += h * l2;
        shift[(2 * k, 2 * k + 1)] += Complex64::from(l2p);
        shift[(2 * k + 1, 2 * ((k + n - 1) % n) + 1)] += hi * l2;
        shift[(2 * k + 1, 2 * k)] += Complex64::from(-l2p);
    }
    let matrix = &block_diagonal(&coins) * &shift;
    Ok(RingOperator { matrix, bc: Boundary::Periodic, params: p, n_cells: n, form: OperatorForm::Dual })
}

/// The duality unitary U (phase offset 0): discrete Fourier transform over
/// cells composed with the cellwise rotation (1, i; i, 1)/√2, so that
/// U W U⁻¹ is the dual walk.
pub fn dual_unitary(params: &WalkParams, n: usize) -> Result<Mat<Complex64>> {
    let p = require_convergent(params, n)?;
    let c = p.freq.convergent_with_denominator(n as u64).expect("checked above");
    let norm = 1.0 / ((2 * n) as f64).sqrt();
    let i = Complex64::new(0.0, 1.0);
    Ok(Mat::from_fn(2 * n, 2 * n, |r, s| {
        let (cell_r, a) = (r / 2, r % 2);
        let (cell_s, b) = (s / 2, s % 2);
        let k = (cell_r as u128 * cell_s as u128 * c.p as u128) % n as u128;
        let phase = Complex64::from_polar(norm, 2.0 * PI * k as f64 / n as f64);
        if a == b {
            phase
        } else {
            phase * i
        }
    }))
}

/// S_{λ₁,η} Q^ℝ with the realified coins of the θ = 1/4 gauge. `params.theta`
/// is ignored.
pub fn build_realified_walk(params: &WalkParams, n: usize, bc: Boundary) -> Result<RingOperator> {
    let p = ring_params(params, n)?;
    let coins: Vec<Mat2> = (0..n).map(|k| realified_coin(k as i64, p.coupling2, p.phi(), p.eps)).collect();
    let hops = Hops::reciprocal(p.lambda1(), p.eta, bc);
    let matrix = assemble(&coins, hops, p.coupling1.lambda_prime());
    Ok(RingOperator { matrix, bc, params: p, n_cells: n, form: OperatorForm::Realified })
}

/// Symmetric timeframe (Q^ℝ)^{1/2} S_{λ₁,η} (Q^ℝ)^{1/2} on the periodic ring.
pub fn timeframe(params: &WalkParams, n: usize) -> Result<RingOperator> {
    let p = ring_params(params, n)?;
    let mut roots = Vec::with_capacity(n);
    for k in 0..n {
        let q = realified_coin(k as i64, p.coupling2, p.phi(), p.eps);
        roots.push(q.principal_sqrt().ok_or(Error::SingularBranch { cell: k })?);
    }
    let hops = Hops::reciprocal(p.lambda1(), p.eta, Boundary::Periodic);
    let sr = assemble(&roots, hops, p.coupling1.lambda_prime());
    let matrix = &block_diagonal(&roots) * &sr;
    Ok(RingOperator { matrix, bc: Boundary::Periodic, params: p, n_cells: n, form: OperatorForm::Timeframe })
}

/// Parity 𝒫 (cell n → −n mod N, block σ₂), the matrix part of the antilinear
/// 𝒫𝒯 (cell n → −n, block σ₃, followed by complex conjugation) and the
/// chiral Γ (blockwise σ₁).
#[derive(Debug, Clone)]
pub struct SymmetryOperators {
    pub parity: Mat<Complex64>,
    /// 𝒫𝒯ψ = `pt_matrix` · conj(ψ)
    pub pt_matrix: Mat<Complex64>,
    pub chiral: Mat<Complex64>,
}

impl SymmetryOperators {
    /// (𝒫𝒯) A (𝒫𝒯)⁻¹ for a linear operator A.
    pub fn pt_conjugate(&self, a: &Mat<Complex64>) -> Mat<Complex64> {
        // the matrix part is a real involution
        let ca = crate::linalg::conj(a.as_ref());
        &(&self.pt_matrix * &ca) * &self.pt_matrix
    }

    /// Applies the antilinear 𝒫𝒯 to a vector.
    pub fn apply_pt(&self, v: &[Complex64]) -> Vec<Complex64> {
        let cv: Vec<Complex64> = v.iter().map(|z| z.conj()).collect();
        crate::linalg::mat_vec(self.pt_matrix.as_ref(), &cv)
    }
}

pub fn symmetry_operators(n: usize) -> SymmetryOperators {
    let reflect = |block: Mat2| {
        let mut m = Mat::<Complex64>::zeros(2 * n, 2 * n);
        for k in 0..n {
            let r = (n - k) % n;
            for i in 0..2 {
                for j in 0..2 {
                    m[(2 * r + i, 2 * k + j)] = block.get(i, j);
                }
            }
        }
        m
    };
    SymmetryOperators {
        parity: reflect(Mat2::sigma2()),
        pt_matrix: reflect(Mat2::sigma3()),
        chiral: block_diagonal(&vec![Mat2::sigma1(); n]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{adjoint, eig, identity, max_abs_diff};
    use crate::walk::build_walk;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.arg().total_cmp(&b.arg()).then(a.norm().total_cmp(&b.norm())));
        v
    }

    fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
        let d = |x: &[Complex64], y: &[Complex64]| {
            x.iter().map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
        };
        d(a, b).max(d(b, a))
    }

    #[test]
    fn skin_identity_at_zero_eta() {
        let p = WalkParams::new(0.6, 0.4).unwrap().with_eps(0.1);
        let w = build_walk(&p, 13, Boundary::Periodic).unwrap();
        let s = skin_conjugate(&w, SkinDirection::Forward).unwrap();
        assert_eq!(max_abs_diff(w.matrix.as_ref(), s.matrix.as_ref()), 0.0);
    }

    #[test]
    fn skin_open_is_reciprocal_walk() {
        let p = WalkParams::new(0.6, 0.4).unwrap().with_eps(0.1);
        let w = build_walk(&p.clone().with_eta(0.07), 13, Boundary::Open).unwrap();
        let s = skin_conjugate(&w, SkinDirection::Forward).unwrap();
        let w0 = build_walk(&p, 13, Boundary::Open).unwrap();
        assert_eq!(max_abs_diff(w0.matrix.as_ref(), s.matrix.as_ref()), 0.0);
    }

    #[test]
    fn skin_similarity_small_ring() {
        let p = WalkParams::new(0.6, 0.4).unwrap().with_eps(0.05).with_eta(0.05).with_phi(0.4).unwrap();
        let w = build_walk(&p, 5, Boundary::Periodic).unwrap();
        let s = skin_conjugate(&w, SkinDirection::Forward).unwrap();
        let (a, _) = eig(w.matrix.as_ref(), false).unwrap();
        let (b, _) = eig(s.matrix.as_ref(), false).unwrap();
        assert!(hausdorff(&a, &b) < 1e-8);
        let back = skin_conjugate(&s, SkinDirection::Inverse).unwrap();
        assert_eq!(max_abs_diff(back.matrix.as_ref(), w.matrix.as_ref()), 0.0);
    }

    #[test]
    fn skin_range_guard() {
        let p = WalkParams::new(0.6, 0.4).unwrap().with_eta(2.0);
        let w = build_walk(&p, 89, Boundary::Periodic).unwrap();
        assert!(matches!(skin_conjugate(&w, SkinDirection::Forward), Err(Error::Range(_))));
    }

    #[test]
    fn cmv_reassembles() {
        let p = WalkParams::new(0.7, 0.35).unwrap().with_eps(0.12).with_eta(-0.04).with_theta(0.3);
        let f = cmv_factorize(&p, 13).unwrap();
        let w = build_walk(&p, 13, Boundary::Periodic).unwrap();
        assert!(max_abs_diff(f.product().as_ref(), w.matrix.as_ref()) < 1e-12);
    }

    #[test]
    fn cmv_blocks_unitary_and_swap() {
        let p = WalkParams::new(0.7, 0.35).unwrap().with_theta(0.3);
        let f = cmv_factorize(&p, 8).unwrap();
        for b in f.l_blocks.iter().chain(&f.m_blocks) {
            assert!((b.adjoint() * *b - Mat2::identity()).max_abs() < 1e-14);
        }
        let f = cmv_factorize(&WalkParams::new(1.0, 0.35).unwrap(), 8).unwrap();
        assert!((f.l_blocks[0] - Mat2::sigma1()).max_abs() < 1e-15);
    }

    #[test]
    fn dual_is_unitary_conjugate() {
        for &n in &[8usize, 13, 21] {
            let p = WalkParams::new(0.7, 0.45)
                .unwrap()
                .with_theta(0.31)
                .with_eps(0.07)
                .with_eta(-0.05);
            let w = build_walk(&p, n, Boundary::Periodic).unwrap();
            let d = build_dual_walk(&p, n).unwrap();
            let u = dual_unitary(&p, n).unwrap();
            let uu = &adjoint(u.as_ref()) * &u;
            assert!(max_abs_diff(uu.as_ref(), identity(2 * n).as_ref()) < 1e-12);
            let conj = &(&u * &w.matrix) * &adjoint(u.as_ref());
            assert!(max_abs_diff(conj.as_ref(), d.matrix.as_ref()) < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn dual_rejects_non_convergent() {
        let p = WalkParams::new(0.7, 0.45).unwrap();
        assert!(build_dual_walk(&p, 10).is_err());
    }

    #[test]
    fn dual_parameters_involution() {
        let p = WalkParams::new(0.7, 0.45).unwrap().with_eps(0.1).with_eta(-0.2);
        assert_eq!(p.dual().dual(), p);
    }

    #[test]
    fn symmetry_involutions() {
        let s = symmetry_operators(7);
        let id = identity(14);
        for m in [&s.parity, &s.pt_matrix, &s.chiral] {
            assert!(max_abs_diff((m * m).as_ref(), id.as_ref()) < 1e-15);
        }
    }

    #[test]
    fn realified_pseudo_unitary() {
        let s = symmetry_operators(21);
        for &(eps, eta) in &[(0.0, 0.0), (0.1, 0.0), (0.2, 0.05), (-0.15, -0.08)] {
            let p = WalkParams::new(0.6, 0.45).unwrap().with_eps(eps).with_eta(eta);
            let w = build_realified_walk(&p, 21, Boundary::Periodic).unwrap();
            let inv = crate::linalg::inverse_checked(w.matrix.as_ref(), 1e12).unwrap();
            let lhs = &(&s.parity * &inv) * &s.parity;
            let r = max_abs_diff(lhs.as_ref(), adjoint(w.matrix.as_ref()).as_ref());
            assert!(r < 1e-9, "eps={eps} eta={eta} residual {r}");
        }
    }

    #[test]
    fn realified_gauge_breaks_past_eps0() {
        // λ₂ = 0.75 has ε₀ ≈ 0.128; the principal root crosses its cut beyond it
        let s = symmetry_operators(8);
        let residual = |eps: f64| {
            let p = WalkParams::new(0.5, 0.75).unwrap().with_eps(eps);
            let w = build_realified_walk(&p, 8, Boundary::Periodic).unwrap();
            let inv = crate::linalg::inverse_checked(w.matrix.as_ref(), 1e12).unwrap();
            let lhs = &(&s.parity * &inv) * &s.parity;
            max_abs_diff(lhs.as_ref(), adjoint(w.matrix.as_ref()).as_ref())
        };
        assert!(residual(0.1) < 1e-9);
        assert!(residual(0.2) > 1e-3);
    }

    #[test]
    fn timeframe_pt_symmetric() {
        let s = symmetry_operators(21);
        let p = WalkParams::new(0.6, 0.45).unwrap().with_eps(0.1);
        let w = timeframe(&p, 21).unwrap();
        let inv = crate::linalg::inverse_checked(w.matrix.as_ref(), 1e12).unwrap();
        assert!(max_abs_diff(s.pt_conjugate(&w.matrix).as_ref(), inv.as_ref()) < 1e-9);
        let pe = p.clone().with_eta(0.05);
        let we = timeframe(&pe, 21).unwrap();
        let wm = timeframe(&pe.clone().with_eta(-0.05), 21).unwrap();
        let inv_m = crate::linalg::inverse_checked(wm.matrix.as_ref(), 1e12).unwrap();
        assert!(max_abs_diff(s.pt_conjugate(&we.matrix).as_ref(), inv_m.as_ref()) < 1e-9);
    }

    #[test]
    fn timeframe_similar_to_realified_walk() {
        let p = WalkParams::new(0.6, 0.45).unwrap().with_eps(0.15);
        let w = build_realified_walk(&p, 21, Boundary::Periodic).unwrap();
        let t = timeframe(&p, 21).unwrap();
        let (a, _) = eig(w.matrix.as_ref(), false).unwrap();
        let (b, _) = eig(t.matrix.as_ref(), false).unwrap();
        assert!(hausdorff(&sorted(a), &sorted(b)) < 1e-8);
    }

    #[test]
    fn timeframe_roots_square_back() {
        let p = WalkParams::new(0.6, 0.45).unwrap().with_eps(0.2);
        let pr = ring_params(&p, 13).unwrap();
        for k in 0..13 {
            let q = realified_coin(k, pr.coupling2, pr.phi(), pr.eps);
            let r = q.principal_sqrt().unwrap();
            assert!((r * r - q).max_abs() < 1e-12);
        }
    }
}
