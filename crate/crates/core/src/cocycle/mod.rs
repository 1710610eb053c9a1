//! Transfer matrices of the eigenvalue equation Wψ = zψ and the Lyapunov
//! exponents of the resulting cocycles.
//!
//! With u_n = [ψ⁺_n, ψ⁻_{n−1}], an eigenvector satisfies u_{n+1} = T_n u_n
//! where T_n depends on the coin Q_n only.

mod lyapunov;

pub use lyapunov::{
    acceleration, cocycle_regime, lyapunov_closed_form, lyapunov_numeric, lyapunov_numeric_with, turning_points,
    Acceleration, AccelerationBackend, ClosedFormLyapunov, CocycleKind, CocycleRegime, Direction, LyapunovEstimate,
};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::mat2::Mat2;
use crate::params::{coin_at, coin_matrix, CouplingPair, WalkParams};

/// Relative size below which a coin diagonal entry counts as vanishing.
const SINGULAR_COIN: f64 = 1e-14;

/// Transfer matrix of a split-step walk with shift coupling `shift`,
/// non-reciprocity `eta` and arbitrary coin `q`, without the 1/q₂₂ factor.
/// Returns (numerator matrix, q₂₂).
#[inline]
fn transfer_parts(shift: CouplingPair, eta: f64, q: &Mat2, z: Complex64) -> (Mat2, Complex64) {
    let (l, lp) = (shift.lambda(), shift.lambda_prime());
    let e = (2.0 * PI * eta).exp();
    let [[_, q12], [q21, q22]] = q.0;
    let zi = z.inv();
    let a = q.det() * zi / l + (q21 - q12) * (lp / l) + z * (lp * lp / l);
    let b = (q12 - z * lp) * e;
    let c = -(q21 + z * lp) / e;
    let d = z * l;
    (Mat2::new(a, b, c, d).scale(Complex64::from(e)), q22)
}

fn check_z(z: Complex64) -> Result<()> {
    if z.norm() == 0.0 || !z.is_finite() {
        return domain(format!("transfer matrices need finite z != 0, got {z}"));
    }
    Ok(())
}

/// T_{n,z}(η, ϑ) for the walk with parameters `params`, coin phase nΦ + θ + iε.
pub fn transfer_matrix(n: i64, z: Complex64, params: &WalkParams) -> Result<Mat2> {
    check_z(z)?;
    let q = coin_matrix(n, params);
    let (m, q22) = transfer_parts(params.coupling1, params.eta, &q, z);
    if q22.norm() <= SINGULAR_COIN * q.max_abs() {
        return Err(Error::SingularCoin { cell: n });
    }
    Ok(m.scale(q22.inv()))
}

/// Analytic determinant e^{4πη} q₁₁/q₂₂ of [`transfer_matrix`].
pub fn transfer_det(n: i64, params: &WalkParams) -> Complex64 {
    let q = coin_matrix(n, params);
    q.get(0, 0) / q.get(1, 1) * (4.0 * PI * params.eta).exp()
}

/// Transfer matrix of the Aubry-dual walk Q^⊤_{λ₁,−η} S^⊤_{λ₂,−ε}, from the
/// transposed split-step recursion with coin phase nΦ + θ − iη.
pub fn transfer_matrix_dual(n: i64, z: Complex64, params: &WalkParams) -> Result<Mat2> {
    check_z(z)?;
    let q = coin_at(params.coupling1, n as f64 * params.phi() + params.theta, -params.eta);
    let shift = params.coupling2;
    let eta = -params.eps;
    let (l, lp) = (shift.lambda(), shift.lambda_prime());
    let e = (2.0 * PI * eta).exp();
    let [[q11, q12], [q21, _]] = q.0;
    if q11.norm() <= SINGULAR_COIN * q.max_abs() {
        return Err(Error::SingularCoin { cell: n });
    }
    let det = q.det();
    let zi = z.inv();
    let a = z / l + (q21 - q12) * (lp / l) + det * zi * (lp * lp / l);
    let b = -(q21 + det * zi * lp) / e;
    let c = (q12 - det * zi * lp) * e;
    let d = det * zi * l;
    Ok(Mat2::new(a, b, c, d).scale(q11.inv() / e))
}

/// Regularized cocycle B = 2q₂₂/(1+λ₂′) · A, entire in the phase.
pub fn regularized_transfer(n: i64, z: Complex64, params: &WalkParams) -> Result<Mat2> {
    check_z(z)?;
    let q = coin_matrix(n, params);
    let (m, _) = transfer_parts(params.coupling1, params.eta, &q, z);
    Ok(m.scale(Complex64::from(2.0 / (1.0 + params.coupling2.lambda_prime()))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig;
    use crate::walk::{build_walk, Boundary};
    use proptest::prelude::*;

    fn params_strategy() -> impl Strategy<Value = WalkParams> {
        (0.05f64..1.0, 0.05f64..1.0, 0.0f64..1.0, -0.3f64..0.3, -0.2f64..0.2).prop_map(|(l1, l2, th, eps, eta)| {
            WalkParams::new(l1, l2).unwrap().with_theta(th).with_eps(eps).with_eta(eta)
        })
    }

    fn z_strategy() -> impl Strategy<Value = Complex64> {
        (0.3f64..3.0, -PI..PI).prop_map(|(r, a)| Complex64::from_polar(r, a))
    }

    fn sigma3_exp(t: f64) -> Mat2 {
        Mat2::diag(Complex64::from(t.exp()), Complex64::from((-t).exp()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn determinant_identity(p in params_strategy(), z in z_strategy(), n in -1000i64..1000) {
            let t = transfer_matrix(n, z, &p).unwrap();
            let want = transfer_det(n, &p);
            prop_assert!((t.det() - want).norm() < 1e-12 * (1.0 + want.norm()) * (1.0 + t.max_abs().powi(2)));
        }

        #[test]
        fn eta_conjugation(p in params_strategy(), z in z_strategy(), n in -1000i64..1000) {
            let t = transfer_matrix(n, z, &p).unwrap();
            let t0 = transfer_matrix(n, z, &p.clone().with_eta(0.0)).unwrap();
            let eta = p.eta;
            let rhs = (sigma3_exp(PI * eta) * t0 * sigma3_exp(-PI * eta)).scale(Complex64::from((2.0 * PI * eta).exp()));
            prop_assert!((t - rhs).max_abs() < 1e-12 * (1.0 + t.max_abs()));
        }

        #[test]
        fn dual_relation(p in params_strategy(), z in z_strategy(), n in -1000i64..1000) {
            let lhs = transfer_matrix_dual(n, z, &p).unwrap();
            let mirror = WalkParams {
                coupling1: p.coupling2,
                coupling2: p.coupling1,
                eta: p.eps,
                eps: p.eta,
                ..p.clone()
            };
            let rhs = transfer_matrix(n, z.conj().inv(), &mirror).unwrap().conj();
            prop_assert!((lhs - rhs).max_abs() < 1e-12 * (1.0 + lhs.max_abs()));
        }

        #[test]
        fn regularized_is_rescaled(p in params_strategy(), z in z_strategy(), n in -100i64..100) {
            let a = transfer_matrix(n, z, &p).unwrap();
            let b = regularized_transfer(n, z, &p).unwrap();
            let q22 = coin_matrix(n, &p).get(1, 1);
            let f = q22 * 2.0 / (1.0 + p.coupling2.lambda_prime());
            prop_assert!((a.scale(f) - b).max_abs() < 1e-12 * (1.0 + b.max_abs()));
        }
    }

    #[test]
    fn dual_determinant_mirror() {
        let p = WalkParams::new(0.6, 0.35).unwrap().with_theta(0.2).with_eps(0.07).with_eta(0.04);
        let z = Complex64::from_polar(1.3, 0.4);
        for n in 0..20 {
            let t = transfer_matrix_dual(n, z, &p).unwrap();
            let q = coin_at(p.coupling1, n as f64 * p.phi() + p.theta, -p.eta);
            let want = q.get(1, 1) / q.get(0, 0) * (4.0 * PI * p.eps).exp();
            assert!((t.det() - want).norm() < 1e-12 * (1.0 + want.norm()), "n = {n}");
        }
    }

    #[test]
    fn self_dual_reduction() {
        let p = WalkParams::new(0.6, 0.6).unwrap().with_theta(0.37);
        let z = Complex64::from_polar(1.0, 1.1);
        for n in 0..10 {
            let lhs = transfer_matrix_dual(n, z, &p).unwrap();
            let rhs = transfer_matrix(n, z.conj().inv(), &p).unwrap().conj();
            assert!((lhs - rhs).max_abs() < 1e-12);
        }
    }

    #[test]
    fn zero_energy_rejected() {
        let p = WalkParams::new(0.5, 0.5).unwrap();
        assert!(transfer_matrix(0, Complex64::new(0.0, 0.0), &p).is_err());
        assert!(regularized_transfer(0, Complex64::new(0.0, 0.0), &p).is_err());
    }

    #[test]
    fn singular_coin_reported() {
        // q22 = λ₂cos(2πϑ) − iλ₂′ vanishes at ϑ = 3/4 + iε₀
        let l2 = CouplingPair::new(0.25).unwrap();
        let y = (l2.lambda_prime() / l2.lambda()).asinh() / (2.0 * PI);
        let p = WalkParams::new(0.5, 0.25).unwrap().with_phi(0.0).unwrap().with_theta(0.75).with_eps(y);
        let q = coin_matrix(0, &p);
        assert!(q.get(1, 1).norm() < 1e-14, "{}", q.get(1, 1));
        assert!(matches!(transfer_matrix(0, Complex64::new(1.0, 0.0), &p), Err(Error::SingularCoin { cell: 0 })));
        let b = regularized_transfer(0, Complex64::new(1.0, 0.0), &p).unwrap();
        assert!(b.max_abs().is_finite());
    }

    #[test]
    fn eigenvector_recursion() {
        let n = 34;
        let p = WalkParams::new(0.6, 0.4).unwrap().with_theta(0.15).with_eps(0.05).with_eta(0.02);
        let w = build_walk(&p, n, Boundary::Periodic).unwrap();
        let (vals, vecs) = eig(w.matrix.as_ref(), true).unwrap();
        let vecs = vecs.unwrap();
        let pr = &w.params;
        for (j, &z) in vals.iter().enumerate().step_by(7) {
            let col: Vec<Complex64> = (0..2 * n).map(|i| vecs[(i, j)]).collect();
            let s = col.iter().map(|x| x.norm()).fold(0.0, f64::max);
            for k in 1..n - 1 {
                let t = transfer_matrix(k as i64, z, pr).unwrap();
                let u = t.apply([col[2 * k], col[2 * k - 1]]);
                let err = (u[0] - col[2 * k + 2]).norm().max((u[1] - col[2 * k + 1]).norm());
                assert!(err < 1e-8 * s * (1.0 + t.max_abs()), "eigenpair {j}, cell {k}: {err}");
            }
        }
    }
}
