//! Parameter algebra for the split-step almost-Mathieu walk: coupling
//! constants, frequencies and their continued-fraction approximants, the
//! quasiperiodic coins, and the closed-form critical constants.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::mat2::Mat2;

const TWO_PI: f64 = 2.0 * PI;

/// A coupling constant λ ∈ (0, 1]. The complementary λ′ = √(1−λ²) is
/// always derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingPair {
    lambda: f64,
}

impl CouplingPair {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return domain(format!("coupling constant must lie in (0, 1], got {lambda}"));
        }
        Ok(Self { lambda })
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn lambda_prime(&self) -> f64 {
        (1.0 - self.lambda * self.lambda).max(0.0).sqrt()
    }
}

/// A continued-fraction convergent p/q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub p: u64,
    pub q: u64,
}

impl Convergent {
    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

/// Continued-fraction convergents of `phi` with denominator at most `q_max`,
/// in strictly increasing denominator order.
///
/// The expansion stops once the approximation error falls below 1e-15, so a
/// rational input yields its exact finite list.
pub fn convergents(phi: f64, q_max: u64) -> Result<Vec<Convergent>> {
    if !(phi > 0.0 && phi < 1.0) {
        return domain(format!("frequency must lie in (0, 1), got {phi}"));
    }
    if q_max < 1 {
        return domain("q_max must be at least 1");
    }
    let mut out: Vec<Convergent> = Vec::new();
    // (p_{k-1}, q_{k-1}) and (p_{k-2}, q_{k-2})
    let (mut p1, mut q1, mut p2, mut q2) = (1u64, 0u64, 0u64, 1u64);
    let mut x = phi;
    for _ in 0..64 {
        let a = x.floor();
        let ai = a as u64;
        let (Some(p), Some(q)) = (
            ai.checked_mul(p1).and_then(|v| v.checked_add(p2)),
            ai.checked_mul(q1).and_then(|v| v.checked_add(q2)),
        ) else {
            break;
        };
        if q > q_max {
            break;
        }
        let c = Convergent { p, q };
        match out.last_mut() {
            // a leading partial quotient of 1 repeats q = 1; keep the better one
            Some(last) if last.q == q => *last = c,
            _ => out.push(c),
        }
        if (phi - c.value()).abs() < 1e-15 {
            break;
        }
        let rem = x - a;
        if rem < 1e-15 {
            break;
        }
        x = 1.0 / rem;
        (p2, q2, p1, q1) = (p1, q1, p, q);
    }
    Ok(out)
}

/// The default frequency Φ = (√5 − 1)/2.
pub fn golden_mean() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Frequency Φ together with its convergents up to a fixed denominator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencySpec {
    pub phi: f64,
    pub convergents: Vec<Convergent>,
}

/// Largest denominator tracked by [`FrequencySpec`].
pub const Q_MAX: u64 = 1 << 20;

impl FrequencySpec {
    pub fn new(phi: f64) -> Result<Self> {
        // Φ = 0 and Φ = 1 are admissible for the walk (trivial coins) but
        // have no interesting expansion.
        if phi == 0.0 || phi == 1.0 {
            return Ok(Self { phi, convergents: vec![Convergent { p: phi as u64, q: 1 }] });
        }
        if !(0.0..=1.0).contains(&phi) {
            return domain(format!("frequency must lie in [0, 1], got {phi}"));
        }
        Ok(Self { phi, convergents: convergents(phi, Q_MAX)? })
    }

    pub fn golden() -> Self {
        Self::new(golden_mean()).expect("golden mean is a valid frequency")
    }

    /// The convergent with denominator exactly `q`, if any.
    pub fn convergent_with_denominator(&self, q: u64) -> Option<Convergent> {
        self.convergents.iter().copied().find(|c| c.q == q)
    }

    /// The convergent denominator nearest to `n` (ties go to the smaller one).
    pub fn nearest_denominator(&self, n: u64) -> u64 {
        self.convergents
            .iter()
            .map(|c| c.q)
            .min_by_key(|&q| (q.abs_diff(n), q))
            .unwrap_or(n)
    }

    /// Rational frequency used on a ring of `n` cells: the convergent p/n when
    /// one exists (`exact = true`), otherwise round(Φn)/n.
    pub fn ring_frequency(&self, n: usize) -> (f64, bool) {
        if self.phi == 0.0 || self.phi == 1.0 {
            return (self.phi, true);
        }
        match self.convergent_with_denominator(n as u64) {
            Some(c) => (c.value(), true),
            None => ((self.phi * n as f64).round() / n as f64, false),
        }
    }
}

/// A full parameter point (λ₁, λ₂, Φ, θ, ε, η).
///
/// The complexified phase θ + iε is reconstructed on demand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkParams {
    /// shift coupling λ₁
    pub coupling1: CouplingPair,
    /// coin coupling λ₂
    pub coupling2: CouplingPair,
    pub freq: FrequencySpec,
    pub theta: f64,
    pub eps: f64,
    pub eta: f64,
}

impl WalkParams {
    /// Golden-mean frequency, θ = ε = η = 0.
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        Ok(Self {
            coupling1: CouplingPair::new(lambda1)?,
            coupling2: CouplingPair::new(lambda2)?,
            freq: FrequencySpec::golden(),
            theta: 0.0,
            eps: 0.0,
            eta: 0.0,
        })
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Result<Self> {
        self.freq = FrequencySpec::new(phi)?;
        Ok(self)
    }

    pub fn lambda1(&self) -> f64 {
        self.coupling1.lambda()
    }

    pub fn lambda2(&self) -> f64 {
        self.coupling2.lambda()
    }

    pub fn phi(&self) -> f64 {
        self.freq.phi
    }

    /// Complexified phase θ + iε.
    pub fn vartheta(&self) -> Complex64 {
        Complex64::new(self.theta, self.eps)
    }

    /// Copy of these parameters with Φ replaced by the rational frequency of a
    /// ring of `n` cells. The flag is `false` when `n` is not a convergent
    /// denominator of Φ.
    pub fn for_ring(&self, n: usize) -> Result<(WalkParams, bool)> {
        let (phi_n, exact) = self.freq.ring_frequency(n);
        let mut out = self.clone();
        if phi_n != self.freq.phi {
            out.freq = FrequencySpec::new(phi_n)?;
        }
        Ok((out, exact))
    }

    /// Parameters of the Aubry dual walk: (λ₁, λ₂, η, ε) ↦ (λ₂, λ₁, −ε, −η).
    pub fn dual(&self) -> WalkParams {
        WalkParams {
            coupling1: self.coupling2,
            coupling2: self.coupling1,
            freq: self.freq.clone(),
            theta: self.theta,
            eps: -self.eta,
            eta: -self.eps,
        }
    }
}

/// Closed-form constants of a coupling pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub lambda0: f64,
    /// Lyapunov exponent of the reciprocal walk, max{0, ln λ₀}
    pub l: f64,
    /// Lyapunov exponent of the dual walk, max{0, −ln λ₀}
    pub l_sharp: f64,
    /// second-transition threshold in ε, asinh(λ₂′/λ₂)/2π
    pub eps0: f64,
    /// second-transition threshold in η, asinh(λ₁′/λ₁)/2π
    pub eta0: f64,
}

pub fn derived_constants(params: &WalkParams) -> DerivedConstants {
    let (c1, c2) = (params.coupling1, params.coupling2);
    let lambda0 = lambda0(c1, c2);
    let ln = lambda0.ln();
    DerivedConstants {
        lambda0,
        l: ln.max(0.0),
        l_sharp: (-ln).max(0.0),
        eps0: (c2.lambda_prime() / c2.lambda()).asinh() / TWO_PI,
        eta0: (c1.lambda_prime() / c1.lambda()).asinh() / TWO_PI,
    }
}

/// λ₀ = λ₂(1+λ₁′) / (λ₁(1+λ₂′)).
pub fn lambda0(c1: CouplingPair, c2: CouplingPair) -> f64 {
    c2.lambda() * (1.0 + c1.lambda_prime()) / (c1.lambda() * (1.0 + c2.lambda_prime()))
}

/// cos and sin of 2π(x + iy), evaluated through the explicit
/// cos x cosh y / sin x sinh y split with x reduced mod 1.
#[inline]
pub fn cos_sin_2pi(x: f64, y: f64) -> (Complex64, Complex64) {
    let a = TWO_PI * x.rem_euclid(1.0);
    let b = TWO_PI * y;
    let (sa, ca) = a.sin_cos();
    let (ch, sh) = (b.cosh(), b.sinh());
    (Complex64::new(ca * ch, -sa * sh), Complex64::new(sa * ch, ca * sh))
}

/// The quasiperiodic coin Q_n at complexified phase nΦ + θ + iε.
pub fn coin_matrix(n: i64, params: &WalkParams) -> Mat2 {
    coin_at(params.coupling2, n as f64 * params.phi() + params.theta, params.eps)
}

/// Coin with coupling `c` at phase x + iy.
#[inline]
pub fn coin_at(c: CouplingPair, x: f64, y: f64) -> Mat2 {
    let (cos, sin) = cos_sin_2pi(x, y);
    let (l, lp) = (c.lambda(), c.lambda_prime());
    let ilp = Complex64::new(0.0, lp);
    Mat2::new(cos * l + ilp, -sin * l, sin * l, cos * l - ilp)
}

/// Realified coin in the θ = 1/4 gauge: diagonal entries replaced by the
/// principal root (1 − λ₂² cos²(2π(nΦ+iε)))^{1/2}.
pub fn realified_coin(n: i64, lambda2: CouplingPair, phi: f64, eps: f64) -> Mat2 {
    let (cos, _) = cos_sin_2pi(n as f64 * phi, eps);
    let b = cos * lambda2.lambda();
    let r = (Complex64::new(1.0, 0.0) - b * b).sqrt();
    Mat2::new(r, -b, b, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

/// Spectral regime of the reciprocal walk from the coupling ratio.
pub fn regime(params: &WalkParams) -> Regime {
    let (l1, l2) = (params.lambda1(), params.lambda2());
    if (l1 - l2).abs() <= 1e-12 {
        Regime::Critical
    } else if l1 > l2 {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qs(v: &[Convergent]) -> Vec<u64> {
        v.iter().map(|c| c.q).collect()
    }

    #[test]
    fn golden_convergents_are_fibonacci() {
        let c = convergents(golden_mean(), 610).unwrap();
        let q = qs(&c);
        assert_eq!(&q[q.len() - 5..], &[89, 144, 233, 377, 610]);
        let mut fib = vec![1u64, 2];
        while fib.len() < q.len() {
            let k = fib.len();
            fib.push(fib[k - 1] + fib[k - 2]);
        }
        assert_eq!(q, fib);
    }

    #[test]
    fn exact_rational_terminates() {
        let c = convergents(1.0 / 3.0, 100).unwrap();
        assert_eq!(c, vec![Convergent { p: 0, q: 1 }, Convergent { p: 1, q: 3 }]);
    }

    #[test]
    fn pi_fraction_convergents() {
        let c = convergents(PI - 3.0, 120).unwrap();
        assert!(c.contains(&Convergent { p: 1, q: 7 }));
        assert!(c.contains(&Convergent { p: 16, q: 113 }));
    }

    #[test]
    fn out_of_range_frequency() {
        assert!(convergents(1.5, 10).is_err());
        assert!(convergents(0.0, 10).is_err());
    }

    #[test]
    fn coupling_domain() {
        assert!(CouplingPair::new(0.0).is_err());
        assert!(CouplingPair::new(1.2).is_err());
        assert_eq!(CouplingPair::new(1.0).unwrap().lambda_prime(), 0.0);
    }

    #[test]
    fn subcritical_constants() {
        let d = derived_constants(&WalkParams::new(0.5, 0.25).unwrap());
        assert!((d.l_sharp / TWO_PI - 0.1188).abs() < 5e-5, "{}", d.l_sharp / TWO_PI);
        assert!((d.eps0 - 0.3284).abs() < 5e-5, "{}", d.eps0);
        assert_eq!(d.l, 0.0);
    }

    #[test]
    fn fig4_constants() {
        let d = derived_constants(&WalkParams::new(0.9, 0.5).unwrap());
        assert!((d.l_sharp / TWO_PI - 0.14).abs() < 0.005);
        assert!((d.eps0 - 0.21).abs() < 0.005);
    }

    #[test]
    fn self_dual_line() {
        let d = derived_constants(&WalkParams::new(0.7, 0.7).unwrap());
        assert!((d.lambda0 - 1.0).abs() < 1e-15);
        assert_eq!(d.l, 0.0);
        assert_eq!(d.l_sharp, 0.0);
    }

    #[test]
    fn regimes() {
        assert_eq!(regime(&WalkParams::new(0.5, 0.25).unwrap()), Regime::Subcritical);
        assert_eq!(regime(&WalkParams::new(0.25, 0.5).unwrap()), Regime::Supercritical);
        assert_eq!(regime(&WalkParams::new(0.7, 0.7).unwrap()), Regime::Critical);
    }

    #[test]
    fn coin_identity_case() {
        let p = WalkParams::new(0.5, 1.0).unwrap().with_phi(0.0).unwrap();
        let q = coin_matrix(5, &p);
        assert!((q - Mat2::identity()).max_abs() < 1e-15);
    }

    #[test]
    fn coin_near_decoupling_at_eps0() {
        // at ε₀ the diagonal entry q22 = λ₂cos − iλ₂′ nearly vanishes for the
        // phase nΦ + θ = 0
        let p0 = WalkParams::new(0.5, 0.25).unwrap();
        let eps0 = derived_constants(&p0).eps0;
        let scale = coin_matrix(0, &p0).get(1, 1).norm();
        let q = coin_matrix(0, &p0.clone().with_theta(0.25).with_eps(eps0));
        let min_diag = q.get(0, 0).norm().min(q.get(1, 1).norm());
        assert!(min_diag < 1e-2 * scale, "{min_diag}");
    }

    #[test]
    fn realified_coin_cases() {
        let c = CouplingPair::new(0.6).unwrap();
        let phi = golden_mean();
        let q = realified_coin(3, c, phi, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                assert!(q.get(i, j).im.abs() < 1e-15);
            }
        }
        assert!((q.transpose() * q - Mat2::identity()).max_abs() < 1e-14);
        // cos(2πnΦ) = 0 at nΦ = 1/4
        let q = realified_coin(1, c, 0.25, 0.0);
        assert!((q - Mat2::identity()).max_abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn exponent_duality(l1 in 0.01f64..1.0, l2 in 0.01f64..1.0) {
            let a = WalkParams::new(l1, l2).unwrap();
            let b = WalkParams::new(l2, l1).unwrap();
            let (da, db) = (derived_constants(&a), derived_constants(&b));
            prop_assert!((da.lambda0 * db.lambda0 - 1.0).abs() < 1e-12);
            prop_assert!((da.l - db.l_sharp).abs() < 1e-12);
            prop_assert!(da.l * da.l_sharp == 0.0);
        }

        #[test]
        fn eps0_defining_relation(l2 in 0.01f64..1.0) {
            let d = derived_constants(&WalkParams::new(0.5, l2).unwrap());
            let c = CouplingPair::new(l2).unwrap();
            prop_assert!(((TWO_PI * d.eps0).sinh() * l2 - c.lambda_prime()).abs() < 1e-12);
        }

        #[test]
        fn coin_unitary_on_real_axis(l2 in 0.01f64..1.0, n in -500i64..500, theta in 0.0f64..1.0) {
            let p = WalkParams::new(0.5, l2).unwrap().with_theta(theta);
            let q = coin_matrix(n, &p);
            prop_assert!((q.adjoint() * q - Mat2::identity()).max_abs() < 1e-14);
            prop_assert!((q.det() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }

        #[test]
        fn realified_coin_unimodular(l2 in 0.01f64..1.0, n in -200i64..200, eps in -0.5f64..0.5) {
            let q = realified_coin(n, CouplingPair::new(l2).unwrap(), golden_mean(), eps);
            prop_assert!((q.det() - Complex64::new(1.0, 0.0)).norm() < 1e-10 * (1.0 + q.max_abs().powi(2)));
        }

        #[test]
        fn convergents_approximate(phi in 0.001f64..0.999) {
            for c in convergents(phi, 100_000).unwrap() {
                prop_assert!((phi - c.value()).abs() < 1.0 / (c.q as f64).powi(2));
            }
        }
    }
}
