use puamo::cocycle::{acceleration, AccelerationBackend};
use puamo::spectral::eigendecompose;
use puamo::winding::{gap_points, winding_number, winding_profile};
use puamo::{build_walk, derived_constants, Boundary, Complex64, WalkParams};

const N: usize = 89;

fn gaps(p: &WalkParams, count: usize) -> Vec<Complex64> {
    let spec = eigendecompose(&build_walk(p, N, Boundary::Periodic).unwrap(), false).unwrap();
    gap_points(&spec, count)
}

/// (0.9, 0.5): the six widest gaps are true gaps of the limiting spectrum;
/// rank 6 is the widest gap between eigenvalues of one band.
fn subcritical() -> (WalkParams, Complex64, Complex64) {
    let p = WalkParams::new(0.9, 0.5).unwrap();
    let g = gaps(&p, 7);
    (p, g[0], g[6])
}

#[test]
fn profile_has_single_jump_above_the_mobility_edge() {
    let (p, _, z) = subcritical();
    let grid: Vec<f64> = (0..=25).map(|k| 0.01 * k as f64).collect();
    let prof = winding_profile(z, &p, N, &grid, 512).unwrap();
    let values: Vec<i64> = prof.points.iter().map(|w| w.value).collect();
    let first = values.iter().position(|&v| v != 0).unwrap();
    assert!(values[..first].iter().all(|&v| v == 0));
    assert!(values[first..].iter().all(|&v| v == -1), "{values:?}");
    let threshold = derived_constants(&p).l_sharp / (2.0 * std::f64::consts::PI);
    let jump = prof.jump.unwrap();
    assert!(jump >= threshold - 0.02, "jump {jump} below {threshold}");
    assert!((jump - threshold).abs() < 0.02, "jump {jump} vs {threshold}");
    for w in &prof.points {
        assert!(w.residual < 0.05);
    }
}

#[test]
fn wide_gap_stays_trivial_until_eps0_and_then_stays_nontrivial() {
    let (p, z, _) = subcritical();
    let eps0 = derived_constants(&p).eps0;
    for eps in [0.05, 0.18, eps0 - 0.01] {
        assert_eq!(winding_number(z, eps, &p, N, 512).unwrap().value, 0, "eps {eps}");
    }
    for eps in [eps0 + 0.01, 0.3, 0.4] {
        assert_eq!(winding_number(z, eps, &p, N, 512).unwrap().value, -1, "eps {eps}");
        assert_eq!(winding_number(z, -eps, &p, N, 512).unwrap().value, 1, "eps {}", -eps);
    }
}

#[test]
fn resolution_and_ring_size_stability() {
    let (p, wide, narrow) = subcritical();
    for (z, eps) in [(narrow, 0.18), (wide, 0.05), (wide, 0.25)] {
        let a = winding_number(z, eps, &p, N, 1024).unwrap();
        let b = winding_number(z, eps, &p, N, 2048).unwrap();
        assert!((a.raw - b.raw).abs() < 1e-3, "{} vs {}", a.raw, b.raw);
    }
    for (z, eps) in [(wide, 0.05), (wide, 0.25)] {
        let a = winding_number(z, eps, &p, N, 1024).unwrap();
        let b = winding_number(z, eps, &p, 144, 1024).unwrap();
        assert!((a.raw - b.raw).abs() < 0.05, "{} vs {}", a.raw, b.raw);
    }
}

#[test]
fn winding_matches_acceleration_only_below_eps0() {
    let (p, _, z) = subcritical();
    let backend = AccelerationBackend::Numeric { n_steps: 20_000, n_phases: 16 };
    let at = |eps: f64| {
        let w = winding_number(z, eps, &p, N, 512).unwrap().value;
        let a = acceleration(z, &p.clone().with_eps(eps), 0.01, backend).unwrap().value;
        (w, a)
    };
    let (w, a) = at(0.18);
    assert_eq!(w, -a.round() as i64, "accel {a}");
    assert!((a - 1.0).abs() < 0.05);
    // above ε₀ the exponent is flat but the winding number stays at −1
    let (w, a) = at(0.25);
    assert_eq!(w, -1);
    assert!(a.abs() < 0.05, "accel {a}");
    assert_ne!(w, -a.round() as i64);
}

#[test]
fn critical_coupling_jumps_at_first_grid_point() {
    let p = WalkParams::new(0.6, 0.6).unwrap();
    let g = gaps(&p, 61);
    let z = g[60];
    let prof = winding_profile(z, &p, N, &[0.0, 0.01, 0.02], 512).unwrap();
    let values: Vec<i64> = prof.points.iter().map(|w| w.value).collect();
    assert_eq!(values[0], 0);
    assert_eq!(values[1].abs(), 1, "{values:?}");
    assert!((prof.jump.unwrap() - 0.005).abs() < 1e-12);
}

#[test]
fn reciprocal_unitary_walk_has_no_winding() {
    let (p, _, _) = subcritical();
    for z in gaps(&p, 12) {
        assert_eq!(winding_number(z, 0.0, &p, N, 256).unwrap().value, 0);
    }
}
