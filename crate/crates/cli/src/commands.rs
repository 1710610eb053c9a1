//! Subcommands other than `validate`.

use std::f64::consts::PI;

use puamo::cocycle::{lyapunov_closed_form, lyapunov_numeric, Direction};
use puamo::linalg::{adjoint, max_abs_diff};
use puamo::spectral::{eigendecompose, walk_spectrum};
use puamo::sweep::{phase_diagram, spectrum_sweep, spread, with_pool, Axis, LyapunovSampling, PhaseDiagramConfig, SweepAxis};
use puamo::walk::{build_dual_walk, dual_unitary, evolve};
use puamo::winding::{gap_points, winding_number};
use puamo::{build_walk, derived_constants, Boundary, Complex64, StateVector};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cli::{EvolveArgs, LyapunovArgs, PhaseDiagramArgs, SpectrumArgs, SpectrumSweepArgs, WindingArgs, MAX_RING};
use crate::config::{resolve, Resolved};
use crate::error::CliError;
use crate::output::{emit, write_text, Cell, Table};
use crate::svg::{complex_scatter, Heatmap};
use crate::validate::multiset_gap;

/// Resolved configuration plus the command name and its own options.
pub fn meta(r: &Resolved, command: &str, options: Value) -> Value {
    let mut m = serde_json::to_value(r).expect("configuration serializes");
    m["command"] = Value::from(command);
    m["options"] = options;
    m
}

fn finish(r: &Resolved, command: &str, options: Value, table: &Table) -> Result<(), CliError> {
    emit(table, r.format, &meta(r, command, options), r.out.as_deref())
}

fn check_ring(r: &Resolved) -> Result<(), CliError> {
    if r.n > MAX_RING {
        return Err(CliError::Usage(format!("--N {} exceeds {MAX_RING}", r.n)));
    }
    Ok(())
}

pub fn spectrum(r: &Resolved, a: &SpectrumArgs) -> Result<(), CliError> {
    check_ring(r)?;
    if !(a.tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", a.tol)));
    }
    let p = r.params()?;
    let spec = eigendecompose(&build_walk(&p, r.n, r.bc)?, true)?;
    let dims = spec.fractal_dims.clone().unwrap_or_default();
    let mut t = Table::new(vec!["re", "im", "abs", "arg", "fractal_dim", "on_circle"]);
    for (z, &d) in spec.eigenvalues.iter().zip(&dims) {
        let on = (z.norm() - 1.0).abs() <= a.tol;
        t.push(vec![z.re.into(), z.im.into(), z.norm().into(), z.arg().into(), d.into(), on.into()]);
    }
    if let Some(path) = &r.svg {
        let pts: Vec<(f64, f64, f64)> = spec.eigenvalues.iter().zip(&dims).map(|(z, &d)| (z.re, z.im, d)).collect();
        let title = format!("l1={} l2={} eps={} eta={} N={}", r.l1, r.l2, r.eps, r.eta, r.n);
        write_text(&complex_scatter(&pts, &title), Some(path))?;
    }
    finish(r, "spectrum", json!({ "tol": a.tol }), &t)
}

pub fn phase_diagram_cmd(r: &Resolved, a: &PhaseDiagramArgs) -> Result<(), CliError> {
    let f = &r.file;
    let eta_min = resolve(a.eta_min, f, "grid.eta_min", -0.5)?;
    let eta_max = resolve(a.eta_max, f, "grid.eta_max", 0.5)?;
    let eta_steps = resolve(a.eta_steps, f, "grid.eta_steps", 21)?;
    let eps_min = resolve(a.eps_min, f, "grid.eps_min", -0.5)?;
    let eps_max = resolve(a.eps_max, f, "grid.eps_max", 0.5)?;
    let eps_steps = resolve(a.eps_steps, f, "grid.eps_steps", 21)?;
    let max = puamo::sweep::MAX_AXIS_LEN;
    for (name, steps) in [("eta", eta_steps), ("eps", eps_steps)] {
        if steps == 0 || steps > max {
            return Err(CliError::Usage(format!("--{name}-steps must be in 1..={max}, got {steps}")));
        }
    }
    if !(eta_min <= eta_max && eps_min <= eps_max) {
        return Err(CliError::Usage("grid minimum exceeds maximum".into()));
    }
    if a.lyap_steps == 0 || a.lyap_phases == 0 {
        return Err(CliError::Usage("--lyap-steps and --lyap-phases must be positive".into()));
    }
    check_ring(r)?;
    let p = r.params()?;
    let etas = Axis::linspace("eta", eta_min, eta_max, eta_steps).values;
    let epss = Axis::linspace("eps", eps_min, eps_max, eps_steps).values;
    let config = PhaseDiagramConfig {
        n_cells: r.n,
        lyapunov: LyapunovSampling { n_steps: a.lyap_steps, n_phases: a.lyap_phases, ..Default::default() },
        jobs: r.jobs,
        ..Default::default()
    };
    let grid = phase_diagram(&p, &etas, &epss, &config)?;
    let mut t = Table::new(vec!["eta", "eps", "mean_fractal_dim", "frac_on_circle", "lyap_left", "lyap_right"]);
    for (i, &eta) in etas.iter().enumerate() {
        for (j, &eps) in epss.iter().enumerate() {
            let c = grid.cell(i, j);
            t.push(vec![
                eta.into(),
                eps.into(),
                c.mean_fractal_dim.into(),
                c.frac_on_circle.into(),
                c.lyap_left.into(),
                c.lyap_right.into(),
            ]);
        }
    }
    if let Some(path) = &r.svg {
        let values: Vec<Vec<f64>> =
            (0..grid.rows()).map(|i| (0..grid.cols()).map(|j| grid.cell(i, j).mean_fractal_dim).collect()).collect();
        // L_left = 0 and L_right = 0 lie on η = ±base(ε)/2π
        let curve: Vec<(f64, f64)> = Axis::linspace("eps", eps_min, eps_max, 401)
            .values
            .into_iter()
            .map(|e| (e, lyapunov_closed_form(&p.clone().with_eta(0.0).with_eps(e)).right / (2.0 * PI)))
            .collect();
        let mirrored = curve.iter().map(|&(e, h)| (e, -h)).collect();
        let title = format!("mean fractal dimension, l1={} l2={} N={}", r.l1, r.l2, r.n);
        let hm = Heatmap {
            values: &values,
            x_range: (eps_min, eps_max),
            y_range: (eta_min, eta_max),
            x_label: "eps",
            y_label: "eta",
            title: &title,
            overlays: vec![curve, mirrored],
        };
        write_text(&hm.render(), Some(path))?;
    }
    let options = json!({
        "grid": {
            "eta_min": eta_min, "eta_max": eta_max, "eta_steps": eta_steps,
            "eps_min": eps_min, "eps_max": eps_max, "eps_steps": eps_steps,
        },
        "lyap_steps": a.lyap_steps,
        "lyap_phases": a.lyap_phases,
        "lyap_energies": config.lyapunov.n_energies,
    });
    finish(r, "phase-diagram", options, &t)
}

pub fn spectrum_sweep_cmd(r: &Resolved, a: &SpectrumSweepArgs) -> Result<(), CliError> {
    check_ring(r)?;
    let axis: SweepAxis = a.axis.parse().map_err(|e: puamo::Error| CliError::Usage(e.to_string()))?;
    let values = a.values.resolve(None)?;
    let p = r.params()?;
    let d = derived_constants(&p);
    let edge = d.l_sharp / (2.0 * PI);
    let sweep = spectrum_sweep(&p, axis, &values, r.n, r.jobs)?;
    let mut t = Table::new(vec![
        "sweep_value",
        "re",
        "im",
        "abs",
        "fractal_dim",
        "L_sharp_over_2pi",
        "eps0",
        "eta0",
    ]);
    for s in &sweep {
        let dims = s.spectrum.fractal_dims.as_deref().unwrap_or_default();
        for (z, &g) in s.spectrum.eigenvalues.iter().zip(dims) {
            t.push(vec![
                s.value.into(),
                z.re.into(),
                z.im.into(),
                z.norm().into(),
                g.into(),
                edge.into(),
                d.eps0.into(),
                d.eta0.into(),
            ]);
        }
    }
    finish(r, "spectrum-sweep", json!({ "axis": axis.name(), "values": values }), &t)
}

pub fn winding_cmd(r: &Resolved, a: &WindingArgs) -> Result<(), CliError> {
    if a.m < 4 {
        return Err(CliError::Usage(format!("--M must be at least 4, got {}", a.m)));
    }
    check_ring(r)?;
    let eps_values = a.eps.resolve(Some(r.eps))?;
    let p = r.params()?;
    let points: Vec<Complex64> = match &a.z_arg {
        Some(args) if args.is_empty() => return Err(CliError::Usage("--z-arg list is empty".into())),
        Some(args) => args.iter().map(|&t| Complex64::from_polar(1.0, t)).collect(),
        None => {
            let count = a.gaps.unwrap_or(8);
            if count == 0 {
                return Err(CliError::Usage("--gaps must be positive".into()));
            }
            // gaps of the unitary walk
            let unitary = p.clone().with_eps(0.0).with_eta(0.0);
            let spec = eigendecompose(&build_walk(&unitary, r.n, Boundary::Periodic)?, false)?;
            gap_points(&spec, count)
        }
    };
    if points.is_empty() {
        return Err(CliError::CheckFailed("the spectrum has no gaps to probe".into()));
    }
    let jobs: Vec<(f64, Complex64)> = eps_values.iter().flat_map(|&e| points.iter().map(move |&z| (e, z))).collect();
    let results = with_pool(r.jobs, || {
        jobs.par_iter()
            .map(|&(e, z)| winding_number(z, e, &p, r.n, a.m))
            .collect::<Result<Vec<_>, _>>()
    })??;
    let mut t = Table::new(vec!["eps", "z_re", "z_im", "winding_raw", "winding_int", "residual"]);
    for w in &results {
        t.push(vec![w.eps.into(), w.z.re.into(), w.z.im.into(), w.raw.into(), w.value.into(), w.residual.into()]);
    }
    let options = json!({ "M": a.m, "eps_values": eps_values, "gaps": a.gaps, "z_arg": a.z_arg });
    finish(r, "winding", options, &t)
}

fn parse_point(s: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Usage(format!("--z expects re,im, got '{s}'"));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    let z = Complex64::new(re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?);
    if !z.is_finite() || z.norm() == 0.0 {
        return Err(CliError::Usage(format!("--z must be finite and nonzero, got '{s}'")));
    }
    Ok(z)
}

pub fn lyapunov_cmd(r: &Resolved, a: &LyapunovArgs) -> Result<(), CliError> {
    if a.steps == 0 || a.phases == 0 || a.energies == 0 {
        return Err(CliError::Usage("--steps, --phases and --energies must be positive".into()));
    }
    check_ring(r)?;
    let p = r.params()?;
    let points: Vec<Complex64> = if a.z.is_empty() {
        spread(&walk_spectrum(&p.clone().with_eta(0.0), r.n)?, a.energies)
    } else {
        a.z.iter().map(|s| parse_point(s)).collect::<Result<_, _>>()?
    };
    let cf = lyapunov_closed_form(&p);
    let jobs: Vec<(Complex64, Direction)> =
        points.iter().flat_map(|&z| [Direction::Left, Direction::Right].map(|d| (z, d))).collect();
    let results = with_pool(r.jobs, || {
        jobs.par_iter()
            .map(|&(z, d)| lyapunov_numeric(z, &p, a.steps, a.phases, d))
            .collect::<Result<Vec<_>, _>>()
    })??;
    let mut t = Table::new(vec!["z_re", "z_im", "direction", "numeric", "std_error", "closed_form"]);
    for (&(z, d), est) in jobs.iter().zip(&results) {
        let (name, closed) = match d {
            Direction::Left => ("left", cf.left),
            Direction::Right => ("right", cf.right),
        };
        t.push(vec![z.re.into(), z.im.into(), name.into(), est.value.into(), est.std_error.into(), closed.into()]);
    }
    let options = json!({ "steps": a.steps, "phases": a.phases, "energies": a.energies, "z": a.z });
    finish(r, "lyapunov", options, &t)
}

/// Largest eigenvalue mismatch between walk and dual, and ‖UWU† − D‖_max.
pub const DUALITY_SPECTRUM_TOL: f64 = 1e-8;
pub const DUALITY_OPERATOR_TOL: f64 = 1e-10;

pub fn duality_check(r: &Resolved) -> Result<(), CliError> {
    check_ring(r)?;
    let p = r.params()?;
    let w = build_walk(&p, r.n, Boundary::Periodic)?;
    let d = build_dual_walk(&p, r.n)?;
    let u = dual_unitary(&p, r.n)?;
    let sw = eigendecompose(&w, false)?.eigenvalues;
    let sd = eigendecompose(&d, false)?.eigenvalues;
    let spectral = multiset_gap(&sw, &sd);
    let conj = &(&u * &w.matrix) * &adjoint(u.as_ref());
    let operator = max_abs_diff(conj.as_ref(), d.matrix.as_ref());
    let checks = [("spectral_mismatch", spectral, DUALITY_SPECTRUM_TOL), ("operator_residual", operator, DUALITY_OPERATOR_TOL)];
    let mut t = Table::new(vec!["check", "measured", "threshold", "pass"]);
    for (name, m, tol) in checks {
        t.push(vec![name.into(), m.into(), tol.into(), Cell::Bool(m < tol)]);
    }
    finish(r, "duality-check", json!({}), &t)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !(c.1 < c.2)).map(|c| c.0).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("duality check failed: {}", failed.join(", "))))
    }
}

pub fn evolve_cmd(r: &Resolved, a: &EvolveArgs) -> Result<(), CliError> {
    let start = a.start.unwrap_or(r.n / 2);
    if start >= r.n {
        return Err(CliError::Usage(format!("--start {start} is outside a ring of {} cells", r.n)));
    }
    let p = r.params()?;
    let records = evolve(&p, &StateVector::delta(r.n, start, !a.minus), a.steps)?;
    let mut t = Table::new(vec!["step", "second_moment", "participation"]);
    for rec in &records {
        t.push(vec![rec.step.into(), rec.second_moment.into(), rec.participation.into()]);
    }
    finish(r, "evolve", json!({ "steps": a.steps, "start": start, "minus": a.minus }), &t)
}
