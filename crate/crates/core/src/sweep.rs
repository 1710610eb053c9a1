//! Parameter sweeps over (η, ε): phase-diagram grids and spectrum sweeps.
//!
//! Cells are evaluated on a worker pool and written back by index, so the
//! row-major layout of a [`SweepGrid`] never depends on scheduling.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::{lyapunov_closed_form, lyapunov_numeric, Direction};
use crate::error::{domain, Error, Result};
use crate::spectral::{circle_counts, eigendecompose, SpectrumResult, TOL_CIRCLE};
use crate::walk::{build_walk, Boundary};
use crate::WalkParams;

/// Largest grid accepted along either axis.
pub const MAX_AXIS_LEN: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Eps,
    Eta,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Eps => "eps",
            SweepAxis::Eta => "eta",
        }
    }

    pub fn apply(self, params: &WalkParams, value: f64) -> WalkParams {
        match self {
            SweepAxis::Eps => params.clone().with_eps(value),
            SweepAxis::Eta => params.clone().with_eta(value),
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eps" => Ok(SweepAxis::Eps),
            "eta" => Ok(SweepAxis::Eta),
            other => domain(format!("unknown sweep axis '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self { name: name.into(), values }
    }

    /// `count` equispaced points on [lo, hi]; a single point sits at `lo`.
    pub fn linspace(name: impl Into<String>, lo: f64, hi: f64, count: usize) -> Self {
        let values = match count {
            0 => Vec::new(),
            1 => vec![lo],
            k => (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect(),
        };
        Self::new(name, values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellResult {
    pub mean_fractal_dim: f64,
    pub frac_on_circle: f64,
    pub lyap_left: f64,
    pub lyap_right: f64,
    pub n_eigen: usize,
}

/// Row-major grid: cell (i, j) pairs `axis1.values[i]` with `axis2.values[j]`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepGrid {
    pub axis1: Axis,
    pub axis2: Axis,
    pub cells: Vec<CellResult>,
}

impl SweepGrid {
    pub fn rows(&self) -> usize {
        self.axis1.values.len()
    }

    pub fn cols(&self) -> usize {
        self.axis2.values.len()
    }

    pub fn cell(&self, i: usize, j: usize) -> &CellResult {
        &self.cells[i * self.cols() + j]
    }
}

/// How the per-cell Lyapunov exponents are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovSampling {
    pub n_steps: usize,
    pub n_phases: usize,
    /// eigenvalues of the reciprocal ring used as energies
    pub n_energies: usize,
}

impl Default for LyapunovSampling {
    fn default() -> Self {
        Self { n_steps: 4000, n_phases: 8, n_energies: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseDiagramConfig {
    pub n_cells: usize,
    pub tol_circle: f64,
    pub lyapunov: LyapunovSampling,
    /// worker threads; `None` uses every available core
    pub jobs: Option<usize>,
}

impl Default for PhaseDiagramConfig {
    fn default() -> Self {
        Self { n_cells: 89, tol_circle: TOL_CIRCLE, lyapunov: LyapunovSampling::default(), jobs: None }
    }
}

/// Runs `f` on a pool of `jobs` workers (the global pool when `None`).
pub fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => domain("jobs must be positive"),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Picks `count` eigenvalues spread evenly through a sorted spectrum.
pub fn spread(eigs: &[Complex64], count: usize) -> Vec<Complex64> {
    let k = count.min(eigs.len()).max(1);
    (0..k).map(|i| eigs[(2 * i + 1) * eigs.len() / (2 * k)]).collect()
}

/// Mean fractal dimension, fraction on the unit circle and mean left/right
/// Lyapunov exponents on (η, ε) grid cells. Axis 1 is η, axis 2 is ε.
pub fn phase_diagram(
    params: &WalkParams,
    eta_values: &[f64],
    eps_values: &[f64],
    config: &PhaseDiagramConfig,
) -> Result<SweepGrid> {
    if eta_values.is_empty() || eps_values.is_empty() {
        return domain("phase diagram axes must be non-empty");
    }
    if eta_values.len() > MAX_AXIS_LEN || eps_values.len() > MAX_AXIS_LEN {
        return domain(format!("phase diagram grids are limited to {MAX_AXIS_LEN}x{MAX_AXIS_LEN}"));
    }
    let n = config.n_cells;
    let ls = config.lyapunov;
    with_pool(config.jobs, || -> Result<SweepGrid> {
        // Lyapunov energies per ε come from the reciprocal ring
        let energies: Vec<Vec<Complex64>> = eps_values
            .par_iter()
            .map(|&e| {
                let s = eigendecompose(&build_walk(&params.clone().with_eta(0.0).with_eps(e), n, Boundary::Periodic)?, false)?;
                Ok(spread(&s.eigenvalues, ls.n_energies))
            })
            .collect::<Result<_>>()?;
        let cols = eps_values.len();
        let cells: Vec<CellResult> = (0..eta_values.len() * cols)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / cols, idx % cols);
                let p = params.clone().with_eta(eta_values[i]).with_eps(eps_values[j]);
                evaluate_cell(&p, n, config.tol_circle, &energies[j], ls)
            })
            .collect::<Result<_>>()?;
        Ok(SweepGrid { axis1: Axis::new("eta", eta_values.to_vec()), axis2: Axis::new("eps", eps_values.to_vec()), cells })
    })?
}

fn evaluate_cell(
    p: &WalkParams,
    n: usize,
    tol: f64,
    energies: &[Complex64],
    ls: LyapunovSampling,
) -> Result<CellResult> {
    let spec = eigendecompose(&build_walk(p, n, Boundary::Periodic)?, true)?;
    let dims = spec.fractal_dims.as_deref().unwrap_or_default();
    let mean_fractal_dim = dims.iter().sum::<f64>() / dims.len().max(1) as f64;
    let counts = circle_counts(&spec.eigenvalues, tol);
    let (mut left, mut right) = (0.0, 0.0);
    for &z in energies {
        right += lyapunov_numeric(z, p, ls.n_steps, ls.n_phases, Direction::Right)?.value;
        left += lyapunov_numeric(z, p, ls.n_steps, ls.n_phases, Direction::Left)?.value;
    }
    let k = energies.len().max(1) as f64;
    let cell = CellResult {
        mean_fractal_dim,
        frac_on_circle: 1.0 - counts.off_fraction(),
        lyap_left: left / k,
        lyap_right: right / k,
        n_eigen: spec.eigenvalues.len(),
    };
    if ![cell.mean_fractal_dim, cell.frac_on_circle, cell.lyap_left, cell.lyap_right].iter().all(|x| x.is_finite()) {
        return Err(Error::NoConvergence(format!("non-finite cell result at eta = {}, eps = {}", p.eta, p.eps)));
    }
    Ok(cell)
}

/// Closed-form delocalized region: both directional exponents vanish or
/// change sign, min(L_left, L_right) ≤ 0.
pub fn closed_form_mask(params: &WalkParams, eta_values: &[f64], eps_values: &[f64]) -> Vec<bool> {
    let mut mask = Vec::with_capacity(eta_values.len() * eps_values.len());
    for &eta in eta_values {
        for &eps in eps_values {
            let c = lyapunov_closed_form(&params.clone().with_eta(eta).with_eps(eps));
            mask.push(c.left.min(c.right) <= 1e-12);
        }
    }
    mask
}

/// Cells whose mean fractal dimension lies strictly above the grid median.
pub fn empirical_mask(grid: &SweepGrid) -> Vec<bool> {
    let mut dims: Vec<f64> = grid.cells.iter().map(|c| c.mean_fractal_dim).collect();
    dims.sort_by(f64::total_cmp);
    let k = dims.len();
    let median = if k % 2 == 1 { dims[k / 2] } else { 0.5 * (dims[k / 2 - 1] + dims[k / 2]) };
    grid.cells.iter().map(|c| c.mean_fractal_dim > median).collect()
}

/// Largest Chebyshev distance (in cells) from a cell where `observed`
/// disagrees with `reference` to the nearest reference cell that carries
/// the observed label. `None` when a label is absent from the reference.
pub fn boundary_deviation(observed: &[bool], reference: &[bool], rows: usize, cols: usize) -> Option<usize> {
    assert_eq!(observed.len(), rows * cols);
    assert_eq!(reference.len(), rows * cols);
    let mut worst = 0;
    for idx in 0..rows * cols {
        if observed[idx] == reference[idx] {
            continue;
        }
        let (i, j) = (idx / cols, idx % cols);
        let d = (0..rows * cols)
            .filter(|&k| reference[k] == observed[idx])
            .map(|k| (k / cols).abs_diff(i).max((k % cols).abs_diff(j)))
            .min()?;
        worst = worst.max(d);
    }
    Some(worst)
}

#[derive(Debug, Clone)]
pub struct SweepSpectrum {
    pub value: f64,
    pub spectrum: SpectrumResult,
}

/// Ring spectra (with fractal dimensions) along one parameter axis.
pub fn spectrum_sweep(
    params: &WalkParams,
    axis: SweepAxis,
    values: &[f64],
    n: usize,
    jobs: Option<usize>,
) -> Result<Vec<SweepSpectrum>> {
    if values.is_empty() {
        return domain("sweep needs at least one value");
    }
    with_pool(jobs, || {
        values
            .par_iter()
            .map(|&v| {
                let op = build_walk(&axis.apply(params, v), n, Boundary::Periodic)?;
                Ok(SweepSpectrum { value: v, spectrum: eigendecompose(&op, true)? })
            })
            .collect::<Result<Vec<_>>>()
    })?
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let a = Axis::linspace("eps", -0.5, 0.5, 21);
        assert_eq!(a.values.len(), 21);
        assert_eq!(a.values[0], -0.5);
        assert_eq!(a.values[20], 0.5);
        assert!(a.values[10].abs() < 1e-15);
        assert_eq!(Axis::linspace("x", 0.3, 0.9, 1).values, vec![0.3]);
    }

    #[test]
    fn single_cell_grid() {
        let p = WalkParams::new(0.5, 0.25).unwrap();
        let cfg = PhaseDiagramConfig { n_cells: 8, ..Default::default() };
        let g = phase_diagram(&p, &[0.0], &[0.0], &cfg).unwrap();
        assert_eq!(g.cells.len(), 1);
        let c = g.cell(0, 0);
        assert_eq!(c.n_eigen, 16);
        assert_eq!(c.frac_on_circle, 1.0);
        assert!(c.lyap_left.abs() < 0.05 && c.lyap_right.abs() < 0.05);
    }

    #[test]
    fn layout_is_row_major_and_scheduler_independent() {
        let p = WalkParams::new(0.5, 0.25).unwrap();
        let etas = [0.0, 0.1, -0.2];
        let epss = [0.0, 0.35];
        let mk = |jobs| phase_diagram(&p, &etas, &epss, &PhaseDiagramConfig { n_cells: 13, jobs, ..Default::default() }).unwrap();
        let (g1, g4) = (mk(Some(1)), mk(Some(4)));
        assert_eq!(g1.cells, g4.cells);
        for (i, &eta) in etas.iter().enumerate() {
            for (j, &eps) in epss.iter().enumerate() {
                let single = phase_diagram(&p, &[eta], &[eps], &PhaseDiagramConfig { n_cells: 13, ..Default::default() }).unwrap();
                assert_eq!(g1.cell(i, j).mean_fractal_dim, single.cells[0].mean_fractal_dim);
            }
        }
    }

    #[test]
    fn rejects_oversized_and_empty_grids() {
        let p = WalkParams::new(0.5, 0.25).unwrap();
        let big = vec![0.0; MAX_AXIS_LEN + 1];
        assert!(phase_diagram(&p, &big, &[0.0], &PhaseDiagramConfig::default()).is_err());
        assert!(phase_diagram(&p, &[], &[0.0], &PhaseDiagramConfig::default()).is_err());
        assert!(spectrum_sweep(&p, SweepAxis::Eps, &[], 8, None).is_err());
    }

    #[test]
    fn closed_form_mask_reciprocal_row() {
        // η = 0: delocalized exactly for |ε| ≤ L♯/2π ≈ 0.1188
        let p = WalkParams::new(0.5, 0.25).unwrap();
        let eps = [-0.2, -0.11, 0.0, 0.11, 0.13, 0.4];
        assert_eq!(closed_form_mask(&p, &[0.0], &eps), vec![false, true, true, true, false, false]);
    }

    #[test]
    fn deviation_counts_distance_to_matching_label() {
        // reference: left two columns true
        let reference: Vec<bool> = (0..25).map(|k| k % 5 < 2).collect();
        let mut observed = reference.clone();
        assert_eq!(boundary_deviation(&observed, &reference, 5, 5), Some(0));
        observed[4] = true; // row 0, col 4: nearest true reference cell is col 1
        assert_eq!(boundary_deviation(&observed, &reference, 5, 5), Some(3));
        observed[4] = false;
        observed[10] = false; // row 2, col 0: nearest false reference cell is col 2
        assert_eq!(boundary_deviation(&observed, &reference, 5, 5), Some(2));
        assert_eq!(boundary_deviation(&[true], &[false], 1, 1), None);
    }

    #[test]
    fn median_split() {
        let cell = |g| CellResult { mean_fractal_dim: g, frac_on_circle: 1.0, lyap_left: 0.0, lyap_right: 0.0, n_eigen: 2 };
        let grid = SweepGrid {
            axis1: Axis::new("eta", vec![0.0]),
            axis2: Axis::new("eps", vec![0.0, 1.0, 2.0, 3.0]),
            cells: vec![cell(0.9), cell(0.1), cell(0.5), cell(0.7)],
        };
        assert_eq!(empirical_mask(&grid), vec![true, false, false, true]);
    }
}
