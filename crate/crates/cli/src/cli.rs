//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use puamo::{golden_mean, Boundary};

use crate::config::{resolve, snap_ring_size, ConfigFile, Format, Resolved};
use crate::error::CliError;

/// Largest ring accepted by the single-spectrum commands.
pub const MAX_RING: usize = 2048;

#[derive(Debug, Parser)]
#[command(name = "puamo", version, about = "Spectra, Lyapunov exponents and winding numbers of non-reciprocal almost-Mathieu quantum walks")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// shift coupling λ₁ in (0, 1]
    #[arg(long, global = true)]
    pub l1: Option<f64>,
    /// coin coupling λ₂ in (0, 1]
    #[arg(long, global = true)]
    pub l2: Option<f64>,
    /// frequency Φ (default (√5−1)/2)
    #[arg(long, global = true)]
    pub phi: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// imaginary phase shift ε
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    /// hopping asymmetry η
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// ring size in cells; snapped to the nearest convergent denominator of Φ
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, value_parser = parse_boundary)]
    pub bc: Option<Boundary>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// seed for randomized validation draws
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

fn parse_boundary(s: &str) -> Result<Boundary, String> {
    s.parse().map_err(|e: puamo::Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues and fractal dimensions of one ring
    Spectrum(SpectrumArgs),
    /// Grid over (η, ε) of mean fractal dimension, circle fraction and Lyapunov exponents
    PhaseDiagram(PhaseDiagramArgs),
    /// Ring spectra along the ε or η axis
    SpectrumSweep(SpectrumSweepArgs),
    /// Spectral winding numbers at gap points
    Winding(WindingArgs),
    /// Numeric and closed-form left/right Lyapunov exponents
    Lyapunov(LyapunovArgs),
    /// Compares the walk with its Aubry dual
    DualityCheck,
    /// Time evolution of a localized initial state
    Evolve(EvolveArgs),
    /// Runs the invariant checks and reports them as JSON
    Validate(ValidateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::PhaseDiagram(_) => "phase-diagram",
            Command::SpectrumSweep(_) => "spectrum-sweep",
            Command::Winding(_) => "winding",
            Command::Lyapunov(_) => "lyapunov",
            Command::DualityCheck => "duality-check",
            Command::Evolve(_) => "evolve",
            Command::Validate(_) => "validate",
        }
    }

    pub fn default_ring(&self) -> usize {
        match self {
            Command::Spectrum(_) => 610,
            Command::SpectrumSweep(_) => 233,
            Command::PhaseDiagram(_) | Command::Winding(_) | Command::Lyapunov(_) => 89,
            Command::DualityCheck => 34,
            Command::Evolve(_) => 233,
            Command::Validate(_) => 21,
        }
    }

    fn takes_svg(&self) -> bool {
        matches!(self, Command::Spectrum(_) | Command::PhaseDiagram(_))
    }

    fn takes_open_bc(&self) -> bool {
        matches!(self, Command::Spectrum(_))
    }
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// radial tolerance for on_circle
    #[arg(long, default_value_t = puamo::spectral::TOL_CIRCLE)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct PhaseDiagramArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub eta_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta_max: Option<f64>,
    #[arg(long)]
    pub eta_steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps_max: Option<f64>,
    #[arg(long)]
    pub eps_steps: Option<usize>,
    /// orbit length per Lyapunov estimate
    #[arg(long, default_value_t = 4000)]
    pub lyap_steps: usize,
    /// phase samples per Lyapunov estimate
    #[arg(long, default_value_t = 8)]
    pub lyap_phases: usize,
}

/// An explicit value list or an inclusive linear range.
#[derive(Debug, Args)]
pub struct ValueList {
    /// comma-separated values
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["from", "to", "steps"])]
    pub values: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["to", "steps"])]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["from", "steps"])]
    pub to: Option<f64>,
    #[arg(long, requires_all = ["from", "to"])]
    pub steps: Option<usize>,
}

impl ValueList {
    /// The listed values, the range, or `fallback` when neither was given.
    pub fn resolve(&self, fallback: Option<f64>) -> Result<Vec<f64>, CliError> {
        let v = match (&self.values, self.from, self.to, self.steps) {
            (Some(v), ..) => v.clone(),
            (None, Some(a), Some(b), Some(k)) => puamo::sweep::Axis::linspace("", a, b, k).values,
            _ => fallback.into_iter().collect(),
        };
        if v.is_empty() {
            return Err(CliError::Usage("the value list is empty".into()));
        }
        if v.len() > puamo::sweep::MAX_AXIS_LEN {
            return Err(CliError::Usage(format!("at most {} values", puamo::sweep::MAX_AXIS_LEN)));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Usage("values must be finite".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Args)]
pub struct SpectrumSweepArgs {
    #[arg(long, value_parser = ["eps", "eta"])]
    pub axis: String,
    #[command(flatten)]
    pub values: ValueList,
}

#[derive(Debug, Args)]
pub struct WindingArgs {
    /// ε values (default: the common --eps)
    #[command(flatten)]
    pub eps: ValueList,
    /// number of widest spectral gaps to probe
    #[arg(long, conflicts_with = "z_arg")]
    pub gaps: Option<usize>,
    /// probe points e^{i·arg} on the unit circle, comma-separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub z_arg: Option<Vec<f64>>,
    /// samples of the phase loop
    #[arg(long = "M", default_value_t = puamo::winding::DEFAULT_M_THETA)]
    pub m: usize,
}

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    /// evaluation points as re,im pairs, e.g. `--z 0.6,0.8 --z -1,0`
    #[arg(long, allow_hyphen_values = true)]
    pub z: Vec<String>,
    /// when no --z is given: this many spectrum points of the reciprocal ring
    #[arg(long, default_value_t = 3)]
    pub energies: usize,
    #[arg(long, default_value_t = 20_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 16)]
    pub phases: usize,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// starting cell (default N/2)
    #[arg(long)]
    pub start: Option<usize>,
    /// start in the − component instead of +
    #[arg(long)]
    pub minus: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// ring sizes {8, 13, 21} only
    #[arg(long)]
    pub quick: bool,
    /// adds seeded noise of this size to the operators under test
    #[arg(long)]
    pub perturb: Option<f64>,
}

/// Merges flags, the config file and per-command defaults.
pub fn resolve_common(common: &Common, command: &Command) -> Result<Resolved, CliError> {
    let file = match &common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    if common.svg.is_some() && !command.takes_svg() {
        return Err(CliError::Usage(format!("--svg is not supported by {}", command.name())));
    }
    let bc = resolve(common.bc, &file, "bc", Boundary::Periodic)?;
    if bc == Boundary::Open && !command.takes_open_bc() {
        return Err(CliError::Usage(format!("{} supports only --bc periodic", command.name())));
    }
    let phi = resolve(common.phi, &file, "phi", golden_mean())?;
    let n_requested = resolve(common.n, &file, "N", command.default_ring())?;
    let n = snap_ring_size(phi, n_requested)?;
    let jobs = match common.jobs {
        Some(j) => Some(j),
        None => file.get("jobs")?,
    };
    if jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be positive".into()));
    }
    let r = Resolved {
        l1: resolve(common.l1, &file, "l1", 0.5)?,
        l2: resolve(common.l2, &file, "l2", 0.25)?,
        phi,
        theta: resolve(common.theta, &file, "theta", 0.0)?,
        eps: resolve(common.eps, &file, "eps", 0.0)?,
        eta: resolve(common.eta, &file, "eta", 0.0)?,
        n_requested,
        n,
        bc,
        seed: resolve(common.seed, &file, "seed", 0)?,
        format: resolve(common.format, &file, "out.format", Format::Csv)?,
        out: common.out.clone().or(file.get("out.path")?),
        // a config-file svg path only applies to commands that draw
        svg: if command.takes_svg() { common.svg.clone().or(file.get("out.svg")?) } else { None },
        jobs,
        file,
    };
    // validates the walk parameters up front
    r.params()?;
    Ok(r)
}
