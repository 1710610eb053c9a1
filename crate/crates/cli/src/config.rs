//! Flat `key = value` run configuration and its merge with command-line
//! flags.
//!
//! Recognized keys: `l1 l2 phi theta eps eta N bc jobs seed`,
//! `grid.eta_min grid.eta_max grid.eta_steps grid.eps_min grid.eps_max
//! grid.eps_steps`, `out.path out.format out.svg`. Lines starting with `#`
//! are comments. Flags always win over file values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use puamo::{Boundary, FrequencySpec, WalkParams};
use serde::Serialize;

use crate::error::CliError;

const KEYS: &[&str] = &[
    "l1",
    "l2",
    "phi",
    "theta",
    "eps",
    "eta",
    "N",
    "bc",
    "jobs",
    "seed",
    "grid.eta_min",
    "grid.eta_max",
    "grid.eta_steps",
    "grid.eps_min",
    "grid.eps_max",
    "grid.eps_steps",
    "out.path",
    "out.format",
    "out.svg",
];

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(CliError::Usage(format!("config line {}: unknown key '{k}'", lineno + 1)));
            }
            entries.insert(k.to_string(), v.to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config key '{key}': cannot parse '{v}'"))),
        }
    }
}

/// Picks the flag, then the file value, then the default.
pub fn resolve<T: FromStr>(flag: Option<T>, file: &ConfigFile, key: &str, default: T) -> Result<T, CliError> {
    Ok(match flag {
        Some(v) => v,
        None => file.get(key)?.unwrap_or(default),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

/// Walk and output settings shared by every subcommand, after merging.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub l1: f64,
    pub l2: f64,
    pub phi: f64,
    pub theta: f64,
    pub eps: f64,
    pub eta: f64,
    /// ring size as requested
    pub n_requested: usize,
    /// ring size actually used (nearest convergent denominator of phi)
    #[serde(rename = "N")]
    pub n: usize,
    pub bc: Boundary,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    #[serde(skip)]
    pub jobs: Option<usize>,
    /// parsed config file, for subcommand-specific keys
    #[serde(skip)]
    pub file: ConfigFile,
}

impl Resolved {
    pub fn params(&self) -> Result<WalkParams, CliError> {
        let p = WalkParams::new(self.l1, self.l2)
            .map_err(|e| CliError::Usage(e.to_string()))?
            .with_phi(self.phi)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(p.with_theta(self.theta).with_eps(self.eps).with_eta(self.eta))
    }
}

/// Nearest convergent denominator of `phi` to `n`, warning when it differs.
pub fn snap_ring_size(phi: f64, n: usize) -> Result<usize, CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!("--N must be at least 2, got {n}")));
    }
    if phi == 0.0 || phi == 1.0 {
        return Ok(n);
    }
    let freq = FrequencySpec::new(phi).map_err(|e| CliError::Usage(e.to_string()))?;
    let snapped = freq.nearest_denominator(n as u64) as usize;
    if snapped < 2 {
        return Err(CliError::Usage(format!("phi = {phi} has no convergent denominator near {n}")));
    }
    if snapped != n {
        log::warn!("N = {n} is not a convergent denominator of phi = {phi}; using N = {snapped}");
    }
    Ok(snapped)
}
