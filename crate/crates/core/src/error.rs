use thiserror::Error;

/// Errors raised by the walk, cocycle and spectral routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coin at cell {cell} is off-diagonal (vanishing q22), transfer matrix undefined")]
    SingularCoin { cell: i64 },

    #[error("principal square root undefined for coin block at cell {cell}")]
    SingularBranch { cell: usize },

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("operator is numerically singular (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("structural violation: {0}")]
    Structural(String),

    #[error("z = {z_re:+.6}{z_im:+.6}i is too close to the spectrum (relative pivot {pivot:.3e})")]
    NearSpectrum { z_re: f64, z_im: f64, pivot: f64 },

    #[error("insufficient theta resolution near theta = {theta:.6}")]
    InsufficientResolution { theta: f64 },

    #[error("{skipped} of {total} phase samples hit a singular transfer matrix")]
    TooManySkipped { skipped: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
