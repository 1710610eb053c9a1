//! Finite-size split-step quantum walks with an almost-Mathieu coin and
//! non-reciprocal hopping.
//!
//! The crate builds dense ring realizations of the walk, computes spectra,
//! transfer-matrix Lyapunov exponents, dual and gauge-transformed operators,
//! symmetry residuals, and spectral winding numbers.

pub mod cocycle;
pub mod error;
pub mod linalg;
pub mod mat2;
pub mod params;
pub mod spectral;
pub mod sweep;
pub mod walk;
pub mod winding;

pub use error::{Error, Result};
pub use mat2::Mat2;
pub use num_complex::Complex64;
pub use params::{
    coin_matrix, convergents, derived_constants, golden_mean, realified_coin, regime, CouplingPair,
    DerivedConstants, FrequencySpec, Regime, WalkParams,
};
pub use walk::{build_walk, Boundary, RingOperator, StateVector};

/// Dense complex matrix type used for ring operators.
pub type DenseMatrix = faer::Mat<Complex64>;
