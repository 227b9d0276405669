//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the diagnostics library.
///
/// The CLI maps these onto process exit codes: configuration/parameter
/// errors → 2, numeric instability/convergence failures → 3, I/O → 4.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A physical configuration cannot be realized (ring does not fit,
    /// cores overlap, ...).
    #[error("invalid configuration: {0}")]
    Configuration(String),

    /// Time stepping produced a non-finite value.
    #[error("numerical instability at t = {time}: non-finite field after step of dt = {dt}")]
    Instability { time: f64, dt: f64 },

    /// An iterative solve did not reach its tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    /// Input data contains NaN or infinity.
    #[error("non-finite data: {0}")]
    NonFinite(String),

    /// A report needs data that was not stored.
    #[error("missing data: {0}")]
    MissingData(String),

    /// A file is not in the expected format.
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
