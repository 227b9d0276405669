//! CLI error type and the exit-code mapping: 0 success, 2 configuration,
//! 3 numeric/convergence, 4 I/O.

use thiserror::Error;
use vortexcrit::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Json(_) => 4,
            CliError::Core(core) => match core {
                CoreError::InvalidParameter(_)
                | CoreError::Configuration(_)
                | CoreError::MissingData(_)
                | CoreError::Format(_) => 2,
                CoreError::Instability { .. }
                | CoreError::Convergence { .. }
                | CoreError::NonFinite(_) => 3,
                CoreError::Io(_) => 4,
            },
        }
    }
}
