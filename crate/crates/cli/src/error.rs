use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// bad flags, flag combinations or config entries
    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Numeric(#[from] puamo::Error),

    #[error("{0}")]
    CheckFailed(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::CheckFailed(_) | CliError::Io(_) => 1,
        }
    }
}
