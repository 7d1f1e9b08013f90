use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] qlimit_core::Error),

    #[error("cannot write `{}`: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("column `{column}` holds a non-finite value ({value})")]
    NonFinite { column: String, value: f64 },

    #[error("runtime check failed: {0}")]
    Check(String),

    #[error("{failed} of {total} validation checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl CliError {
    /// Process exit status: 1 for bad input, 2 for failed checks or
    /// numerical failures, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Core(qlimit_core::Error::InvalidParameter { .. }) => 1,
            CliError::Core(_) | CliError::NonFinite { .. } => 2,
            CliError::Check(_) | CliError::ChecksFailed { .. } => 2,
            CliError::Io { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
