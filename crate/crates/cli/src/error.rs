use std::path::PathBuf;

use l1inf_core::Error as CoreError;
use thiserror::Error;

/// Process exit codes.
pub const EXIT_IO: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_DIVERGENCE: i32 = 4;
pub const EXIT_INTERNAL: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        column: usize,
        message: String,
    },

    #[error("invalid parameter: {0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } => EXIT_IO,
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Core(CoreError::InvalidInput(_)) => EXIT_INVALID,
            CliError::Core(CoreError::Divergence { .. }) => EXIT_DIVERGENCE,
            CliError::Core(_) => EXIT_INTERNAL,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
