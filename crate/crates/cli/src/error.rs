use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_EXTINCT: i32 = 3;
pub const EXIT_UNSUPPORTED: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Core(#[from] clipflow_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 4 for requests the model cannot honor (non-Lipschitz growth, unmet
    /// hypotheses), 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        use clipflow_core::Error as E;
        match self {
            CliError::Unsupported(_) => EXIT_UNSUPPORTED,
            CliError::Core(E::UnsupportedGrowth(_) | E::Hypothesis(_)) => EXIT_UNSUPPORTED,
            _ => EXIT_ERROR,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
