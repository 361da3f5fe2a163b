use std::path::PathBuf;

use thiserror::Error;
use zar_core::ZarError;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or configuration.
    #[error("{0}")]
    Usage(String),

    /// Input data that cannot be read or modeled.
    #[error("{0}")]
    Data(String),

    #[error("{0}")]
    NonConvergence(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) | CliError::Io { .. } => 2,
            CliError::NonConvergence(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<ZarError> for CliError {
    fn from(e: ZarError) -> Self {
        match e {
            ZarError::InvalidSpec(_) | ZarError::UnsupportedResidual { .. } => CliError::Usage(e.to_string()),
            ZarError::TooManyFailures { .. } | ZarError::NonPsdCovariance(_) => {
                CliError::NonConvergence(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
