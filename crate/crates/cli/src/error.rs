use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] pstchain::Error),
    #[error("{0}")]
    Config(String),
    #[error("invalid metadata header in {path}: {reason}")]
    Header { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration errors, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Core(e) if e.is_config() => ExitCode::from(2),
            CliError::Core(_) => ExitCode::from(3),
            CliError::Config(_) | CliError::Header { .. } => ExitCode::from(2),
            CliError::Io { .. } | CliError::Csv(_) => ExitCode::from(1),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
