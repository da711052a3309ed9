use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid input. Exit code 2.
    #[error("configuration error: {0}")]
    Config(String),
    /// A computation that ran and failed. Exit code 3.
    #[error("stage failure: {0}")]
    Stage(String),
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Stage(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<kantorovich::Error> for CliError {
    fn from(e: kantorovich::Error) -> Self {
        match e {
            kantorovich::Error::Config(m) => CliError::Config(m),
            other => CliError::Stage(other.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(format!("csv: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
