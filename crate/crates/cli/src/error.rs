use std::path::PathBuf;

use thiserror::Error;

/// Failures of a run, each mapped to a distinct process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid scenario: {0}")]
    Schema(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] qmeas_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn schema(msg: impl Into<String>) -> Self {
        CliError::Schema(msg.into())
    }

    /// Input that parsed but failed validation counts as a schema error.
    pub fn invalid(what: &str, err: qmeas_core::Error) -> Self {
        CliError::Schema(format!("{what}: {err}"))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Schema(_) => exit::SCHEMA,
            CliError::Numerical(_) => exit::ASSERTION,
        }
    }
}

pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const SCHEMA: u8 = 2;
    pub const ASSERTION: u8 = 3;
}
