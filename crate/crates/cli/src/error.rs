use std::path::PathBuf;

use qdyn_core::QdynError;
use thiserror::Error;

use crate::config::Origin;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error{}: `{key}`: {reason}", origin.map(|o| format!(" at {o}")).unwrap_or_default())]
    Config { origin: Option<Origin>, key: String, reason: String },

    #[error(transparent)]
    Library(#[from] QdynError),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("cannot compare runs: {0}")]
    Mismatch(String),

    #[error("malformed output file {}: {reason}", path.display())]
    Malformed { path: PathBuf, reason: String },
}

impl CliError {
    pub fn config(origin: Origin, key: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config { origin: Some(origin), key: key.into(), reason: reason.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 for invalid input, 2 for numerical breakdown, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(e) if e.is_numerical() => 2,
            CliError::Io { .. } => 3,
            _ => 1,
        }
    }
}
