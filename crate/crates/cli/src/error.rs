use std::path::PathBuf;

use sdht_core::SdhtError;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Library(#[from] SdhtError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 for I/O failures, 2 for rejected input, 3 when a checked bound fails.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Library(SdhtError::BoundViolated(_) | SdhtError::Unverified(_)) => 3,
            CliError::Validation(_) | CliError::Library(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            1 => "io",
            3 => "bound_violated",
            _ => "validation",
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Contents of `error.json`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ErrorRecord {
    pub exit_code: i32,
    pub kind: String,
    pub message: String,
}

impl From<&CliError> for ErrorRecord {
    fn from(e: &CliError) -> Self {
        Self { exit_code: e.exit_code(), kind: e.kind().to_string(), message: e.to_string() }
    }
}
