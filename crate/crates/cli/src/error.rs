use std::path::Path;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] lindstedt_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 1 for validation and I/O problems, 2 for failed numerical assertions.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }

    /// One-line JSON record for stderr.
    pub fn record(&self) -> serde_json::Value {
        let kind = match self {
            CliError::Validation(_) => "validation",
            CliError::Io { .. } => "io",
            CliError::Core(e) if e.is_numerical() => "numerical",
            CliError::Core(_) => "validation",
        };
        let invariant = match self {
            CliError::Core(lindstedt_core::Error::Invariant { name, .. }) => Some(*name),
            _ => None,
        };
        json!({
            "error": kind,
            "invariant": invariant,
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        })
    }
}
