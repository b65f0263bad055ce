use std::io;
use std::path::Path;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const NOT_CONVERGED: i32 = 4;
}

#[derive(Debug, Error)]
pub enum SimError {
    /// Malformed or invalid input; `at` is a key path or a parser location.
    #[error("{file}: {at}: {message}")]
    Parse { file: String, at: String, message: String },
    #[error("infeasible geometry: {0}")]
    Infeasible(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl SimError {
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Parse { .. } => exit::PARSE,
            SimError::Infeasible(_) => exit::INFEASIBLE,
            SimError::Io { .. } => exit::FAILURE,
        }
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        SimError::Io { path: path.display().to_string(), source }
    }

    /// Geometry-dependent failure from the numerics.
    pub fn infeasible(e: impl std::fmt::Display) -> Self {
        SimError::Infeasible(e.to_string())
    }
}

/// Validation failure at `key` while reading a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invalid {
    pub key: String,
    pub message: String,
}

impl Invalid {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self { key: key.into(), message: message.into() }
    }

    pub fn into_sim(self, file: &str) -> SimError {
        SimError::Parse { file: file.to_string(), at: self.key, message: self.message }
    }
}
