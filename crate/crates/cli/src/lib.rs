//! File formats, dataset ingest, and the command-line pipeline around
//! `skelimg-core`: skeleton capture parsing, PNG export, checkpoints,
//! evaluation reports, and the `skelimg` subcommands.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod ingest;
pub mod pipeline;
pub mod pngio;
pub mod report;

use std::path::{Path, PathBuf};

use thiserror::Error;

/// Unified error for the tool layer; maps onto the process exit codes
/// (1 validation, 2 data, 3 numeric).
#[derive(Debug, Error)]
pub enum ToolError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ToolError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ToolError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        ToolError::Parse {
            path: path.display().to_string(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolError::Config(_) => 1,
            ToolError::Parse { .. } | ToolError::Data(_) | ToolError::Io { .. } => 2,
            ToolError::Numeric(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, ToolError>;
