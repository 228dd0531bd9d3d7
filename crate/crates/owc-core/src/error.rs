//! Crate-wide error type with coarse categories for CLI reporting.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Scene construction or validation failure.
    #[error("{0}")]
    Scene(String),

    /// Receiver model failure.
    #[error("{0}")]
    Receiver(String),

    /// Channel tracing / impulse-response failure.
    #[error("{0}")]
    Channel(String),

    /// Frequency-domain analysis failure.
    #[error("{0}")]
    Analysis(String),

    /// Assignment / SINR model failure.
    #[error("{0}")]
    Allocation(String),

    /// The requested assignment problem has no valid solution.
    #[error("{0}")]
    Infeasible(String),

    /// Channel database file is malformed or inconsistent.
    #[error("{0}")]
    DbFormat(String),

    /// Failure parsing a configuration or scenario file.
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short category tag used in CLI error lines (`error[category]: ...`).
    pub fn category(&self) -> &'static str {
        match self {
            Error::Scene(_) => "scene",
            Error::Receiver(_) => "receiver",
            Error::Channel(_) => "channel",
            Error::Analysis(_) => "analysis",
            Error::Allocation(_) => "allocation",
            Error::Infeasible(_) => "infeasible",
            Error::DbFormat(_) => "db",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
