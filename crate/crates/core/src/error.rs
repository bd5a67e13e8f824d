use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite input to {0}")]
    NotFinite(&'static str),

    #[error("mesh: {0}")]
    Mesh(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("problem setup: {0}")]
    Setup(String),

    #[error("NaN or infinity detected in element {element}: {what}")]
    ElementNaN { element: usize, what: &'static str },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("Newton did not converge after {iterations} iterations (last err = {last_err:.3e})")]
    NonConvergence { iterations: usize, last_err: f64, trace: Vec<f64> },

    #[error("{nodes} nodes stay dual infeasible (multiplier down to {worst:.3e})")]
    DualInfeasible { nodes: usize, worst: f64 },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
