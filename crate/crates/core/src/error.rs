use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the numerical routines and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two grid fields (or a field and a grid) do not share the same nodes.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A modal series was requested beyond the supported truncation degree.
    #[error("truncation degree {requested} exceeds the supported maximum {max}")]
    Truncation { requested: usize, max: usize },

    /// A near-singular linear system (far-field probe pair, Riccati denominator).
    #[error("ill-conditioned: {0}")]
    Conditioning(String),

    /// Quadrature would need more panels than the configured cap.
    #[error("quadrature budget exceeded: {required} panels required, cap is {cap}")]
    Budget { required: usize, cap: usize },

    /// Bad command-line or config-file input.
    #[error("usage: {0}")]
    Usage(String),

    /// A hypothesis of the dispersive estimate is violated by the parameters.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// A verification check or sweep found an accuracy failure.
    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
