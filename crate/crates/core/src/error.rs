//! Error type shared by all modules.

use std::path::PathBuf;

/// Errors raised by grid construction, assembly, solvers and the harness.
#[derive(Debug, thiserror::Error)]
pub enum BfdError {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("invalid domain: a = {a}, b = {b} (need b > a)")]
    InvalidDomain { a: f64, b: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("linear system has no solution: {0}")]
    NoSolution(String),
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),
    #[error("eigensolver failure: {0}")]
    Eigen(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("instability detected: {0}")]
    Unstable(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, BfdError>;
