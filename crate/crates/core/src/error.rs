use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("constant-rank violation: rank {found} at direction {direction:?}, expected {expected}")]
    ConstantRankViolation {
        expected: usize,
        found: usize,
        direction: Vec<f64>,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverDivergence { iterations: usize, residual: f64 },

    #[error("recession estimate overflowed at scale t = {0:e}")]
    ScaleLimit(f64),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("support error: {0}")]
    Support(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("file format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
