use thiserror::Error;

/// Errors produced by network construction, solvers, and threshold math.
#[derive(Debug, Error)]
pub enum Error {
    #[error("group axiom violated: {0}")]
    GroupAxiom(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("network size {n} exceeds solver cap {cap}")]
    SolverCap { n: usize, cap: usize },

    #[error("oracle bounds exceeded: {0}")]
    OracleBound(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
