use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid edge ({i}, {j}): {reason}")]
    InvalidEdge { i: usize, j: usize, reason: String },

    #[error("degenerate clustering: {0}")]
    DegenerateClustering(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("leading block is singular (smallest |eigenvalue| {0:e})")]
    SingularBlock(f64),

    #[error("linear system is singular: {0}")]
    SingularSystem(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("bound soundness violated in trial {trial}: bound {bound} > lambda_min {lambda_min}")]
    SoundnessViolation {
        trial: usize,
        bound: f64,
        lambda_min: f64,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
