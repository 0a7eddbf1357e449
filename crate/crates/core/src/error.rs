use thiserror::Error;

/// Errors produced by the optimizer and its building blocks.
#[derive(Debug, Error)]
pub enum GmrsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sample is already present in the dataset (index {index})")]
    DuplicateSample { index: usize },

    #[error("linear system is singular (condition estimate {condition:.3e})")]
    SingularSystem { condition: f64 },

    #[error("matrix is not positive definite even with jitter {jitter:.1e}")]
    NotPositiveDefinite { jitter: f64 },

    #[error("QP solver did not converge after {iterations} iterations (primal residual {primal:.3e}, dual residual {dual:.3e})")]
    QpNotConverged { iterations: usize, primal: f64, dual: f64 },

    #[error("QP is infeasible: {0}")]
    QpInfeasible(String),

    #[error("Newton iteration did not converge after {iterations} iterations (gradient norm {gradient_norm:.3e})")]
    NewtonNotConverged { iterations: usize, gradient_norm: f64 },

    #[error("could not place feasible points: {0}")]
    FeasibilityExhausted(String),

    #[error("unknown test function `{0}`")]
    UnknownFunction(String),

    #[error("no query is pending")]
    NoPendingQuery,

    #[error("answer refers to query `{got}` but the pending query is `{expected}`")]
    StaleQuery { expected: String, got: String },

    #[error("answer does not match the pending query: {0}")]
    WrongAnswerKind(String),

    #[error("indifference answers are not supported by the Gaussian-process surrogate")]
    TieNotSupported,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = GmrsError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> GmrsError {
    GmrsError::InvalidArgument(msg.into())
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(GmrsError::DimensionMismatch { expected, got })
    }
}
