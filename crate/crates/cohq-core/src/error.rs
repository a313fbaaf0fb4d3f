use thiserror::Error;

/// Errors produced by constructors, channel algebra and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid Choi matrix: {0}")]
    InvalidChoiMatrix(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid stochastic matrix: {0}")]
    InvalidStochasticMatrix(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ill-formed conic problem: {0}")]
    IllFormedProblem(String),

    #[error("solver failed: {0}")]
    SolverFailure(String),

    #[error("dimension cap exceeded: {0}")]
    DimensionCap(String),

    #[error("linear algebra error: {0}")]
    Linalg(String),

    #[error("channel JSON error: {0}")]
    Json(String),
}
