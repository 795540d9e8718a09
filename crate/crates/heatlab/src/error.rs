//! Error type shared by all heatlab modules.

use thiserror::Error;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the numerical laboratory.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A point violated a geometric precondition (outside the domain,
    /// on the boundary, coincident pair, ...).
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    /// A scalar argument fell outside its admissible window.
    #[error("argument out of range: {0}")]
    OutOfRange(String),

    /// Resolution too coarse for the requested computation.
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    /// Discrete operator would exceed the dense-eigensolve cell cap.
    #[error("active cell count {cells} exceeds cap {cap}")]
    CellCapExceeded { cells: usize, cap: usize },

    /// A linear solve or eigensolve failed or looks ill-conditioned.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// An estimator produced statistically inconsistent output.
    #[error("estimator inconsistency: {0}")]
    EstimatorInconsistency(String),

    /// Iteration failed to converge within its budget.
    #[error("no convergence: {0}")]
    NoConvergence(String),
}
