//! Error type shared by all solver and geometry operations.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A point violates a precondition: outside the constraint set, outside
    /// the objective's domain, or on the boundary where an entropy map or a
    /// logarithm is undefined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Operands of incompatible sizes.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The scalar normalization equation of the inverse-map update could not
    /// be bracketed or solved to tolerance.
    #[error("normalization failure: {0}")]
    NormalizationFailure(String),

    /// A computation produced non-finite values despite overflow guards.
    #[error("numerical overflow in {0}")]
    NumericalOverflow(&'static str),

    /// The eigendecomposition routine did not converge.
    #[error("eigensolve failure for a {dim}x{dim} matrix")]
    EigensolveFailure { dim: usize },

    /// Backtracking reduced the step below the configured floor without
    /// satisfying the sufficient-decrease test.
    #[error("line search floor reached: alpha {alpha:.3e} fell below {floor:.3e} after {backtracks} backtracks")]
    ArmijoFloorReached {
        alpha: f64,
        floor: f64,
        backtracks: u32,
    },

    /// The starting point handed to a solver is infeasible.
    #[error("invalid start: {0}")]
    InvalidStart(String),

    /// Exact line search could not bracket a minimum.
    #[error("line search bracket failure: {0}")]
    LineSearchBracketFailure(String),

    /// A constructed value violates its type invariant.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
