//! Error type shared by every module of the core crate.

use alloc::string::String;

/// Convenience alias.
pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("repeated edge {0}-{1}")]
    MultiEdge(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grade {grade} would hold {predicted} paths, above the cap of {cap}")]
    CapExceeded { grade: usize, predicted: usize, cap: usize },
    #[error("grade {0} has not been built")]
    GradeUnavailable(usize),
    #[error("operation requires a regular graph")]
    NotRegular,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("resampling budget of {0} attempts exhausted")]
    ResampleBudget(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix order {n} exceeds the dense budget {budget}")]
    BudgetExceeded { n: usize, budget: usize },
    #[error("eigensolver failed to converge")]
    NoConvergence,
    #[error("spectral parameter needs a positive imaginary part (got {0})")]
    NonPositiveImaginary(f64),
    #[error("continuation failed at gamma = {re} + {im}i: {reason}")]
    ContinuationFailure { re: f64, im: f64, reason: String },
    #[error("zero pivot in linear solve")]
    ZeroPivot,
    #[error("imaginary part vanished: {0}")]
    ZeroImaginaryPart(String),
    #[error("neighbour matrix is not unimodular: {0}")]
    Unimodularity(String),
    #[error("population dynamics diverged (|zeta| = {0})")]
    Divergence(f64),
    #[error("kernel violates its contract: {0}")]
    KernelContract(String),
}
