//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("matrix contains NaN or infinite entries")]
    NonFinite,

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("Hermitian eigensolver failed to converge for dimension {dim}")]
    ConvergenceFailure { dim: usize },

    #[error("observables {i} and {j} do not commute: residual {residual:.3e}")]
    NotCommuting { i: usize, j: usize, residual: f64 },

    #[error("commuting-subset enumeration exceeded the cap of {cap} cliques")]
    FamilyTooLarge { cap: usize },

    #[error("observable is not diagonal in context {context_id}: residue {residue:.3e}")]
    NotInContext { context_id: String, residue: f64 },

    #[error("context {context_id} has no outcome assigned")]
    UnassignedContext { context_id: String },

    #[error("no assigned context contains the observable")]
    NoContainingContext,

    #[error("context {context_id} admits no outcome consistent with the anchor on shared projectors")]
    InconsistentIntersection { context_id: String },

    #[error("sample was drawn in context {sample_context} but context {requested_context} was requested")]
    ContextMismatch {
        sample_context: String,
        requested_context: String,
    },

    #[error("ground eigenvalue is degenerate (multiplicity {multiplicity})")]
    DegenerateGround { multiplicity: usize },

    #[error("physical state does not evaluate the ground projector to 1")]
    NotGroundState,

    #[error("Gram matrix has negative eigenvalue {eigenvalue:.3e}")]
    NotPositive { eigenvalue: f64 },

    #[error("truncation {levels} insufficient: doubling moved the result by {gap:.3e} (tol {tol:.3e})")]
    TruncationInsufficient { levels: usize, gap: f64, tol: f64 },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid state functional: {0}")]
    InvalidStateFunctional(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
