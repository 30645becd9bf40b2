use thiserror::Error;

/// Errors surfaced by the algebra engine.
///
/// `Structural` covers violated preconditions on well-formed data (ring
/// mismatches, rank mismatches, inhomogeneous input); the remaining
/// variants are domain outcomes that callers are expected to branch on.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("structural error: {0}")]
    Structural(String),

    #[error("inhomogeneous input: {0}")]
    Inhomogeneous(String),

    #[error("improper ideal: the unit ideal has no grade")]
    ImproperIdeal,

    #[error("resolution truncated at length {0} before reaching a kernel of zero")]
    Truncated(usize),

    #[error("module has grade zero (faithful module): {0}")]
    GradeZero(String),

    #[error("sequence rejected: {0}")]
    RejectedSequence(String),

    #[error("map is not well-defined on the presented module: {0}")]
    NotWellDefined(String),

    #[error("basis split for the quotient-ring construction failed: {0}")]
    NotSplittable(String),

    #[error("search exhausted without a certified witness: {0}")]
    Inconclusive(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;
