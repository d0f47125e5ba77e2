use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A valuation was requested for zero.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// The model file loaded but violates a ring axiom.
    #[error("model invariant violated: {0}")]
    ModelInvariant(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    /// The finite precision of the model is not enough to carry out the request.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    /// Something the construction proves impossible happened anyway.
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("construction invariant violated at step {step}: {detail}")]
    ConstructionInvariant { step: usize, detail: String },

    #[error("step limit of {max_steps} exceeded ({case3_count} rescaling steps taken)")]
    StepLimit { max_steps: usize, case3_count: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
