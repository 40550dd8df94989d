use thiserror::Error;

/// Errors raised by model construction and evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model object violates one of its structural invariants.
    #[error("invalid model: {0}")]
    Model(String),

    /// A linear system that must be nonsingular turned out singular.
    #[error("singular system: {0}")]
    Singular(String),

    /// The per-packet server transition matrix has more than one closed class,
    /// so the long-run server split depends on the initial packet.
    #[error("server selection chain is reducible with {classes} closed classes")]
    Reducible { classes: usize },

    /// A replay ran out of scripted service durations.
    #[error("scripted service list exhausted after {used} transmissions")]
    ScriptExhausted { used: usize },

    /// The requested simulation horizon is not representable.
    #[error("simulation horizon {0} exceeds the supported maximum")]
    HorizonOverflow(u64),

    /// A truncated comparison does not cover enough probability mass.
    #[error("insufficient coverage: {0}")]
    Coverage(String),

    /// A cost functional cannot be truncated safely without a growth bound.
    #[error("a growth envelope is required to bound the tail of this cost function")]
    MissingEnvelope,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn model(msg: impl Into<String>) -> Error {
    Error::Model(msg.into())
}
