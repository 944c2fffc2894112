use thiserror::Error;

/// Errors raised by the belief algebra, world models, agents and environments.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Objects built over incompatible world models (arm count, outcome count, Newcomb structure).
    #[error("representation mismatch: {0}")]
    Representation(String),

    /// A parameter lies outside its admissible range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An infradistribution with no points was requested.
    #[error("infradistribution must contain at least one a-measure")]
    EmptyInfradistribution,

    /// The observation received zero lower probability, so the belief cannot be renormalized.
    #[error("degenerate update: {0}")]
    DegenerateUpdate(String),

    /// An operation was called on a value that does not satisfy its contract.
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;
