use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Dimensions or indices that do not fit together.
    #[error("structural error: {0}")]
    Structural(String),
    /// A spec that fails one of the Lie algebra invariants.
    #[error("invalid Lie algebra: {0}")]
    Invalid(String),
    #[error("unsupported action: {0}")]
    UnsupportedAction(String),
    #[error("exponent {exponent} of weight {weight} is not an integer; exact arithmetic needs integral weight values")]
    NonIntegralExponent { weight: String, exponent: String },
    #[error("size guard exceeded: {what} = {value}, limit {limit} (raise via SOLVFILL_GUARDS)")]
    Guard {
        what: String,
        value: usize,
        limit: usize,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("letter {index} fails membership: {reason}")]
    Membership { index: usize, reason: String },
    #[error("parse error in field `{field}`: {msg}")]
    Parse { field: String, msg: String },
    #[error("assembly error at {location}: {msg}")]
    Assembly { location: String, msg: String },
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
