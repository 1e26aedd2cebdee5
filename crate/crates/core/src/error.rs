use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A named inequality a designer requires but the environment violates.
#[derive(Debug, Clone, PartialEq)]
pub struct PremiseViolation {
    /// Human-readable form of the required inequality.
    pub condition: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl fmt::Display for PremiseViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails (lhs = {}, rhs = {})", self.condition, self.lhs, self.rhs)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The environment lies outside the regime a designer characterises.
    #[error("premise violated: {0}")]
    Premise(PremiseViolation),

    /// An internal invariant did not hold.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    pub fn premise(condition: &'static str, lhs: f64, rhs: f64) -> Self {
        Error::Premise(PremiseViolation { condition, lhs, rhs })
    }
}
