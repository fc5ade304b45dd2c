use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The input is structurally valid but degenerate (zero profile, zero denominator, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The operation is not defined for this nonlinearity kind.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The input violates a type invariant (length mismatch, non-finite sample, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The flow produced a non-finite value.
    #[error("numerical failure at iteration {iteration}: {reason}")]
    NumericalFailure { iteration: usize, reason: String },

    /// Threshold estimation could not keep its quotient finite.
    #[error("threshold estimation diverged after {restarts} restarts")]
    ThresholdDiverged { restarts: usize },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
