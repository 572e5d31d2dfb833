//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by estimators, tests and the simulation harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument, malformed input data or a bad configuration.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A sample configuration on which the estimating equations are not
    /// defined, e.g. a zero residual with a negative weight exponent.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// The variance estimator produced a non-positive value.
    #[error("degenerate variance estimate ({estimate}): {details}")]
    DegenerateVariance { estimate: f64, details: String },

    /// A constant (zero-variance) series was passed to a serial test.
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    /// An internal numerical failure (overflow, non-finite intermediate).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Process exit code convention: 1 invalid input/config, 2 degenerate
    /// data, 3 internal numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Io(_) | Error::Config(_) => 1,
            Error::DegenerateSample(_)
            | Error::DegenerateVariance { .. }
            | Error::DegenerateSeries(_) => 2,
            Error::Numerical(_) => 3,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn degenerate(msg: impl Into<String>) -> Error {
    Error::DegenerateSample(msg.into())
}
