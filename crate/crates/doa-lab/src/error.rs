//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar or structural parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// Operands have incompatible shapes (sensor counts, grid lengths, ...).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Input data is degenerate (empty snapshot set, all-zero snapshots, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A matrix expected to be Hermitian deviates beyond tolerance.
    #[error("matrix is not Hermitian within tolerance (max asymmetry {max_asymmetry:.3e})")]
    NonHermitian { max_asymmetry: f64 },

    /// A scatter matrix is numerically singular where an inverse is needed.
    #[error(
        "scatter matrix is numerically singular (eigenvalue ratio {ratio:.3e}); \
         increase the snapshot count or switch to a better-conditioned estimator"
    )]
    SingularMatrix { ratio: f64 },

    /// An operation was invoked outside its contract.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Experiment configuration failed validation.
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
