use num_complex::Complex64;
use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the routine.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter violates a documented invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested accuracy could not be reached. `value` carries the best
    /// partial result and `estimate` the error estimate attached to it.
    #[error("accuracy not reached in {context}: estimate {estimate:e} (best value {value})")]
    Accuracy {
        context: String,
        value: Complex64,
        estimate: f64,
    },

    /// The argument is valid in principle but outside the supported range.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// The operation is not implemented for this combination of arguments.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::OutOfRange(msg.into())
    }

    pub(crate) fn accuracy(context: impl Into<String>, value: Complex64, estimate: f64) -> Self {
        Error::Accuracy {
            context: context.into(),
            value,
            estimate,
        }
    }

    /// Short stable label, used in status columns.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Accuracy { .. } => "accuracy",
            Error::OutOfRange(_) => "out_of_range",
            Error::Unsupported(_) => "unsupported",
        }
    }

    /// True for failures that come from numerical accuracy rather than bad input.
    pub fn is_accuracy(&self) -> bool {
        matches!(self, Error::Accuracy { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
