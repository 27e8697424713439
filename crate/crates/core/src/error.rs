use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("truncation retains no terms (A_dx = 0)")]
    EmptyTruncation,

    #[error("field length {got} does not match grid with {expected} cells")]
    LengthMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge: value {estimate:e} with error estimate {achieved:e} > tolerance {tolerance:e}")]
    QuadratureFailed {
        estimate: f64,
        achieved: f64,
        tolerance: f64,
    },

    #[error("phase delay undefined: reference phase Cr*theta + Fo term vanishes")]
    UndefinedPhaseDelay,

    #[error("scheme blew up at step {step} (t = {time})")]
    BlowUp { step: usize, time: f64 },

    #[error("study failed: {0}")]
    Study(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
