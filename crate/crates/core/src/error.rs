use alloc::string::String;

use thiserror::Error;

use crate::convex::Smoothness;

/// Errors raised by body construction, the solvers and the checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("degenerate boundary: {0}")]
    DegenerateBoundary(String),
    #[error("operation requires a {required} body, this one is {actual}")]
    Smoothness {
        required: Smoothness,
        actual: Smoothness,
    },
    #[error("{what} did not converge (best value {best_value:e}, residual {residual:e})")]
    NumericFailure {
        what: &'static str,
        best_value: f64,
        residual: f64,
    },
    #[error("construction rejected: {metric} = {value:e} (threshold {threshold:e})")]
    ConstructionRejected {
        metric: &'static str,
        value: f64,
        threshold: f64,
    },
    #[error("body is not symplectically self-polar: defect {defect:e} > {tolerance:e}")]
    NotSelfPolar { defect: f64, tolerance: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = core::result::Result<T, Error>;
