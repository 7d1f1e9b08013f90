use thiserror::Error;

/// Errors produced by the exponent, oracle and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("quadrature did not converge: estimated error {estimate:e} exceeds tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("objective is not finite at s = {at}")]
    NonFinite { at: f64 },

    #[error("probability mass functions live on different outcome spaces (`{left}` vs `{right}`)")]
    MismatchedSpaces { left: String, right: String },

    #[error("truncation too small: neglected probability mass {deficit:e} exceeds {limit:e}")]
    CutoffTooSmall { deficit: f64, limit: f64 },

    #[error("working set of {requested} bytes exceeds the budget of {budget} bytes")]
    MemoryBudget { requested: usize, budget: usize },

    #[error("covariance reconstruction failed: residual {residual:e}")]
    Reconstruction { residual: f64 },

    #[error("limit did not converge: {what} (values {first:e} and {second:e})")]
    NotConverged {
        what: &'static str,
        first: f64,
        second: f64,
    },

    #[error("log-likelihood ratio is NaN")]
    NanLikelihood,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}
