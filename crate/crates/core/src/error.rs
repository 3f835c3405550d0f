use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("vertex {vertex} is isolated (zero degree)")]
    IsolatedVertex { vertex: usize },

    #[error("index {index} is out of range for {len} vertices")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("index {index} appears more than once in the labeled set")]
    DuplicateIndex { index: usize },

    #[error("row {row} sums to zero and cannot be normalized without epsilon")]
    ZeroRow { row: usize },

    #[error("linear system is numerically singular (pivot {pivot} = {value:e})")]
    Singular { pivot: usize, value: f64 },

    #[error("eigensolver did not converge: max residual {max_residual:e} over {} pairs", residuals.len())]
    EigenNotConverged {
        max_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("non-finite gradient at step {step}")]
    NonFiniteGradient { step: usize },

    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize, trace: Vec<f64> },
}

pub type Result<T> = core::result::Result<T, Error>;
