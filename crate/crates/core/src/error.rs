use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("undefined extended-real operation: {0}")]
    Undefined(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown catalog function `{0}`")]
    UnknownFunction(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("point outside the effective domain: {0}")]
    OutsideDomain(String),

    #[error("non-finite value in finite-difference stencil at {0:?}")]
    NonFiniteStencil(Vec<f64>),

    #[error("`{0}` does not provide {1}")]
    NotDifferentiable(String, &'static str),

    #[error("no closed-form conjugate rule for `{0}`")]
    NoRule(String),

    #[error("newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("hessian is not positive definite at {0:?}")]
    HessianNotSpd(Vec<f64>),

    #[error("target {0:?} lies outside the gradient range")]
    OutsideGradientRange(Vec<f64>),

    #[error("matrix is singular or too ill-conditioned: {0}")]
    Singular(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("dual point is not linked to its primal coordinates: {0}")]
    InconsistentPoint(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
