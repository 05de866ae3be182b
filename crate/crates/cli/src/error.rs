//! Exit codes and the structured error report written to stderr.

use serde::Serialize;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFICATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Serialize)]
pub struct CliError {
    pub error: &'static str,
    pub message: String,
    pub exit_code: u8,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { error: "usage", message: message.into(), exit_code: EXIT_USAGE }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error serializes")
    }
}

/// Bad input is a usage error; anything the numerics reject is a numeric failure.
impl From<lft::Error> for CliError {
    fn from(e: lft::Error) -> Self {
        use lft::Error::*;
        let (error, exit_code) = match &e {
            Parse(_) => ("parse", EXIT_USAGE),
            UnknownFunction(_) => ("unknown-function", EXIT_USAGE),
            InvalidParams(_) => ("invalid-params", EXIT_USAGE),
            InvalidGrid(_) => ("invalid-grid", EXIT_USAGE),
            DimensionMismatch { .. } => ("dimension-mismatch", EXIT_USAGE),
            Io(_) => ("io", EXIT_USAGE),
            Undefined(_) => ("undefined", EXIT_NUMERIC),
            OutsideDomain(_) => ("outside-domain", EXIT_NUMERIC),
            NonFiniteStencil(_) => ("non-finite-stencil", EXIT_NUMERIC),
            NotDifferentiable(..) => ("not-differentiable", EXIT_NUMERIC),
            NoRule(_) => ("no-rule", EXIT_NUMERIC),
            NotConverged { .. } => ("not-converged", EXIT_NUMERIC),
            HessianNotSpd(_) => ("hessian-not-spd", EXIT_NUMERIC),
            OutsideGradientRange(_) => ("outside-gradient-range", EXIT_NUMERIC),
            Singular(_) => ("singular", EXIT_NUMERIC),
            Unsupported(_) => ("unsupported", EXIT_NUMERIC),
            InconsistentPoint(_) => ("inconsistent-point", EXIT_NUMERIC),
        };
        CliError { error, message: e.to_string(), exit_code }
    }
}
