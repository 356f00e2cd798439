use nehari::NehariError;
use thiserror::Error;

use crate::report::Report;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable file, parse failure or invalid parameters.
    #[error("input error: {0}")]
    Input(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// Computation finished but a requested check failed; the report is
    /// still printed.
    #[error("{reason}")]
    Check {
        code: i32,
        reason: String,
        report: Box<Report>,
    },
    #[error("factorization rejected: {0}")]
    Factor(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Check { code, .. } => *code,
            CliError::Factor(_) => 5,
        }
    }
}

impl From<NehariError> for CliError {
    fn from(e: NehariError) -> Self {
        match e {
            NehariError::BadGridSize(_)
            | NehariError::SupportTooWide { .. }
            | NehariError::BadOrder(_)
            | NehariError::BadTolerance
            | NehariError::NotCausal
            | NehariError::NotAnticausal
            | NehariError::PoleOutsideDisk { .. }
            | NehariError::ZeroDenominator => CliError::Input(e.to_string()),
            NehariError::RootNearCircle { .. }
            | NehariError::ZeroOutsideDisk { .. }
            | NehariError::NearZero { .. } => CliError::Factor(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}
