//! Process-level error type mapping every failure onto the documented exit
//! codes: 2 for input/parse problems, 3 for violated domain preconditions,
//! 4 for non-convergence of the requested moments.

use sddm::{EstimateError, ModelError, MomentError, OracleError, PortfolioError};
use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// A file could not be read or parsed (exit 2).
    Input(String),
    /// The inputs parse but violate a documented precondition (exit 3).
    Domain(String),
    /// A requested moment or horizon does not converge (exit 4).
    NonConvergent(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Domain(_) => 3,
            CliError::NonConvergent(_) => 4,
        }
    }

    pub fn input(context: impl fmt::Display, err: impl fmt::Display) -> Self {
        CliError::Input(format!("{context}: {err}"))
    }

    pub fn domain(context: impl fmt::Display, err: impl fmt::Display) -> Self {
        CliError::Domain(format!("{context}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Domain(m) | CliError::NonConvergent(m) => {
                write!(f, "{m}")
            }
        }
    }
}

impl std::error::Error for CliError {}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<EstimateError> for CliError {
    fn from(e: EstimateError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<PortfolioError> for CliError {
    fn from(e: PortfolioError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<MomentError> for CliError {
    fn from(e: MomentError) -> Self {
        CliError::NonConvergent(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::NonConvergent { .. } | OracleError::HorizonOverflow { .. } => {
                CliError::NonConvergent(e.to_string())
            }
            _ => CliError::Domain(e.to_string()),
        }
    }
}
