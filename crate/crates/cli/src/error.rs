use std::fmt;

use evident_core::Error;

/// Exit status for bad input or configuration.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status for a statistical failure of the run itself.
pub const EXIT_STATISTICAL: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Statistical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Statistical(_) => EXIT_STATISTICAL,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "error: {m}"),
            CliError::Statistical(m) => write!(f, "statistical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::TooManyRejections { .. }
            | Error::DegenerateSample { .. }
            | Error::InsufficientSample { .. }
            | Error::EquidistantModels
            | Error::RankDeficient { .. }
            | Error::DegenerateVariance { .. }
            | Error::NonFiniteLikelihood(_)
            | Error::OptimizerFailure(_) => CliError::Statistical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(format!("json: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
