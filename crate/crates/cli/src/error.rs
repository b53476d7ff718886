//! Error taxonomy of the binary, keyed to its exit codes: configuration
//! problems exit 1, numeric failures exit 2, validation failures exit 3.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Unusable configuration: parse errors, contradictory sections, bad
    /// units, unwritable output paths.
    Config(String),
    /// The requested computation failed inside the numerics.
    Numeric(String),
    /// The validation suite ran and found disagreements.
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Validation(_) => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numeric(msg) => write!(f, "numeric failure: {msg}"),
            CliError::Validation(msg) => write!(f, "validation failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<wqed_core::Error> for CliError {
    fn from(e: wqed_core::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
