//! Process exit codes: 0 success, 1 failed reproduction checks, 2 usage or
//! configuration problems, 3 domain errors and inadmissible states, 4 grid
//! construction failures on the oracle path.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
    Grid(String),
    ChecksFailed(usize),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Grid(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Domain(msg) => write!(f, "{msg}"),
            CliError::Grid(msg) => write!(f, "{msg}"),
            CliError::ChecksFailed(count) => write!(f, "{count} check(s) failed"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Usage(format!("io error: {err}"))
    }
}

impl From<edr_core::DomainError> for CliError {
    fn from(err: edr_core::DomainError) -> Self {
        CliError::Domain(err.to_string())
    }
}

impl From<edr_core::StateError> for CliError {
    fn from(err: edr_core::StateError) -> Self {
        CliError::Domain(err.to_string())
    }
}

impl From<edr_core::GridError> for CliError {
    fn from(err: edr_core::GridError) -> Self {
        CliError::Grid(err.to_string())
    }
}

impl From<edr_core::ConfigError> for CliError {
    fn from(err: edr_core::ConfigError) -> Self {
        CliError::Usage(err.to_string())
    }
}
