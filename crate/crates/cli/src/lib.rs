//! Command-line front end: configuration, run artifacts and plots.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 usage or domain error,
//! 3 numerical failure in a construction stage (also I/O failures).

pub mod artifact;
pub mod commands;
pub mod config;
pub mod plot;

use qcbecker::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
    /// Ran to completion but at least one asserted check failed.
    #[error("{0}")]
    ChecksFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Argument(_) | Error::Unsupported(_) => CliError::Usage(e.to_string()),
            Error::Io(_) => CliError::Io(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(Error::Domain("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::InvalidMap("x".into())).exit_code(), 3);
        assert_eq!(CliError::ChecksFailed("x".into()).exit_code(), 1);
    }
}
