//! Command implementations behind the `ultraflow` binary.

pub mod commands;
pub mod fnspec;
pub mod output;

use thiserror::Error;

pub use commands::{run, Cli, Command};

/// Default quadrature size when neither `--nodes` nor `ULTRAFLOW_NODES` is set.
pub const DEFAULT_NODES: usize = ultraflow::DEFAULT_NODES;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Parse(#[from] fnspec::ParseError),
    #[error(transparent)]
    Core(#[from] ultraflow::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    /// A checked property did not hold.
    #[error("property violation: {0}")]
    Violation(String),
}

impl CliError {
    /// 2 usage, 3 numerical failure, 4 property violation.
    pub fn exit_code(&self) -> i32 {
        use ultraflow::Error as E;
        match self {
            CliError::Usage(_) | CliError::Parse(_) => 2,
            CliError::Core(E::Domain(_) | E::Shape { .. }) => 2,
            CliError::Core(_) => 3,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 3,
            CliError::Violation(_) => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(ultraflow::Error::Domain("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(ultraflow::Error::Numerical("x".into())).exit_code(), 3);
        assert_eq!(CliError::Core(ultraflow::Error::Boundary { residual: 1.0 }).exit_code(), 3);
        assert_eq!(CliError::Violation("x".into()).exit_code(), 4);
    }
}
