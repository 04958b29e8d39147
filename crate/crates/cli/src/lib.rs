//! Library side of the `igs` command-line tool: file formats and the
//! subcommand drivers.

pub mod commands;
pub mod files;

use igs_core::Error;

/// Exit status for successful runs.
pub const EXIT_OK: i32 = 0;
/// Exit status for malformed command lines (also used by the argument parser).
pub const EXIT_USAGE: i32 = 2;
/// Exit status for unreadable or invalid input files and values.
pub const EXIT_INPUT: i32 = 3;
/// Exit status for numerical failures (singular systems, degenerate geometry).
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) | CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateMetric { .. } | Error::Solve(_) | Error::GcvUndefined { .. } => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}
