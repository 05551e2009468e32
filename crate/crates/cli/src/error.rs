use std::io;
use std::path::Path;

use hrc_core::Error as CoreError;

/// Failure of a command, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or malformed input, bad flags. Exit code 1.
    #[error("{0}")]
    Input(String),
    /// The problem or a property suite failed its checks. Exit code 2.
    #[error("{0}")]
    Validation(String),
    /// A numerical precondition (CFL, regression rank, domain margin) failed. Exit code 3.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub(crate) fn io(path: &Path, e: io::Error) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }

    /// Maps a library error, given the horizon used to turn a CFL step count into a step size.
    pub(crate) fn core(e: CoreError, horizon: f64) -> Self {
        match e {
            CoreError::Cfl { suggested_steps, .. } => {
                CliError::Numerical(format!("{e}; suggested --dt {:e}", horizon / suggested_steps as f64))
            }
            CoreError::RankDeficient { .. } | CoreError::Precondition(_) => CliError::Numerical(e.to_string()),
            CoreError::Config(_) | CoreError::DimensionMismatch { .. } | CoreError::TimeStep { .. } => {
                CliError::Input(e.to_string())
            }
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("writing CSV: {e}"))
    }
}
