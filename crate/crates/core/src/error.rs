use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// A single problem-configuration defect, keyed by the offending field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Newline-separated rendering of a field error list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldErrors(pub Vec<FieldError>);

impl fmt::Display for FieldErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid problem configuration:\n{0}")]
    Config(FieldErrors),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid time step {dt}: {reason}")]
    TimeStep { dt: f64, reason: &'static str },

    #[error("rank-deficient regression at step {step} (condition number {condition:e})")]
    RankDeficient { step: usize, condition: f64 },

    #[error("CFL condition violated: dt = {dt:e} exceeds the stable bound {dt_max:e} (use at least {suggested_steps} time steps)")]
    Cfl {
        dt: f64,
        dt_max: f64,
        suggested_steps: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn config(errors: Vec<FieldError>) -> Self {
        Error::Config(FieldErrors(errors))
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
