use std::path::Path;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const PROPERTY_FAILURE: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const INTEGRITY: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] parisian_core::Error),
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    /// The property suite ran and something failed; the report has already been printed.
    #[error("{0} check(s) failed")]
    Checks(usize),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use parisian_core::Error as E;
        match self {
            Self::Core(E::BlowUp { .. }) => exit::INTEGRITY,
            Self::Core(E::InvalidParams(_) | E::InvalidConfig(_) | E::Domain { .. }) => exit::INPUT,
            // a solver inconsistency means a documented property did not hold
            Self::Core(_) | Self::Checks(_) => exit::PROPERTY_FAILURE,
            Self::Input(_) | Self::Io { .. } | Self::Csv(_) | Self::Json(_) => exit::INPUT,
        }
    }
}
