use std::path::Path;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or missing arguments.
    #[error("{0}")]
    Usage(String),

    /// An input file that cannot be read or is not a valid element or density.
    #[error("{path}: {message}")]
    Input { path: String, message: String },

    /// A computation that failed on valid input.
    #[error(transparent)]
    Numerical(#[from] fermi_ot::Error),

    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Input {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn input(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Input {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    /// 2 for usage and input errors, 1 for failures during the computation.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) | CliError::Input { .. } => ExitCode::from(2),
            CliError::Numerical(_) | CliError::Output(_) => ExitCode::from(1),
        }
    }
}
