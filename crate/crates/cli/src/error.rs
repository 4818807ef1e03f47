// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use thiserror::Error;

/// Failure of a CLI run, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("accuracy check failed: {0}")]
    Accuracy(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Accuracy(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<rindler_core::Error> for CliError {
    fn from(err: rindler_core::Error) -> Self {
        use rindler_core::Error as E;
        match err {
            E::IntegrationAccuracy { .. } => CliError::Accuracy(err.to_string()),
            E::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
