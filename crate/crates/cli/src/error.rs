//! Command errors and their exit codes.

use std::path::Path;

use thiserror::Error;
use tunnelnav::NavError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("cannot read {path}: {reason}")]
    Missing { path: String, reason: String },

    #[error(transparent)]
    Nav(#[from] NavError),
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl ToString) -> Self {
        CliError::Config {
            field: field.into(),
            reason: reason.to_string(),
        }
    }

    pub fn missing(path: &Path, reason: impl ToString) -> Self {
        CliError::Missing {
            path: path.display().to_string(),
            reason: reason.to_string(),
        }
    }

    /// 2 for configuration and input problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Nav(e) if e.is_numerical() => 3,
            CliError::Nav(NavError::LeftTunnel { .. } | NavError::MissionTimeout { .. }) => 3,
            _ => 2,
        }
    }
}
