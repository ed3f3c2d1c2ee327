//! Experiment harness: instance generation, metadata bootstrapping,
//! training, evaluation against static parameters, and timing profiles.
//!
//! Every command is a library function so that tests and other tools can
//! drive the same code paths as the `modac` binary.

pub mod bootstrap;
pub mod config;
pub mod evaluate;
pub mod generate;
pub mod manifest;
pub mod profile;
pub mod results;
pub mod train;

use std::path::{Path, PathBuf};

use thiserror::Error;

use modac_core::neural::NeuralError;
use modac_core::rl::RlError;

pub use config::{ExperimentConfig, InstanceSize, PolicySwitches};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid {field}: {message}")]
    Config { field: &'static str, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Instance { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] modac_core::Error),
    #[error(transparent)]
    Rl(#[from] RlError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Instance { .. } => "instance",
            CliError::Core(_) => "core",
            CliError::Rl(_) => "rl",
            CliError::Neural(_) => "checkpoint",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({ "error": self.kind(), "message": self.to_string() });
        if let CliError::Config { field, .. } = self {
            v["field"] = serde_json::Value::from(*field);
        }
        v
    }
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}
