//! Train/test split manifests and instance path resolution.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use modac_core::problems::{InstanceFile, ProblemKind};

use crate::{CliError, InstanceSize};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub problem: ProblemKind,
    pub size: InstanceSize,
    pub seed: u64,
    /// File names relative to the manifest's directory.
    pub train: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
    All,
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            "all" => Ok(Split::All),
            other => Err(format!("unknown split `{other}` (expected train, test or all)")),
        }
    }
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Instance { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn files(&self, split: Split) -> Vec<&str> {
        let (train, test) = (self.train.iter(), self.test.iter());
        match split {
            Split::Train => train.map(String::as_str).collect(),
            Split::Test => test.map(String::as_str).collect(),
            Split::All => train.chain(test).map(String::as_str).collect(),
        }
    }
}

/// Expands manifests (using `split`) and directories (every `*.json` except
/// a manifest, sorted) into instance file paths. Plain files pass through.
pub fn resolve_instances(inputs: &[PathBuf], split: Split) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(input)
                .map_err(|e| CliError::io(input, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_name().is_some_and(|n| n != MANIFEST_NAME))
                .collect();
            files.sort();
            out.extend(files);
        } else if input.file_name().is_some_and(|n| n == MANIFEST_NAME) {
            let manifest = Manifest::read(input)?;
            let dir = input.parent().unwrap_or(Path::new("."));
            out.extend(manifest.files(split).into_iter().map(|f| dir.join(f)));
        } else {
            out.push(input.clone());
        }
    }
    Ok(out)
}

pub fn read_instance(path: &Path) -> Result<InstanceFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Instance { path: path.to_path_buf(), message: e.to_string() })
}

/// Short display name of an instance file.
pub fn instance_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}
