use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use modac_core::moea::RunSetup;
use modac_core::problems::{InstanceFile, InstanceMeta};
use modac_core::rl::bootstrap_instance_meta;

use crate::manifest::read_instance;
use crate::{write_file, CliError};

#[derive(Debug, Clone)]
pub struct BootstrapArgs {
    pub paths: Vec<PathBuf>,
    pub setup: RunSetup,
    /// Episode budget; the bootstrap run uses twice as many generations.
    pub generations: usize,
    pub seed: u64,
    /// Re-bootstrap even when matching metadata exists, and discard
    /// unreadable metadata.
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BootstrapStatus {
    Bootstrapped,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BootstrapReport {
    pub bootstrapped: Vec<PathBuf>,
    pub skipped: Vec<PathBuf>,
}

/// Whether `meta` was produced for `setup`.
pub fn meta_matches(meta: &InstanceMeta, setup: &RunSetup) -> bool {
    meta.objective_set == Some(setup.objective_set)
        && meta.algorithm.as_deref() == Some(algorithm_label(setup))
        && meta.num_objectives() == setup.num_objectives()
}

pub fn algorithm_label(setup: &RunSetup) -> &'static str {
    match setup.algorithm {
        modac_core::AlgorithmKind::Nsga2 => "nsga2",
        modac_core::AlgorithmKind::Mopso => "mopso",
    }
}

fn read_for_bootstrap(path: &Path, force: bool) -> Result<InstanceFile, CliError> {
    match read_instance(path) {
        Ok(f) => Ok(f),
        Err(err) if force => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let mut raw: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Instance { path: path.to_path_buf(), message: e.to_string() })?;
            if let Some(obj) = raw.as_object_mut() {
                obj.remove("meta");
            }
            serde_json::from_value(raw).map_err(|_| err)
        }
        Err(CliError::Instance { path, message }) => Err(CliError::Instance {
            path,
            message: format!("{message} (rerun with --force to discard unreadable metadata)"),
        }),
        Err(e) => Err(e),
    }
}

/// Bootstraps every file in place, in parallel; `progress` receives
/// `(done, total, path, status)` as files finish.
pub fn bootstrap(
    args: &BootstrapArgs,
    progress: impl Fn(usize, usize, &Path, BootstrapStatus) + Sync,
) -> Result<BootstrapReport, CliError> {
    let done = AtomicUsize::new(0);
    let total = args.paths.len();
    let statuses: Vec<BootstrapStatus> = args
        .paths
        .par_iter()
        .map(|path| {
            let mut file = read_for_bootstrap(path, args.force)?;
            let status = if !args.force && file.meta.as_ref().is_some_and(|m| meta_matches(m, &args.setup)) {
                BootstrapStatus::Skipped
            } else {
                let meta = bootstrap_instance_meta(&file.instance, &args.setup, args.generations, args.seed)?;
                file.meta = Some(meta);
                write_file(path, file.to_json())?;
                BootstrapStatus::Bootstrapped
            };
            progress(done.fetch_add(1, Ordering::Relaxed) + 1, total, path, status);
            Ok(status)
        })
        .collect::<Result<_, CliError>>()?;
    let mut report = BootstrapReport::default();
    for (path, status) in args.paths.iter().zip(statuses) {
        match status {
            BootstrapStatus::Bootstrapped => report.bootstrapped.push(path.clone()),
            BootstrapStatus::Skipped => report.skipped.push(path.clone()),
        }
    }
    Ok(report)
}
