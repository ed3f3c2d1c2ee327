use std::io::Write;
use std::path::{Path, PathBuf};

use modac_core::neural::{load_checkpoint, save_checkpoint, PolicyNet};
use modac_core::rl::{EnvInstance, EpisodeEnv, EpochLog, Trainer};

use crate::bootstrap::meta_matches;
use crate::manifest::{read_instance, resolve_instances, Split};
use crate::{CliError, ExperimentConfig};

pub const LOG_NAME: &str = "train_log.jsonl";
pub const FINAL_NAME: &str = "policy.json";

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    /// Checkpoint to continue from (must carry training state).
    pub resume: Option<PathBuf>,
    /// Stop once this many epochs are complete, even if `total_steps` asks
    /// for more.
    pub stop_after: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub checkpoint: PathBuf,
    pub log: PathBuf,
    pub epochs: u64,
}

/// Bootstrapped instances for `cfg`, in order.
pub fn load_pool(paths: &[PathBuf], cfg: &ExperimentConfig) -> Result<Vec<EnvInstance>, CliError> {
    let setup = cfg.run_setup();
    paths
        .iter()
        .map(|p| {
            let file = read_instance(p)?;
            match &file.meta {
                Some(m) if meta_matches(m, &setup) => Ok(EnvInstance::from_file(&file)?),
                _ => Err(CliError::Instance {
                    path: p.clone(),
                    message: "no metadata for this algorithm and objective set; run `bootstrap` first".into(),
                }),
            }
        })
        .collect()
}

pub fn checkpoint_name(epoch: u64) -> String {
    format!("checkpoint_{epoch:05}.json")
}

/// Trains a policy on the configured training split, writing a JSON-lines
/// log, periodic checkpoints and a final checkpoint into `cfg.out_dir`.
pub fn train(
    cfg: &ExperimentConfig,
    options: &TrainOptions,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainReport, CliError> {
    cfg.validate()?;
    let manifest = cfg
        .train_manifest
        .as_ref()
        .ok_or_else(|| CliError::Config { field: "train_manifest", message: "required for training".into() })?;
    let paths = resolve_instances(std::slice::from_ref(manifest), Split::Train)?;
    if paths.is_empty() {
        return Err(CliError::Config { field: "train_manifest", message: "training split is empty".into() });
    }
    let pool = load_pool(&paths, cfg)?;
    let setup = cfg.run_setup();
    let envs = (0..cfg.ppo.num_parallel_envs)
        .map(|_| EpisodeEnv::new(pool.clone(), setup, cfg.generations))
        .collect::<Result<Vec<_>, _>>()?;

    let mut trainer = match &options.resume {
        Some(path) => {
            let ck = load_checkpoint(path)?;
            if ck.architecture != cfg.policy_config() {
                return Err(CliError::Config {
                    field: "policy",
                    message: format!("checkpoint architecture {:?} differs from the configuration", ck.architecture),
                });
            }
            let state = ck.training.clone().ok_or_else(|| CliError::Instance {
                path: path.clone(),
                message: "checkpoint has no training state to resume from".into(),
            })?;
            Trainer::resume(ck.policy()?, state, envs, cfg.ppo.clone(), cfg.seed)?
        }
        None => {
            let policy = PolicyNet::new(cfg.policy_config(), cfg.seed)?;
            Trainer::new(policy, envs, cfg.ppo.clone(), cfg.seed)?
        }
    };

    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError::io(&cfg.out_dir, e))?;
    let log_path = cfg.out_dir.join(LOG_NAME);
    let mut log = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&log_path)
        .map_err(|e| CliError::io(&log_path, e))?;
    let target = options.stop_after.map_or(cfg.epochs(), |s| s.min(cfg.epochs()));
    while trainer.epoch() < target {
        let entry = trainer.run_epoch()?;
        writeln!(log, "{}", serde_json::to_string(&entry).expect("log entry serializes"))
            .map_err(|e| CliError::io(&log_path, e))?;
        on_epoch(&entry);
        if cfg.checkpoint_every > 0 && trainer.epoch() % cfg.checkpoint_every == 0 {
            save(&trainer, &cfg.out_dir.join(checkpoint_name(trainer.epoch())))?;
        }
    }
    let checkpoint = cfg.out_dir.join(FINAL_NAME);
    save(&trainer, &checkpoint)?;
    Ok(TrainReport { checkpoint, log: log_path, epochs: trainer.epoch() })
}

fn save(trainer: &Trainer<EpisodeEnv>, path: &Path) -> Result<(), CliError> {
    Ok(save_checkpoint(trainer.policy(), Some(&trainer.training_state()), path)?)
}
