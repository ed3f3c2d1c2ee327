//! Experiment configuration, read from JSON and validated per field.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use modac_core::moea::RunSetup;
use modac_core::neural::PolicyConfig;
use modac_core::problems::ProblemKind;
use modac_core::rl::PpoConfig;
use modac_core::{AlgorithmKind, ObjectiveSet};

use crate::CliError;

/// Instance dimensions: jobs and machines for scheduling, customers for
/// routing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSize {
    Shop { jobs: usize, machines: usize },
    Routing { customers: usize },
}

impl InstanceSize {
    pub fn label(&self) -> String {
        match self {
            InstanceSize::Shop { jobs, machines } => format!("{jobs}j{machines}m"),
            InstanceSize::Routing { customers } => format!("n{customers}"),
        }
    }
}

impl std::str::FromStr for InstanceSize {
    type Err = String;

    /// `5j5m` for scheduling, `n20` for routing.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("malformed size `{s}` (expected e.g. 5j5m or n20)");
        if let Some(n) = s.strip_prefix('n') {
            return n.parse().map(|customers| InstanceSize::Routing { customers }).map_err(|_| bad());
        }
        let (j, m) = s.strip_suffix('m').and_then(|r| r.split_once('j')).ok_or_else(bad)?;
        Ok(InstanceSize::Shop { jobs: j.parse().map_err(|_| bad())?, machines: m.parse().map_err(|_| bad())? })
    }
}

/// Policy architecture switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicySwitches {
    pub hidden: usize,
    pub gcn_layers: usize,
    pub budget_feature: bool,
}

impl Default for PolicySwitches {
    fn default() -> Self {
        Self { hidden: 64, gcn_layers: 2, budget_feature: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub objective_set: ObjectiveSet,
    pub algorithm: AlgorithmKind,
    pub size: InstanceSize,
    pub population_size: usize,
    /// Generations per episode.
    pub generations: usize,
    /// Total environment steps; the epoch count is derived from it.
    pub total_steps: usize,
    pub ppo: PpoConfig,
    pub policy: PolicySwitches,
    /// Write a checkpoint every this many epochs (0: only the final one).
    pub checkpoint_every: u64,
    pub seed: u64,
    /// Training instance manifest.
    pub train_manifest: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Fjsp,
            objective_set: ObjectiveSet::Bi,
            algorithm: AlgorithmKind::Nsga2,
            size: InstanceSize::Shop { jobs: 5, machines: 5 },
            population_size: 50,
            generations: 50,
            total_steps: 1_000_000,
            ppo: PpoConfig::default(),
            policy: PolicySwitches::default(),
            checkpoint_every: 10,
            seed: 0,
            train_manifest: None,
            out_dir: PathBuf::from("runs"),
        }
    }
}

fn invalid(field: &'static str, message: impl Into<String>) -> CliError {
    CliError::Config { field, message: message.into() }
}

impl ExperimentConfig {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| invalid("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.objective_set
            .check_for(self.problem)
            .map_err(|e| invalid("objective_set", e.to_string()))?;
        if !self.algorithm.supports(self.problem) {
            return Err(invalid(
                "algorithm",
                format!("{:?} does not run on {:?} instances", self.algorithm, self.problem),
            ));
        }
        match (self.problem, self.size) {
            (ProblemKind::Fjsp, InstanceSize::Shop { jobs, machines }) if jobs > 0 && machines > 0 => {}
            (ProblemKind::Cvrp, InstanceSize::Routing { customers }) if customers > 0 => {}
            _ => return Err(invalid("size", format!("{:?} does not describe a {:?} instance", self.size, self.problem))),
        }
        if self.population_size == 0 {
            return Err(invalid("population_size", "must be positive"));
        }
        if self.generations == 0 {
            return Err(invalid("generations", "must be positive"));
        }
        if self.total_steps == 0 {
            return Err(invalid("total_steps", "must be positive"));
        }
        if self.policy.hidden == 0 {
            return Err(invalid("policy.hidden", "must be positive"));
        }
        if !(1..=2).contains(&self.policy.gcn_layers) {
            return Err(invalid("policy.gcn_layers", "must be 1 or 2"));
        }
        self.ppo.validate().map_err(|e| match e {
            modac_core::rl::RlError::InvalidConfig { field, message } => CliError::Config { field, message },
            other => invalid("ppo", other.to_string()),
        })
    }

    pub fn run_setup(&self) -> RunSetup {
        RunSetup::new(self.algorithm, self.objective_set, self.population_size)
    }

    pub fn policy_config(&self) -> PolicyConfig {
        PolicyConfig {
            num_objectives: self.objective_set.len(),
            hidden: self.policy.hidden,
            gcn_layers: self.policy.gcn_layers,
            aux_dim: usize::from(self.policy.budget_feature),
            action_dim: self.algorithm.action_dim(),
        }
    }

    /// Epochs needed to cover `total_steps`.
    pub fn epochs(&self) -> u64 {
        self.total_steps.div_ceil(self.ppo.steps_per_epoch) as u64
    }
}
