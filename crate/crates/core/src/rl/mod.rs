//! Episode environment, reward, metadata bootstrapping, rollouts and PPO.

mod env;
mod ppo;
mod trainer;

use thiserror::Error;

use crate::moea::{AlgorithmKind, GenerationParams};
use crate::neural::NeuralError;
use crate::pareto::ParetoError;
use crate::problems::ProblemError;

pub use env::{
    bootstrap_instance_meta, run_episode, Controller, EnvInstance, Environment, EpisodeEnv, EpisodeOutcome, StepResult,
    Timings, DEFAULT_BUDGET,
};
pub use ppo::{
    collect_rollouts, gae, ppo_update, EpisodeSummary, PpoConfig, RolloutWorker, Trajectory, Transition, UpdateStats,
};
pub use trainer::{derive_seed, EpochLog, Trainer};

#[derive(Debug, Error)]
pub enum RlError {
    #[error("invalid {field}: {message}")]
    InvalidConfig { field: &'static str, message: String },
    #[error("instance has no bootstrapped metadata: {0}")]
    MissingMeta(String),
    #[error("step called on a finished episode")]
    EpisodeDone,
    #[error("step called before reset")]
    NotReset,
    #[error("expected an action of length {expected}, got {found}")]
    ActionDim { expected: usize, found: usize },
    #[error(
        "non-finite loss in update epoch {epoch}, minibatch {minibatch} \
         (policy {policy_loss}, value {value_loss}, entropy {entropy})"
    )]
    NonFiniteLoss { epoch: usize, minibatch: usize, policy_loss: f64, value_loss: f64, entropy: f64 },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Pareto(#[from] ParetoError),
}

/// Affine map of `a` (clamped to [-1, 1]) onto `ranges`.
pub fn map_action_values(a: &[f64], ranges: &[(f64, f64)]) -> Vec<f64> {
    assert_eq!(a.len(), ranges.len(), "action length does not match the parameter count");
    a.iter().zip(ranges).map(|(&x, &(lo, hi))| lo + (x.clamp(-1.0, 1.0) + 1.0) / 2.0 * (hi - lo)).collect()
}

/// Parameters of `kind` selected by a normalized action.
pub fn map_action(a: &[f64], kind: AlgorithmKind) -> GenerationParams {
    kind.params_from(&map_action_values(a, kind.param_ranges()))
}

/// Below this ideal-to-initial gap the improvement is defined as 0.
pub const DELTA_EPS: f64 = 1e-12;

/// `100 · (hv − hv_initial) / (hv_ideal − hv_initial)`.
pub fn normalized_improvement(hv: f64, hv_initial: f64, hv_ideal: f64) -> f64 {
    let den = hv_ideal - hv_initial;
    if den < DELTA_EPS {
        0.0
    } else {
        100.0 * ((hv - hv_initial) / den)
    }
}

/// `Δ_current² − Δ_best²` when the population beats the best hypervolume so
/// far, 0 otherwise.
pub fn step_reward(hv_current: f64, hv_best: f64, hv_initial: f64, hv_ideal: f64) -> f64 {
    if hv_current > hv_best {
        let dc = normalized_improvement(hv_current, hv_initial, hv_ideal);
        let db = normalized_improvement(hv_best, hv_initial, hv_ideal);
        dc * dc - db * db
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_mapping() {
        assert_eq!(map_action(&[-1.0, -1.0], AlgorithmKind::Nsga2).to_vec(), vec![0.6, 0.0]);
        assert_eq!(map_action(&[1.0, 1.0], AlgorithmKind::Nsga2).to_vec(), vec![1.0, 0.1]);
        let mid = map_action(&[0.0, 0.0], AlgorithmKind::Nsga2).to_vec();
        assert!((mid[0] - 0.8).abs() < 1e-12 && (mid[1] - 0.05).abs() < 1e-12);
        assert_eq!(map_action(&[-3.0, 7.0], AlgorithmKind::Nsga2).to_vec(), vec![0.6, 0.1]);
        assert_eq!(map_action(&[1.0, -1.0, 1.0], AlgorithmKind::Mopso).to_vec(), vec![3.0, 1.0, 0.9]);
    }

    #[test]
    fn reward_cases() {
        assert_eq!(step_reward(50.0, 30.0, 0.0, 100.0), 1600.0);
        assert_eq!(step_reward(30.0, 30.0, 0.0, 100.0), 0.0);
        assert_eq!(step_reward(20.0, 30.0, 0.0, 100.0), 0.0);
        assert_eq!(step_reward(5.0, 3.0, 2.0, 2.0), 0.0);
    }
}
