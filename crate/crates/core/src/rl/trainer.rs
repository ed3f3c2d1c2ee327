use std::time::Instant;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::ppo::{collect_rollouts, ppo_update, RolloutWorker, UpdateStats};
use super::{Environment, PpoConfig, RlError};
use crate::moea::SearchRng;
use crate::neural::{Adam, PolicyNet, TrainingState};

/// Mixes `parts` into `master` (splitmix64 finalizer per part).
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h = master ^ 0x9e37_79b9_7f4a_7c15;
    for &p in parts {
        h = h.wrapping_add(p).wrapping_add(0x9e37_79b9_7f4a_7c15);
        h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h ^= h >> 31;
    }
    h
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: u64,
    pub steps: usize,
    pub episodes: usize,
    pub mean_episode_reward: Option<f64>,
    pub mean_final_delta: Option<f64>,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub wall_clock_secs: f64,
}

/// PPO training loop. Every epoch restarts the workers from seeds derived
/// from `(seed, epoch, worker)`, so the parameters after epoch `k` depend
/// only on the policy, the optimizer state and `k`; that makes resuming
/// from a checkpoint equivalent to an uninterrupted run.
pub struct Trainer<E> {
    policy: PolicyNet,
    optimizer: Adam,
    epoch: u64,
    seed: u64,
    config: PpoConfig,
    workers: Vec<RolloutWorker<E>>,
}

const UPDATE_STREAM: u64 = u64::MAX;

impl<E: Environment> Trainer<E> {
    pub fn new(policy: PolicyNet, envs: Vec<E>, config: PpoConfig, seed: u64) -> Result<Self, RlError> {
        let optimizer = Adam::new(policy.num_parameters(), config.learning_rate);
        Self::resume(policy, TrainingState { epoch: 0, optimizer }, envs, config, seed)
    }

    pub fn resume(
        policy: PolicyNet,
        state: TrainingState,
        envs: Vec<E>,
        config: PpoConfig,
        seed: u64,
    ) -> Result<Self, RlError> {
        config.validate()?;
        if envs.len() != config.num_parallel_envs {
            return Err(RlError::InvalidConfig {
                field: "num_parallel_envs",
                message: format!("{} environments supplied for {} workers", envs.len(), config.num_parallel_envs),
            });
        }
        if let Some(e) = envs.iter().find(|e| e.action_dim() != policy.config().action_dim) {
            return Err(RlError::InvalidConfig {
                field: "action_dim",
                message: format!("policy emits {} values, environment expects {}", policy.config().action_dim, e.action_dim()),
            });
        }
        if state.optimizer.num_params() != policy.num_parameters() {
            return Err(RlError::InvalidConfig {
                field: "optimizer",
                message: "optimizer state does not match the policy".into(),
            });
        }
        let mut optimizer = state.optimizer;
        optimizer.learning_rate = config.learning_rate;
        let workers = envs.into_iter().map(|e| RolloutWorker::new(e, 0)).collect();
        Ok(Self { policy, optimizer, epoch: state.epoch, seed, config, workers })
    }

    pub fn policy(&self) -> &PolicyNet {
        &self.policy
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn training_state(&self) -> TrainingState {
        TrainingState { epoch: self.epoch, optimizer: self.optimizer.clone() }
    }

    pub fn into_policy(self) -> PolicyNet {
        self.policy
    }

    pub fn run_epoch(&mut self) -> Result<EpochLog, RlError> {
        let started = Instant::now();
        for (i, w) in self.workers.iter_mut().enumerate() {
            w.restart(derive_seed(self.seed, &[self.epoch, i as u64]));
        }
        let steps: Vec<usize> = (0..self.workers.len()).map(|i| self.config.steps_for_worker(i)).collect();
        let trajectories = collect_rollouts(&self.policy, &mut self.workers, &steps)?;
        let finished: Vec<_> = self.workers.iter_mut().flat_map(|w| w.take_finished()).collect();
        let mut rng = SearchRng::seed_from_u64(derive_seed(self.seed, &[self.epoch, UPDATE_STREAM]));
        let stats: UpdateStats = ppo_update(&mut self.policy, &mut self.optimizer, &trajectories, &self.config, &mut rng)?;
        self.epoch += 1;

        let mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
        Ok(EpochLog {
            epoch: self.epoch,
            steps: steps.iter().sum(),
            episodes: finished.len(),
            mean_episode_reward: mean(finished.iter().map(|f| f.total_reward).collect()),
            mean_final_delta: mean(finished.iter().filter_map(|f| f.final_delta).collect()),
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
            approx_kl: stats.approx_kl,
            clip_fraction: stats.clip_fraction,
            wall_clock_secs: started.elapsed().as_secs_f64(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_by_part() {
        let a = derive_seed(1, &[0, 0]);
        assert_ne!(a, derive_seed(1, &[0, 1]));
        assert_ne!(a, derive_seed(1, &[1, 0]));
        assert_ne!(a, derive_seed(2, &[0, 0]));
        assert_eq!(a, derive_seed(1, &[0, 0]));
    }
}
