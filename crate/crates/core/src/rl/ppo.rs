use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Environment, RlError};
use crate::graphstate::StateGraph;
use crate::moea::SearchRng;
use crate::neural::{gaussian_entropy, gaussian_log_prob, Adam, OutputGrad, PolicyNet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_ratio: f64,
    pub learning_rate: f64,
    pub update_epochs: usize,
    pub minibatch_size: usize,
    pub steps_per_epoch: usize,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub num_parallel_envs: usize,
    /// Standardize advantages over each batch.
    pub normalize_advantages: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_ratio: 0.2,
            learning_rate: 3e-4,
            update_epochs: 10,
            minibatch_size: 64,
            steps_per_epoch: 500,
            value_coef: 0.5,
            entropy_coef: 0.0,
            num_parallel_envs: 5,
            normalize_advantages: true,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), RlError> {
        let bad = |field, message: &str| Err(RlError::InvalidConfig { field, message: message.to_string() });
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma", "must be in (0, 1]");
        }
        if !(self.gae_lambda > 0.0 && self.gae_lambda <= 1.0) {
            return bad("gae_lambda", "must be in (0, 1]");
        }
        if !(self.clip_ratio > 0.0 && self.clip_ratio < 1.0) {
            return bad("clip_ratio", "must be in (0, 1)");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate", "must be positive");
        }
        if self.update_epochs == 0 {
            return bad("update_epochs", "must be positive");
        }
        if self.minibatch_size == 0 {
            return bad("minibatch_size", "must be positive");
        }
        if self.num_parallel_envs == 0 {
            return bad("num_parallel_envs", "must be positive");
        }
        if self.steps_per_epoch < self.num_parallel_envs {
            return bad("steps_per_epoch", "must be at least num_parallel_envs");
        }
        if !(self.value_coef >= 0.0 && self.entropy_coef >= 0.0) {
            return bad("value_coef", "loss coefficients must be nonnegative");
        }
        Ok(())
    }

    /// Steps gathered by worker `i` so that the total is `steps_per_epoch`.
    pub fn steps_for_worker(&self, i: usize) -> usize {
        let base = self.steps_per_epoch / self.num_parallel_envs;
        base + usize::from(i < self.steps_per_epoch % self.num_parallel_envs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: StateGraph,
    /// Sampled action before clamping.
    pub action: Vec<f64>,
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    pub done: bool,
}

/// Consecutive transitions from one worker.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub transitions: Vec<Transition>,
    /// Critic value of the state after the last transition (0 if it ended an
    /// episode).
    pub bootstrap_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub total_reward: f64,
    pub final_delta: Option<f64>,
}

/// An environment plus its random stream and the observation in hand.
pub struct RolloutWorker<E> {
    pub env: E,
    rng: SearchRng,
    observation: Option<StateGraph>,
    episode_reward: f64,
    finished: Vec<EpisodeSummary>,
}

impl<E: Environment> RolloutWorker<E> {
    pub fn new(env: E, seed: u64) -> Self {
        Self { env, rng: SearchRng::seed_from_u64(seed), observation: None, episode_reward: 0.0, finished: Vec::new() }
    }

    /// Reseeds the worker and forces a fresh episode on the next step.
    pub fn restart(&mut self, seed: u64) {
        self.rng = SearchRng::seed_from_u64(seed);
        self.observation = None;
        self.episode_reward = 0.0;
    }

    /// Episodes completed since the last call.
    pub fn take_finished(&mut self) -> Vec<EpisodeSummary> {
        std::mem::take(&mut self.finished)
    }

    fn gather(&mut self, policy: &PolicyNet, steps: usize) -> Result<Trajectory, RlError> {
        let mut transitions = Vec::with_capacity(steps);
        for _ in 0..steps {
            let state = match self.observation.take() {
                Some(s) => s,
                None => {
                    self.episode_reward = 0.0;
                    let seed = self.rng.random();
                    self.env.reset(seed)?
                }
            };
            let out = policy.predict(&state)?;
            let action: Vec<f64> = out
                .mean
                .iter()
                .zip(policy.log_std())
                .map(|(m, ls)| m + ls.exp() * self.rng.sample::<f64, _>(StandardNormal))
                .collect();
            let log_prob = gaussian_log_prob(&action, &out.mean, policy.log_std());
            let clamped: Vec<f64> = action.iter().map(|a| a.clamp(-1.0, 1.0)).collect();
            let step = self.env.step(&clamped)?;
            self.episode_reward += step.reward;
            if step.done {
                self.finished.push(EpisodeSummary {
                    total_reward: self.episode_reward,
                    final_delta: self.env.final_delta(),
                });
            } else {
                self.observation = Some(step.graph);
            }
            transitions.push(Transition {
                state,
                action,
                log_prob,
                reward: step.reward,
                value: out.value,
                done: step.done,
            });
        }
        let bootstrap_value = match &self.observation {
            Some(s) => policy.predict(s)?.value,
            None => 0.0,
        };
        Ok(Trajectory { transitions, bootstrap_value })
    }
}

/// Gathers `steps[i]` transitions from worker `i`, workers in parallel.
/// Trajectories come back in worker order.
pub fn collect_rollouts<E: Environment>(
    policy: &PolicyNet,
    workers: &mut [RolloutWorker<E>],
    steps: &[usize],
) -> Result<Vec<Trajectory>, RlError> {
    assert_eq!(workers.len(), steps.len(), "one step count per worker");
    workers.par_iter_mut().zip(steps.par_iter()).map(|(w, &n)| w.gather(policy, n)).collect()
}

/// Generalized advantage estimates and returns for one trajectory.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap_value: f64,
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut next_value = bootstrap_value;
    let mut running = 0.0;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        running = delta + gamma * lambda * live * running;
        adv[t] = running;
        next_value = values[t];
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}

/// Means over every minibatch of an update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub gradient_steps: usize,
}

struct Sample<'a> {
    state: &'a StateGraph,
    action: &'a [f64],
    old_log_prob: f64,
    advantage: f64,
    ret: f64,
}

struct SampleResult {
    grads: Vec<f64>,
    policy_loss: f64,
    value_loss: f64,
    kl: f64,
    clipped: bool,
}

fn sample_gradient(policy: &PolicyNet, s: &Sample<'_>, cfg: &PpoConfig) -> Result<SampleResult, RlError> {
    let (out, cache) = policy.forward(s.state)?;
    let log_std = policy.log_std();
    let log_prob = gaussian_log_prob(s.action, &out.mean, log_std);
    let ratio = (log_prob - s.old_log_prob).exp();
    let clipped_ratio = ratio.clamp(1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio);
    let unclipped = ratio * s.advantage;
    let clipped = clipped_ratio * s.advantage;
    let policy_loss = -unclipped.min(clipped);
    // d(policy_loss)/d(log_prob); zero where the clipped branch is active.
    let g_logp = if unclipped <= clipped { -unclipped } else { 0.0 };
    let value_err = out.value - s.ret;

    let mut grad = OutputGrad::zeros(out.mean.len());
    for k in 0..out.mean.len() {
        let inv_var = (-2.0 * log_std[k]).exp();
        let diff = s.action[k] - out.mean[k];
        grad.mean[k] = g_logp * diff * inv_var;
        grad.log_std[k] = g_logp * (diff * diff * inv_var - 1.0) - cfg.entropy_coef;
    }
    grad.value = 2.0 * cfg.value_coef * value_err;
    let grads = policy.backward(&cache, &grad)?;
    Ok(SampleResult {
        grads,
        policy_loss,
        value_loss: value_err * value_err,
        kl: s.old_log_prob - log_prob,
        clipped: (ratio - 1.0).abs() > cfg.clip_ratio,
    })
}

/// Clipped-surrogate PPO over `trajectories`; minibatch order comes from
/// `rng`.
pub fn ppo_update(
    policy: &mut PolicyNet,
    optimizer: &mut Adam,
    trajectories: &[Trajectory],
    cfg: &PpoConfig,
    rng: &mut SearchRng,
) -> Result<UpdateStats, RlError> {
    let mut advantages = Vec::new();
    let mut returns = Vec::new();
    for tr in trajectories {
        let rewards: Vec<f64> = tr.transitions.iter().map(|t| t.reward).collect();
        let values: Vec<f64> = tr.transitions.iter().map(|t| t.value).collect();
        let dones: Vec<bool> = tr.transitions.iter().map(|t| t.done).collect();
        let (a, r) = gae(&rewards, &values, &dones, tr.bootstrap_value, cfg.gamma, cfg.gae_lambda);
        advantages.extend(a);
        returns.extend(r);
    }
    if cfg.normalize_advantages && advantages.len() > 1 {
        let n = advantages.len() as f64;
        let mean = advantages.iter().sum::<f64>() / n;
        let std = (advantages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
        for a in &mut advantages {
            *a = (*a - mean) / (std + 1e-8);
        }
    }
    let samples: Vec<Sample<'_>> = trajectories
        .iter()
        .flat_map(|tr| tr.transitions.iter())
        .zip(advantages.iter().zip(&returns))
        .map(|(t, (&advantage, &ret))| Sample {
            state: &t.state,
            action: &t.action,
            old_log_prob: t.log_prob,
            advantage,
            ret,
        })
        .collect();

    let mut stats = UpdateStats::default();
    let mut seen = 0usize;
    let mut order: Vec<usize> = (0..samples.len()).collect();
    for epoch in 0..cfg.update_epochs {
        order.shuffle(rng);
        for (mb, chunk) in order.chunks(cfg.minibatch_size).enumerate() {
            let current: &PolicyNet = policy;
            let results: Vec<SampleResult> =
                chunk.par_iter().map(|&i| sample_gradient(current, &samples[i], cfg)).collect::<Result<_, _>>()?;
            let m = chunk.len() as f64;
            let mut grads = vec![0.0; policy.num_parameters()];
            let (mut pl, mut vl, mut kl, mut cf) = (0.0, 0.0, 0.0, 0.0);
            for r in &results {
                for (g, v) in grads.iter_mut().zip(&r.grads) {
                    *g += v;
                }
                pl += r.policy_loss;
                vl += r.value_loss;
                kl += r.kl;
                cf += f64::from(u8::from(r.clipped));
            }
            grads.iter_mut().for_each(|g| *g /= m);
            let entropy = gaussian_entropy(policy.log_std());
            if !(pl.is_finite() && vl.is_finite() && entropy.is_finite()) || grads.iter().any(|g| !g.is_finite()) {
                return Err(RlError::NonFiniteLoss {
                    epoch,
                    minibatch: mb,
                    policy_loss: pl / m,
                    value_loss: vl / m,
                    entropy,
                });
            }
            policy.apply_gradients(optimizer, &grads);
            stats.policy_loss += pl;
            stats.value_loss += vl;
            stats.approx_kl += kl;
            stats.clip_fraction += cf;
            stats.entropy += entropy;
            stats.gradient_steps += 1;
            seen += chunk.len();
        }
    }
    if seen > 0 {
        let n = seen as f64;
        stats.policy_loss /= n;
        stats.value_loss /= n;
        stats.approx_kl /= n;
        stats.clip_fraction /= n;
        stats.entropy /= stats.gradient_steps as f64;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gae_matches_hand_computation() {
        let (g, l) = (0.9, 0.8);
        let r = [1.0, 0.0, 2.0];
        let v = [0.5, 0.4, 0.3];
        let (adv, ret) = gae(&r, &v, &[false, false, true], 7.0, g, l);
        let d2 = 2.0 - 0.3;
        let d1 = 0.0 + g * 0.3 - 0.4;
        let d0 = 1.0 + g * 0.4 - 0.5;
        let a2 = d2;
        let a1 = d1 + g * l * a2;
        let a0 = d0 + g * l * a1;
        for (x, y) in adv.iter().zip([a0, a1, a2]) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((ret[0] - (a0 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn gae_uses_bootstrap_when_not_done() {
        let (adv, _) = gae(&[0.0], &[0.0], &[false], 2.0, 0.5, 1.0);
        assert_eq!(adv, vec![1.0]);
    }

    #[test]
    fn worker_split_sums_to_total() {
        let cfg = PpoConfig { steps_per_epoch: 503, ..PpoConfig::default() };
        assert_eq!((0..5).map(|i| cfg.steps_for_worker(i)).sum::<usize>(), 503);
        assert!(PpoConfig { clip_ratio: 1.0, ..PpoConfig::default() }.validate().is_err());
    }
}
