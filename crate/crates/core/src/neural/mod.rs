//! Policy network: GCN trunk, mean pooling, actor and critic heads, with
//! hand-written reverse-mode gradients.

mod adam;
mod checkpoint;
mod gcn;

use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphstate::StateGraph;
use crate::matrix::{dot, DenseMatrix};

pub use adam::Adam;
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, TrainingState, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use gcn::{Activation, GcnCache, GcnGrads, GcnLayer, NormalizedAdjacency};

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("invalid policy configuration: {0}")]
    InvalidConfig(String),
    #[error("edge {edge:?} out of range for {num_nodes} nodes")]
    EdgeOutOfRange { edge: (usize, usize), num_nodes: usize },
    #[error("expected {expected} node features, found {found}")]
    FeatureMismatch { expected: usize, found: usize },
    #[error("forward cache from parameter version {cache} used with version {current}")]
    StaleCache { cache: u64, current: u64 },
    #[error("architecture mismatch: {what} is {found}, expected {expected}")]
    ArchitectureMismatch { what: &'static str, expected: usize, found: usize },
    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Lower bound of the action log-spread (spread 0.01).
pub const LOG_STD_MIN: f64 = -4.605_170_185_988_091;
/// Upper bound of the action log-spread (spread 1.0).
pub const LOG_STD_MAX: f64 = 0.0;
/// Initial action log-spread (spread 0.5).
pub const LOG_STD_INIT: f64 = -std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub num_objectives: usize,
    pub hidden: usize,
    pub gcn_layers: usize,
    /// 1 when the budget feature is appended to the pooled embedding.
    pub aux_dim: usize,
    pub action_dim: usize,
}

impl PolicyConfig {
    /// Two GCN layers of width 64 with the budget feature on.
    pub fn new(num_objectives: usize, action_dim: usize) -> Self {
        Self { num_objectives, hidden: 64, gcn_layers: 2, aux_dim: 1, action_dim }
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        let bad = |m: String| Err(NeuralError::InvalidConfig(m));
        if self.num_objectives == 0 {
            return bad("num_objectives must be positive".into());
        }
        if self.hidden == 0 {
            return bad("hidden width must be positive".into());
        }
        if !(1..=2).contains(&self.gcn_layers) {
            return bad(format!("gcn_layers must be 1 or 2, got {}", self.gcn_layers));
        }
        if self.aux_dim > 1 {
            return bad(format!("aux_dim must be 0 or 1, got {}", self.aux_dim));
        }
        if self.action_dim == 0 {
            return bad("action_dim must be positive".into());
        }
        Ok(())
    }

    fn head_in(&self) -> usize {
        self.hidden + self.aux_dim
    }
}

/// Trainable tensors of a [`PolicyNet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParameters {
    pub gcn: Vec<GcnLayer>,
    /// `[hidden + aux_dim, action_dim]`.
    pub actor_weight: DenseMatrix,
    pub actor_bias: Vec<f64>,
    pub critic_weight: Vec<f64>,
    pub critic_bias: f64,
    pub log_std: Vec<f64>,
}

static NEXT_VERSION: AtomicU64 = AtomicU64::new(1);

fn fresh_version() -> u64 {
    NEXT_VERSION.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug)]
pub struct PolicyNet {
    config: PolicyConfig,
    params: PolicyParameters,
    /// Changes whenever the parameters change; forward caches carry it.
    version: u64,
}

impl Clone for PolicyNet {
    fn clone(&self) -> Self {
        Self { config: self.config, params: self.params.clone(), version: self.version }
    }
}

impl PartialEq for PolicyNet {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.params == other.params
    }
}

/// Action means in (-1, 1) and the state value.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutput {
    pub mean: Vec<f64>,
    pub value: f64,
}

/// Intermediates retained by [`PolicyNet::forward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    version: u64,
    adjacency: NormalizedAdjacency,
    inputs: DenseMatrix,
    layers: Vec<GcnCache>,
    /// Pooled embedding with the budget feature appended when enabled.
    head_input: Vec<f64>,
    mean: Vec<f64>,
}

impl ForwardCache {
    pub fn head_input(&self) -> &[f64] {
        &self.head_input
    }
}

/// Upstream gradients of a scalar loss with respect to the network outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputGrad {
    pub mean: Vec<f64>,
    pub value: f64,
    /// Gradient w.r.t. `log_std`, which bypasses the forward graph.
    pub log_std: Vec<f64>,
}

impl OutputGrad {
    pub fn zeros(action_dim: usize) -> Self {
        Self { mean: vec![0.0; action_dim], value: 0.0, log_std: vec![0.0; action_dim] }
    }
}

impl PolicyNet {
    /// Weights uniform in `±1/√fan_in`, zero biases, spread 0.5.
    pub fn new(config: PolicyConfig, seed: u64) -> Result<Self, NeuralError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut uniform = |rows: usize, cols: usize| {
            let bound = 1.0 / (rows as f64).sqrt();
            let data = (0..rows * cols).map(|_| rng.random_range(-bound..=bound)).collect();
            DenseMatrix::from_vec(rows, cols, data)
        };
        let mut gcn = Vec::with_capacity(config.gcn_layers);
        for l in 0..config.gcn_layers {
            let in_dim = if l == 0 { config.num_objectives } else { config.hidden };
            gcn.push(GcnLayer {
                weight: uniform(in_dim, config.hidden),
                bias: vec![0.0; config.hidden],
                activation: Activation::Tanh,
            });
        }
        let actor_weight = uniform(config.head_in(), config.action_dim);
        let critic_weight = uniform(config.head_in(), 1).data().to_vec();
        let params = PolicyParameters {
            gcn,
            actor_weight,
            actor_bias: vec![0.0; config.action_dim],
            critic_weight,
            critic_bias: 0.0,
            log_std: vec![LOG_STD_INIT; config.action_dim],
        };
        Ok(Self { config, params, version: fresh_version() })
    }

    /// Assembles a network from explicit tensors, checking every shape.
    pub fn from_parameters(config: PolicyConfig, params: PolicyParameters) -> Result<Self, NeuralError> {
        config.validate()?;
        let mismatch = |what, expected, found| Err(NeuralError::ArchitectureMismatch { what, expected, found });
        if params.gcn.len() != config.gcn_layers {
            return mismatch("gcn layer count", config.gcn_layers, params.gcn.len());
        }
        for (l, layer) in params.gcn.iter().enumerate() {
            let in_dim = if l == 0 { config.num_objectives } else { config.hidden };
            if layer.weight.rows() != in_dim {
                return mismatch("gcn weight rows", in_dim, layer.weight.rows());
            }
            if layer.weight.cols() != config.hidden {
                return mismatch("gcn weight cols", config.hidden, layer.weight.cols());
            }
            if layer.weight.data().len() != in_dim * config.hidden {
                return mismatch("gcn weight length", in_dim * config.hidden, layer.weight.data().len());
            }
            if layer.bias.len() != config.hidden {
                return mismatch("gcn bias length", config.hidden, layer.bias.len());
            }
        }
        let head_in = config.head_in();
        let aw = &params.actor_weight;
        if aw.rows() != head_in || aw.cols() != config.action_dim || aw.data().len() != head_in * config.action_dim {
            return mismatch("actor weight length", head_in * config.action_dim, aw.data().len());
        }
        if params.actor_bias.len() != config.action_dim {
            return mismatch("actor bias length", config.action_dim, params.actor_bias.len());
        }
        if params.critic_weight.len() != head_in {
            return mismatch("critic weight length", head_in, params.critic_weight.len());
        }
        if params.log_std.len() != config.action_dim {
            return mismatch("log_std length", config.action_dim, params.log_std.len());
        }
        Ok(Self { config, params, version: fresh_version() })
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    pub fn params(&self) -> &PolicyParameters {
        &self.params
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn log_std(&self) -> &[f64] {
        &self.params.log_std
    }

    /// Named ranges of the flat parameter vector, in [`Self::parameters`] order.
    pub fn parameter_groups(&self) -> Vec<(String, Range<usize>)> {
        let mut groups = Vec::new();
        let mut at = 0;
        let mut push = |name: String, len: usize| {
            groups.push((name, at..at + len));
            at += len;
        };
        for (l, layer) in self.params.gcn.iter().enumerate() {
            push(format!("gcn{l}.weight"), layer.weight.data().len());
            push(format!("gcn{l}.bias"), layer.bias.len());
        }
        push("actor.weight".into(), self.params.actor_weight.data().len());
        push("actor.bias".into(), self.params.actor_bias.len());
        push("critic.weight".into(), self.params.critic_weight.len());
        push("critic.bias".into(), 1);
        push("log_std".into(), self.params.log_std.len());
        groups
    }

    pub fn num_parameters(&self) -> usize {
        self.parameter_groups().last().map_or(0, |(_, r)| r.end)
    }

    pub fn parameters(&self) -> Vec<f64> {
        let p = &self.params;
        let mut out = Vec::with_capacity(self.num_parameters());
        for layer in &p.gcn {
            out.extend_from_slice(layer.weight.data());
            out.extend_from_slice(&layer.bias);
        }
        out.extend_from_slice(p.actor_weight.data());
        out.extend_from_slice(&p.actor_bias);
        out.extend_from_slice(&p.critic_weight);
        out.push(p.critic_bias);
        out.extend_from_slice(&p.log_std);
        out
    }

    /// Overwrites every parameter from a flat vector.
    ///
    /// # Panics
    ///
    /// If `values` has the wrong length.
    pub fn set_parameters(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.num_parameters(), "parameter vector length mismatch");
        let mut rest = values;
        let mut take = |dst: &mut [f64]| {
            let (head, tail) = rest.split_at(dst.len());
            dst.copy_from_slice(head);
            rest = tail;
        };
        let p = &mut self.params;
        for layer in &mut p.gcn {
            take(layer.weight.data_mut());
            take(&mut layer.bias);
        }
        take(p.actor_weight.data_mut());
        take(&mut p.actor_bias);
        take(&mut p.critic_weight);
        let mut cb = [0.0];
        take(&mut cb);
        p.critic_bias = cb[0];
        take(&mut p.log_std);
        self.version = fresh_version();
    }

    /// Projects `log_std` into `[LOG_STD_MIN, LOG_STD_MAX]`.
    pub fn clamp_log_std(&mut self) {
        for v in &mut self.params.log_std {
            *v = v.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }

    /// One optimizer step along `grads`, followed by the spread projection.
    pub fn apply_gradients(&mut self, optimizer: &mut Adam, grads: &[f64]) {
        let mut p = self.parameters();
        optimizer.step(&mut p, grads);
        self.set_parameters(&p);
        self.clamp_log_std();
    }

    pub fn forward(&self, graph: &StateGraph) -> Result<(PolicyOutput, ForwardCache), NeuralError> {
        if graph.num_features() != self.config.num_objectives {
            return Err(NeuralError::FeatureMismatch {
                expected: self.config.num_objectives,
                found: graph.num_features(),
            });
        }
        let adjacency = NormalizedAdjacency::new(graph.num_nodes(), &graph.edges)?;
        let mut layers: Vec<GcnCache> = Vec::with_capacity(self.params.gcn.len());
        for layer in &self.params.gcn {
            let input = layers.last().map_or(&graph.node_features, |c| &c.output);
            let cache = layer.forward(&adjacency, input)?;
            layers.push(cache);
        }
        let mut head_input = layers.last().expect("at least one layer").output.mean_rows();
        if self.config.aux_dim == 1 {
            head_input.push(graph.budget_feature);
        }
        let aw = &self.params.actor_weight;
        let mean: Vec<f64> = (0..self.config.action_dim)
            .map(|k| {
                let pre: f64 = head_input.iter().enumerate().map(|(i, z)| z * aw.get(i, k)).sum();
                (pre + self.params.actor_bias[k]).tanh()
            })
            .collect();
        let value = dot(&head_input, &self.params.critic_weight) + self.params.critic_bias;
        let cache = ForwardCache {
            version: self.version,
            adjacency,
            inputs: graph.node_features.clone(),
            layers,
            head_input,
            mean: mean.clone(),
        };
        Ok((PolicyOutput { mean, value }, cache))
    }

    pub fn predict(&self, graph: &StateGraph) -> Result<PolicyOutput, NeuralError> {
        self.forward(graph).map(|(out, _)| out)
    }

    /// Gradient of a scalar loss w.r.t. every parameter, flat in
    /// [`Self::parameters`] order.
    pub fn backward(&self, cache: &ForwardCache, grad: &OutputGrad) -> Result<Vec<f64>, NeuralError> {
        if cache.version != self.version {
            return Err(NeuralError::StaleCache { cache: cache.version, current: self.version });
        }
        let cfg = &self.config;
        let p = &self.params;
        let head_in = cfg.head_in();
        let grad_pre: Vec<f64> = grad.mean.iter().zip(&cache.mean).map(|(g, m)| g * (1.0 - m * m)).collect();

        let mut actor_w = DenseMatrix::zeros(head_in, cfg.action_dim);
        let mut grad_z = vec![0.0; head_in];
        for (i, &z) in cache.head_input.iter().enumerate() {
            let row = actor_w.row_mut(i);
            for (k, &g) in grad_pre.iter().enumerate() {
                row[k] = z * g;
                grad_z[i] += p.actor_weight.get(i, k) * g;
            }
            grad_z[i] += grad.value * p.critic_weight[i];
        }
        let critic_w: Vec<f64> = cache.head_input.iter().map(|z| z * grad.value).collect();

        let n = cache.inputs.rows();
        let mut grad_h = DenseMatrix::zeros(n, cfg.hidden);
        if n > 0 {
            let share = 1.0 / n as f64;
            for i in 0..n {
                for (g, &gz) in grad_h.row_mut(i).iter_mut().zip(&grad_z[..cfg.hidden]) {
                    *g = gz * share;
                }
            }
        }
        let mut layer_grads: Vec<GcnGrads> = Vec::with_capacity(p.gcn.len());
        for (l, layer) in p.gcn.iter().enumerate().rev() {
            let g = layer.backward(&cache.adjacency, &cache.layers[l], &grad_h);
            grad_h = g.input.clone();
            layer_grads.push(g);
        }
        layer_grads.reverse();

        let mut out = Vec::with_capacity(self.num_parameters());
        for g in &layer_grads {
            out.extend_from_slice(g.weight.data());
            out.extend_from_slice(&g.bias);
        }
        out.extend_from_slice(actor_w.data());
        out.extend_from_slice(&grad_pre);
        out.extend_from_slice(&critic_w);
        out.push(grad.value);
        out.extend_from_slice(&grad.log_std);
        Ok(out)
    }
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Log-density of `action` under a diagonal Gaussian.
pub fn gaussian_log_prob(action: &[f64], mean: &[f64], log_std: &[f64]) -> f64 {
    action
        .iter()
        .zip(mean)
        .zip(log_std)
        .map(|((a, m), ls)| {
            let z = (a - m) / ls.exp();
            -0.5 * z * z - ls - LN_SQRT_2PI
        })
        .sum()
}

/// Entropy of a diagonal Gaussian.
pub fn gaussian_entropy(log_std: &[f64]) -> f64 {
    log_std.iter().map(|ls| ls + 0.5 + LN_SQRT_2PI).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, d: usize) -> StateGraph {
        let data = (0..n * d).map(|i| ((i * 7 % 11) as f64) / 10.0).collect();
        let edges = (1..n).map(|i| (i - 1, i)).collect();
        StateGraph { node_features: DenseMatrix::from_vec(n, d, data), edges, budget_feature: 0.4 }
    }

    #[test]
    fn zero_weights_give_bias_outputs() {
        let cfg = PolicyConfig::new(2, 2);
        let mut net = PolicyNet::new(cfg, 0).unwrap();
        let mut p = vec![0.0; net.num_parameters()];
        let groups = net.parameter_groups();
        let bias = groups.iter().find(|(n, _)| n == "actor.bias").unwrap().1.clone();
        p[bias.start] = 0.3;
        p[bias.start + 1] = -0.2;
        let cb = groups.iter().find(|(n, _)| n == "critic.bias").unwrap().1.clone();
        p[cb.start] = 1.25;
        net.set_parameters(&p);
        let out = net.predict(&graph(4, 2)).unwrap();
        assert_eq!(out.mean, vec![0.3f64.tanh(), (-0.2f64).tanh()]);
        assert_eq!(out.value, 1.25);
    }

    #[test]
    fn value_gradient_is_head_input() {
        let net = PolicyNet::new(PolicyConfig::new(3, 2), 5).unwrap();
        let (_, cache) = net.forward(&graph(5, 3)).unwrap();
        let g = net.backward(&cache, &OutputGrad { value: 1.0, ..OutputGrad::zeros(2) }).unwrap();
        let groups = net.parameter_groups();
        for (name, r) in &groups {
            match name.as_str() {
                "critic.weight" => assert_eq!(&g[r.clone()], cache.head_input()),
                "critic.bias" => assert_eq!(g[r.start], 1.0),
                n if n.starts_with("actor") || n == "log_std" => assert!(g[r.clone()].iter().all(|&v| v == 0.0)),
                _ => {}
            }
        }
    }

    #[test]
    fn stale_cache_rejected() {
        let mut net = PolicyNet::new(PolicyConfig::new(2, 2), 1).unwrap();
        let (_, cache) = net.forward(&graph(3, 2)).unwrap();
        let p = net.parameters();
        net.set_parameters(&p);
        assert!(matches!(net.backward(&cache, &OutputGrad::zeros(2)), Err(NeuralError::StaleCache { .. })));
    }

    #[test]
    fn gaussian_helpers() {
        let lp = gaussian_log_prob(&[0.0], &[0.0], &[0.0]);
        assert!((lp + LN_SQRT_2PI).abs() < 1e-15);
        assert!((gaussian_entropy(&[0.0]) - 1.418_938_533_204_672_7).abs() < 1e-15);
        assert!((LOG_STD_MIN - 0.01f64.ln()).abs() < 1e-15);
    }
}
