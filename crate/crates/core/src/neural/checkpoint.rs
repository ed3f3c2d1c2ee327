//! JSON checkpoint container.
//!
//! ```text
//! {
//!   "format": "modac-policy",
//!   "version": 1,
//!   "architecture": {"num_objectives", "hidden", "gcn_layers", "aux_dim", "action_dim"},
//!   "parameters": {"gcn": [{"weight", "bias", "activation"}], "actor_weight",
//!                  "actor_bias", "critic_weight", "critic_bias", "log_std"},
//!   "training": {"epoch", "optimizer"}        // optional
//! }
//! ```
//!
//! Matrices are `{"rows", "cols", "data"}` with row-major data. Floats are
//! written with round-trip precision, so a save/load cycle is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Adam, NeuralError, PolicyConfig, PolicyNet, PolicyParameters};

pub const CHECKPOINT_FORMAT: &str = "modac-policy";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Optimizer progress stored alongside the parameters for resuming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingState {
    /// Number of completed epochs.
    pub epoch: u64,
    pub optimizer: Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub architecture: PolicyConfig,
    pub parameters: PolicyParameters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainingState>,
}

impl Checkpoint {
    pub fn new(net: &PolicyNet, training: Option<TrainingState>) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            architecture: *net.config(),
            parameters: net.params().clone(),
            training,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, NeuralError> {
        let ck: Checkpoint = serde_json::from_str(text).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
        if ck.format != CHECKPOINT_FORMAT {
            return Err(NeuralError::Checkpoint(format!("unknown format tag `{}`", ck.format)));
        }
        if ck.version != CHECKPOINT_VERSION {
            return Err(NeuralError::Checkpoint(format!(
                "unsupported version {} (expected {CHECKPOINT_VERSION})",
                ck.version
            )));
        }
        if let Some(t) = &ck.training {
            let expected = ck.policy_parameter_count();
            if t.optimizer.num_params() != expected {
                return Err(NeuralError::ArchitectureMismatch {
                    what: "optimizer state length",
                    expected,
                    found: t.optimizer.num_params(),
                });
            }
        }
        Ok(ck)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    fn policy_parameter_count(&self) -> usize {
        let p = &self.parameters;
        p.gcn.iter().map(|l| l.weight.data().len() + l.bias.len()).sum::<usize>()
            + p.actor_weight.data().len()
            + p.actor_bias.len()
            + p.critic_weight.len()
            + 1
            + p.log_std.len()
    }

    /// Rebuilds the network, validating every tensor shape.
    pub fn policy(&self) -> Result<PolicyNet, NeuralError> {
        PolicyNet::from_parameters(self.architecture, self.parameters.clone())
    }

    /// Errors unless the checkpoint matches the expected input and action
    /// widths.
    pub fn ensure_compatible(&self, num_objectives: usize, action_dim: usize) -> Result<(), NeuralError> {
        let a = &self.architecture;
        if a.num_objectives != num_objectives {
            return Err(NeuralError::ArchitectureMismatch {
                what: "num_objectives",
                expected: num_objectives,
                found: a.num_objectives,
            });
        }
        if a.action_dim != action_dim {
            return Err(NeuralError::ArchitectureMismatch { what: "action_dim", expected: action_dim, found: a.action_dim });
        }
        Ok(())
    }
}

pub fn save_checkpoint(net: &PolicyNet, training: Option<&TrainingState>, path: impl AsRef<Path>) -> Result<(), NeuralError> {
    let text = Checkpoint::new(net, training.cloned()).to_json();
    let path = path.as_ref();
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint, NeuralError> {
    let text = fs::read_to_string(path)?;
    let ck = Checkpoint::from_json(&text)?;
    ck.policy()?;
    Ok(ck)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;
    use crate::StateGraph;

    #[test]
    fn round_trip_is_bit_exact() {
        let net = PolicyNet::new(PolicyConfig::new(3, 2), 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        let training = TrainingState { epoch: 3, optimizer: Adam::new(net.num_parameters(), 3e-4) };
        save_checkpoint(&net, Some(&training), &path).unwrap();
        let ck = load_checkpoint(&path).unwrap();
        let back = ck.policy().unwrap();
        assert_eq!(back, net);
        assert_eq!(ck.training, Some(training));
        let g = StateGraph {
            node_features: DenseMatrix::from_vec(2, 3, vec![0.1, 0.2, 0.3, 0.9, 0.8, 0.7]),
            edges: vec![(0, 1)],
            budget_feature: 0.5,
        };
        assert_eq!(back.predict(&g).unwrap(), net.predict(&g).unwrap());
    }

    #[test]
    fn rejects_mismatch_and_truncation() {
        let net = PolicyNet::new(PolicyConfig::new(2, 3), 0).unwrap();
        let ck = Checkpoint::new(&net, None);
        assert!(matches!(
            ck.ensure_compatible(2, 2),
            Err(NeuralError::ArchitectureMismatch { what: "action_dim", .. })
        ));
        let text = ck.to_json();
        assert!(matches!(Checkpoint::from_json(&text[..text.len() / 2]), Err(NeuralError::Checkpoint(_))));
        let mut bad = ck.clone();
        bad.architecture.action_dim = 2;
        assert!(bad.policy().is_err());
    }
}
