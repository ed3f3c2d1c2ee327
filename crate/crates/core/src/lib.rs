//! Graph-state dynamic algorithm configuration for multi-objective
//! evolutionary algorithms.
//!
//! A PPO-trained graph convolutional policy observes the current population
//! of an evolutionary search (as a graph of normalized objective vectors,
//! connected within Pareto fronts) and re-tunes the algorithm's parameters
//! every generation. The crate contains every piece of that loop:
//!
//! - [`problems`]: flexible job-shop scheduling and capacitated vehicle
//!   routing instances, generators and evaluators.
//! - [`pareto`]: dominance, non-dominated sorting, crowding distance, exact
//!   hypervolume, IGD and IGD+.
//! - [`moea`]: NSGA-II (scheduling and routing operator suites) and MOPSO,
//!   both accepting new parameters each generation.
//! - [`graphstate`]: population to graph conversion.
//! - [`neural`]: dense matrices, GCN layers, the policy network with exact
//!   reverse-mode gradients, Adam, checkpoints.
//! - [`rl`]: the episode environment, reward, bootstrapping of instance
//!   metadata, rollouts and PPO.

pub mod graphstate;
pub mod matrix;
pub mod moea;
pub mod neural;
pub mod pareto;
pub mod problems;
pub mod rl;

mod error;

pub use error::{Error, Result};
pub use graphstate::{NormalizationContext, StateGraph};
pub use matrix::DenseMatrix;
pub use moea::{AlgorithmKind, GenerationParams, SearchRng};
pub use neural::{PolicyConfig, PolicyNet};
pub use pareto::FrontPartition;
pub use problems::{CvrpInstance, FjspInstance, Instance, InstanceMeta, ObjectiveSet, ObjectiveVector};
pub use rl::{EpisodeEnv, PpoConfig};
