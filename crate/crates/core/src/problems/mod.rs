//! Problem instances, random generators and objective evaluation.

mod cvrp;
mod fjsp;
mod file;

use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cvrp::{
    evaluate_cvrp, generate_cvrp, route_length, routes_objectives, split_by_capacity, Customer, CvrpGenConfig,
    CvrpInstance,
};
pub use file::{InstanceFile, ProblemKind};
pub use fjsp::{
    decode_semi_active, evaluate_fjsp, generate_fjsp, schedule_objectives, validate_schedule, FjspGenConfig,
    FjspInstance, ProcTime, Schedule, ScheduledOp,
};

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("invalid range for {what}: min {min} > max {max}")]
    InvalidRange { what: &'static str, min: u64, max: u64 },
    #[error("invalid count for {what}: {value}")]
    InvalidCount { what: &'static str, value: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("infeasible schedule: {0}")]
    InfeasibleSchedule(String),
    #[error("invalid routes: {0}")]
    InvalidRoutes(String),
    #[error("objective set {set:?} is not available for {kind:?}")]
    UnsupportedObjectiveSet { set: ObjectiveSet, kind: ProblemKind },
}

/// A vector of objective values, all minimized.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(pub Vec<f64>);

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    /// Multiplies every component by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        for v in &mut self.0 {
            *v *= factor;
        }
        self
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ObjectiveVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ObjectiveVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl AsRef<[f64]> for ObjectiveVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ObjectiveVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

/// Which prefix of the scheduling objectives is optimized.
///
/// Scheduling objectives are ordered makespan, workload balance, average
/// flowtime, total workload, maximum flowtime. Routing always uses two
/// objectives (total distance, longest route), i.e. [`ObjectiveSet::Bi`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveSet {
    Bi,
    Tri,
    Penta,
}

impl ObjectiveSet {
    pub fn len(self) -> usize {
        match self {
            ObjectiveSet::Bi => 2,
            ObjectiveSet::Tri => 3,
            ObjectiveSet::Penta => 5,
        }
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn check_for(self, kind: ProblemKind) -> Result<(), ProblemError> {
        match (kind, self) {
            (ProblemKind::Fjsp, _) | (ProblemKind::Cvrp, ObjectiveSet::Bi) => Ok(()),
            (kind, set) => Err(ProblemError::UnsupportedObjectiveSet { set, kind }),
        }
    }
}

impl std::str::FromStr for ObjectiveSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bi" => Ok(ObjectiveSet::Bi),
            "tri" => Ok(ObjectiveSet::Tri),
            "penta" => Ok(ObjectiveSet::Penta),
            other => Err(format!("unknown objective set `{other}` (expected bi, tri or penta)")),
        }
    }
}

/// Either kind of problem instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Fjsp(Arc<FjspInstance>),
    Cvrp(Arc<CvrpInstance>),
}

impl Instance {
    pub fn kind(&self) -> ProblemKind {
        match self {
            Instance::Fjsp(_) => ProblemKind::Fjsp,
            Instance::Cvrp(_) => ProblemKind::Cvrp,
        }
    }
}

impl From<FjspInstance> for Instance {
    fn from(i: FjspInstance) -> Self {
        Instance::Fjsp(Arc::new(i))
    }
}

impl From<CvrpInstance> for Instance {
    fn from(i: CvrpInstance) -> Self {
        Instance::Cvrp(Arc::new(i))
    }
}

/// Evaluation metadata attached to an instance after bootstrapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    /// Nadir used as the hypervolume reference point during evaluation.
    pub reference_point: ObjectiveVector,
    /// Component-wise best objective values seen in an extended-budget run.
    pub ideal_point: ObjectiveVector,
    pub source_seed: u64,
    /// Label of the algorithm the meta was bootstrapped with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective_set: Option<ObjectiveSet>,
    /// Hypervolume of the ideal point's box with respect to `reference_point`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hv_ideal: Option<f64>,
}

impl InstanceMeta {
    pub fn num_objectives(&self) -> usize {
        self.reference_point.len()
    }
}
