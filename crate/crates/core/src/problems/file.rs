//! JSON instance files.
//!
//! ```text
//! {"kind": "fjsp" | "cvrp", "seed": <u64>, "data": {...}, "meta": {...}}
//! ```
//!
//! `data` holds the instance tables (`num_jobs`, `num_machines`,
//! `ops_per_job`, `proc_time[job][op][machine]` with `null` for ineligible
//! machines; or `depot`, `customers[{pos, demand}]`, `capacity`). `meta` is
//! absent until the instance has been bootstrapped.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CvrpInstance, FjspInstance, Instance, InstanceMeta};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Fjsp,
    Cvrp,
}

impl std::str::FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fjsp" => Ok(ProblemKind::Fjsp),
            "cvrp" => Ok(ProblemKind::Cvrp),
            other => Err(format!("unknown problem `{other}` (expected fjsp or cvrp)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFile", into = "RawFile")]
pub struct InstanceFile {
    pub seed: u64,
    pub instance: Instance,
    pub meta: Option<InstanceMeta>,
}

#[derive(Serialize, Deserialize)]
struct RawFile {
    kind: ProblemKind,
    seed: u64,
    data: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<InstanceMeta>,
}

impl TryFrom<RawFile> for InstanceFile {
    type Error = serde_json::Error;

    fn try_from(raw: RawFile) -> std::result::Result<Self, Self::Error> {
        let instance = match raw.kind {
            ProblemKind::Fjsp => serde_json::from_value::<FjspInstance>(raw.data)?.into(),
            ProblemKind::Cvrp => serde_json::from_value::<CvrpInstance>(raw.data)?.into(),
        };
        Ok(InstanceFile { seed: raw.seed, instance, meta: raw.meta })
    }
}

impl From<InstanceFile> for RawFile {
    fn from(f: InstanceFile) -> Self {
        let data = match &f.instance {
            Instance::Fjsp(i) => serde_json::to_value(i.as_ref()),
            Instance::Cvrp(i) => serde_json::to_value(i.as_ref()),
        }
        .expect("instance tables serialize to JSON");
        RawFile { kind: f.instance.kind(), seed: f.seed, data, meta: f.meta }
    }
}

impl InstanceFile {
    pub fn new(seed: u64, instance: Instance) -> Self {
        Self { seed, instance, meta: None }
    }

    pub fn kind(&self) -> ProblemKind {
        self.instance.kind()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance file serializes")
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }
}
