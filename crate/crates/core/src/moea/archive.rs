use crate::pareto::{dominates, weakly_dominates};
use crate::problems::ObjectiveVector;

/// Unbounded non-dominated archive. Each entry carries a payload (the genome
/// or particle that produced it).
#[derive(Debug, Clone, PartialEq)]
pub struct Archive<T> {
    entries: Vec<(ObjectiveVector, T)>,
}

impl<T> Default for Archive<T> {
    fn default() -> Self {
        Self { entries: Vec::new() }
    }
}

impl<T> Archive<T> {
    /// Inserts `objectives` unless an entry weakly dominates it; evicts the
    /// entries it dominates. Returns whether it was inserted.
    pub fn insert(&mut self, objectives: &ObjectiveVector, payload: impl FnOnce() -> T) -> bool {
        if self.entries.iter().any(|(o, _)| weakly_dominates(o, objectives)) {
            return false;
        }
        self.entries.retain(|(o, _)| !dominates(objectives, o));
        self.entries.push((objectives.clone(), payload()));
        true
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(ObjectiveVector, T)] {
        &self.entries
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.entries.iter().map(|(o, _)| o.clone()).collect()
    }
}
