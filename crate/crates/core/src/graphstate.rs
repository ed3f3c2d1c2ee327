//! Front-structured graph view of a population.

use serde::{Deserialize, Serialize};

use crate::matrix::DenseMatrix;
use crate::pareto::non_dominated_sort;
use crate::problems::ObjectiveVector;

/// Per-objective bounds used to map objective values into [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationContext {
    /// Component-wise minima seen so far in the episode.
    pub best_so_far: ObjectiveVector,
    /// Component-wise maxima of generation 0.
    pub worst_initial: ObjectiveVector,
}

impl NormalizationContext {
    /// Context of a generation-0 population.
    ///
    /// # Panics
    ///
    /// If `initial` is empty.
    pub fn from_initial<P: AsRef<[f64]>>(initial: &[P]) -> Self {
        assert!(!initial.is_empty(), "empty initial population");
        let d = initial[0].as_ref().len();
        let mut best = vec![f64::INFINITY; d];
        let mut worst = vec![f64::NEG_INFINITY; d];
        for p in initial {
            for (k, &v) in p.as_ref().iter().enumerate() {
                best[k] = best[k].min(v);
                worst[k] = worst[k].max(v);
            }
        }
        Self { best_so_far: ObjectiveVector(best), worst_initial: ObjectiveVector(worst) }
    }

    /// Lowers `best_so_far` to include `population`.
    pub fn update<P: AsRef<[f64]>>(&mut self, population: &[P]) {
        for p in population {
            for (b, &v) in self.best_so_far.iter_mut().zip(p.as_ref()) {
                *b = b.min(v);
            }
        }
    }

    pub fn num_objectives(&self) -> usize {
        self.best_so_far.len()
    }
}

/// `(v - best) / (worst - best)` per coordinate, clamped to [0, 1]; a
/// coordinate with `worst == best` maps to 0.
pub fn normalize_objectives(v: &[f64], ctx: &NormalizationContext) -> Vec<f64> {
    v.iter()
        .zip(ctx.best_so_far.iter().zip(ctx.worst_initial.iter()))
        .map(|(&x, (&lo, &hi))| {
            let span = hi - lo;
            if span > 0.0 {
                ((x - lo) / span).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect()
}

/// Policy input: one node per population member, edges within each front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateGraph {
    pub node_features: DenseMatrix,
    /// Undirected edges `(i, j)` with `i < j`; no self-loops.
    pub edges: Vec<(usize, usize)>,
    /// Fraction of the generation budget already used.
    pub budget_feature: f64,
}

impl StateGraph {
    pub fn num_nodes(&self) -> usize {
        self.node_features.rows()
    }

    pub fn num_features(&self) -> usize {
        self.node_features.cols()
    }

    /// Debug dump as `{"nodes": [[..]], "edges": [[i, j]], "budget": b}`.
    pub fn to_debug_json(&self) -> serde_json::Value {
        let nodes: Vec<&[f64]> = (0..self.num_nodes()).map(|i| self.node_features.row(i)).collect();
        serde_json::json!({
            "nodes": nodes,
            "edges": self.edges,
            "budget": self.budget_feature,
        })
    }
}

/// Builds the graph of `population` at `generation` out of
/// `total_generations`. A zero budget counts as exhausted.
pub fn build_state_graph<P: AsRef<[f64]>>(
    population: &[P],
    ctx: &NormalizationContext,
    generation: usize,
    total_generations: usize,
) -> StateGraph {
    let d = ctx.num_objectives();
    let rows: Vec<Vec<f64>> = population.iter().map(|p| normalize_objectives(p.as_ref(), ctx)).collect();
    let node_features = DenseMatrix::from_rows(&rows, d);
    let mut edges = Vec::new();
    if !population.is_empty() {
        let partition = non_dominated_sort(population).expect("population shares one objective count");
        for front in &partition.fronts {
            let mut members = front.clone();
            members.sort_unstable();
            for (a, &i) in members.iter().enumerate() {
                for &j in &members[a + 1..] {
                    edges.push((i, j));
                }
            }
        }
    }
    let budget_feature = if total_generations == 0 {
        1.0
    } else {
        (generation as f64 / total_generations as f64).clamp(0.0, 1.0)
    };
    StateGraph { node_features, edges, budget_feature }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> NormalizationContext {
        NormalizationContext::from_initial(&[vec![1.0, 10.0], vec![5.0, 2.0]])
    }

    #[test]
    fn normalization_endpoints_and_clamp() {
        let c = ctx();
        assert_eq!(normalize_objectives(&[1.0, 2.0], &c), vec![0.0, 0.0]);
        assert_eq!(normalize_objectives(&[5.0, 10.0], &c), vec![1.0, 1.0]);
        assert_eq!(normalize_objectives(&[9.0, 0.0], &c), vec![1.0, 0.0]);
        assert_eq!(normalize_objectives(&[3.0, 6.0], &c), vec![0.5, 0.5]);
    }

    #[test]
    fn degenerate_span_maps_to_zero() {
        let c = NormalizationContext::from_initial(&[vec![3.0], vec![3.0]]);
        assert_eq!(normalize_objectives(&[3.0], &c), vec![0.0]);
        assert_eq!(normalize_objectives(&[7.0], &c), vec![0.0]);
    }

    #[test]
    fn fronts_become_cliques() {
        let pop = vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![3.0, 3.0]];
        let c = NormalizationContext::from_initial(&pop);
        let g = build_state_graph(&pop, &c, 0, 50);
        assert_eq!(g.edges, vec![(0, 1)]);
        assert_eq!(g.budget_feature, 0.0);
        assert_eq!(build_state_graph(&pop, &c, 50, 50).budget_feature, 1.0);

        let line: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 5.0 - i as f64]).collect();
        let g = build_state_graph(&line, &NormalizationContext::from_initial(&line), 3, 10);
        assert_eq!(g.edges.len(), 15);
    }
}
