//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use modac_core::graphstate::{build_state_graph, NormalizationContext, StateGraph};
use modac_core::problems::{generate_cvrp, generate_fjsp, CvrpGenConfig, FjspGenConfig};
use modac_core::{CvrpInstance, FjspInstance};

pub fn fjsp(seed: u64, jobs: usize, machines: usize) -> Arc<FjspInstance> {
    Arc::new(generate_fjsp(seed, jobs, machines, &FjspGenConfig::default()).expect("valid generator arguments"))
}

pub fn cvrp(seed: u64, customers: usize) -> Arc<CvrpInstance> {
    Arc::new(generate_cvrp(seed, customers, &CvrpGenConfig::default()).expect("valid generator arguments"))
}

/// `n` uniform points in `[0, 1)^d`.
pub fn random_points(seed: u64, n: usize, d: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect()
}

/// Points on the simplex `Σ x = 1`, all mutually non-dominated.
pub fn simplex_front(seed: u64, n: usize, d: usize) -> Vec<Vec<f64>> {
    random_points(seed, n, d)
        .into_iter()
        .map(|p| {
            let s: f64 = p.iter().sum::<f64>().max(1e-12);
            p.into_iter().map(|x| x / s).collect()
        })
        .collect()
}

pub fn graph(seed: u64, n: usize, d: usize) -> StateGraph {
    let pts = random_points(seed, n, d);
    let ctx = NormalizationContext::from_initial(&pts);
    build_state_graph(&pts, &ctx, 10, 50)
}
