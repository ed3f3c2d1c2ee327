//! Random-key particle swarm for routing.

use rand::Rng;

use super::problem::CvrpProblem;
use super::{AlgorithmKind, GenerationParams, Individual, SearchRng, SearchState, SearchStats, TunableAlgorithm};
use crate::pareto::dominates;
use crate::problems::{split_by_capacity, CvrpInstance, ObjectiveVector};

/// Velocity bound per dimension on the [0, 1] key scale.
pub const VELOCITY_LIMIT: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub personal_best: (Vec<f64>, ObjectiveVector),
}

/// Customers sorted by ascending key (ties by index), then split into routes
/// by capacity.
pub fn decode_cvrp_keys(position: &[f64], instance: &CvrpInstance) -> Vec<Vec<usize>> {
    split_by_capacity(instance, &key_order(position))
}

fn key_order(position: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..position.len()).collect();
    order.sort_by(|&a, &b| position[a].total_cmp(&position[b]));
    order
}

pub struct Mopso {
    problem: CvrpProblem,
    particles: Vec<Particle>,
    /// Population genomes are particle positions.
    state: SearchState<Vec<f64>>,
}

impl Mopso {
    /// Random positions in [0, 1]ⁿ and velocities in ±[`VELOCITY_LIMIT`].
    pub fn new(problem: CvrpProblem, swarm_size: usize, rng: &mut SearchRng) -> Self {
        assert!(swarm_size > 0, "swarm size must be positive");
        let n = problem.instance.num_customers();
        let mut particles = Vec::with_capacity(swarm_size);
        let mut population = Vec::with_capacity(swarm_size);
        for _ in 0..swarm_size {
            let position: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let velocity: Vec<f64> = (0..n).map(|_| rng.random_range(-VELOCITY_LIMIT..=VELOCITY_LIMIT)).collect();
            let objectives = problem.evaluate_order(&key_order(&position));
            particles.push(Particle {
                position: position.clone(),
                velocity,
                personal_best: (position.clone(), objectives.clone()),
            });
            population.push(Individual { genome: position, objectives });
        }
        Self { problem, particles, state: SearchState::initial(population) }
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn state(&self) -> &SearchState<Vec<f64>> {
        &self.state
    }

    pub fn generation(&mut self, phi1: f64, phi2: f64, inertia: f64, rng: &mut SearchRng) {
        let mut evaluated = Vec::with_capacity(self.particles.len());
        for p in &mut self.particles {
            let leaders = self.state.archive.entries();
            let gbest = &leaders[rng.random_range(0..leaders.len())].1;
            for d in 0..p.position.len() {
                let u1: f64 = rng.random();
                let u2: f64 = rng.random();
                let x = p.position[d];
                let v = inertia * p.velocity[d]
                    + u1 * phi1 * (p.personal_best.0[d] - x)
                    + u2 * phi2 * (gbest[d] - x);
                p.velocity[d] = v.clamp(-VELOCITY_LIMIT, VELOCITY_LIMIT);
                p.position[d] = (x + p.velocity[d]).clamp(0.0, 1.0);
            }
            let objectives = self.problem.evaluate_order(&key_order(&p.position));
            let pbest = &p.personal_best.1;
            let replace = if dominates(&objectives, pbest) {
                true
            } else if dominates(pbest, &objectives) {
                false
            } else {
                rng.random_bool(0.5)
            };
            if replace {
                p.personal_best = (p.position.clone(), objectives.clone());
            }
            evaluated.push(Individual { genome: p.position.clone(), objectives });
        }
        self.state.advance(evaluated.clone(), &evaluated);
    }
}

impl TunableAlgorithm for Mopso {
    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::Mopso
    }

    fn stats(&self) -> SearchStats {
        SearchStats {
            generation: self.state.generation,
            hv_initial: self.state.hv_initial,
            hv_current: self.state.hv_current,
            hv_best: self.state.hv_best,
            hv_time: self.state.hv_time,
        }
    }

    fn nadir(&self) -> &ObjectiveVector {
        &self.state.nadir
    }

    fn population_objectives(&self) -> Vec<ObjectiveVector> {
        self.state.objectives()
    }

    fn archive_objectives(&self) -> Vec<ObjectiveVector> {
        self.state.archive.objectives()
    }

    fn step(&mut self, params: &GenerationParams, rng: &mut SearchRng) {
        let GenerationParams::Pso { phi1, phi2, inertia } = *params else {
            panic!("MOPSO expects phi1/phi2/inertia parameters, got {params:?}");
        };
        self.generation(phi1, phi2, inertia, rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{generate_cvrp, CvrpGenConfig};
    use rand::SeedableRng;
    use std::sync::Arc;

    fn swarm(seed: u64) -> (Mopso, SearchRng) {
        let inst = Arc::new(generate_cvrp(seed, 12, &CvrpGenConfig::default()).unwrap());
        let mut rng = SearchRng::seed_from_u64(seed);
        (Mopso::new(CvrpProblem::new(inst, 1.0), 8, &mut rng), rng)
    }

    #[test]
    fn null_update_freezes_positions() {
        let (mut s, mut rng) = swarm(3);
        let before: Vec<_> = s.particles().iter().map(|p| p.position.clone()).collect();
        s.generation(0.0, 0.0, 0.0, &mut rng);
        for (p, x) in s.particles().iter().zip(before) {
            assert_eq!(p.position, x);
            assert!(p.velocity.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn sorted_keys_decode_in_index_order() {
        let inst = generate_cvrp(1, 5, &CvrpGenConfig { demand: (1, 1), capacity: 40 }).unwrap();
        assert_eq!(decode_cvrp_keys(&[0.1, 0.2, 0.2, 0.5, 0.9], &inst), vec![vec![0, 1, 2, 3, 4]]);
        assert_eq!(decode_cvrp_keys(&[0.9, 0.5, 0.2, 0.2, 0.1], &inst), vec![vec![4, 2, 3, 1, 0]]);
    }
}
