use std::fmt::Debug;
use std::hash::Hash;
use std::sync::Arc;

use super::cvrp::{crossover_cvrp, mutate_cvrp, CvrpGenome};
use super::fjsp::{crossover_fjsp, init_population_fjsp, mutate_fjsp, FjspGenome};
use super::SearchRng;
use crate::problems::{
    routes_objectives, schedule_objectives, split_by_capacity, CvrpInstance, FjspInstance, ObjectiveSet,
    ObjectiveVector,
};

/// Problem-specific operator suite driven by [`super::Nsga2`].
pub trait GaProblem: Send + Sync {
    type Genome: Clone + Eq + Hash + Debug + Send + Sync;

    fn num_objectives(&self) -> usize;
    fn evaluate(&self, genome: &Self::Genome) -> ObjectiveVector;
    fn initial_population(&self, size: usize, rng: &mut SearchRng) -> Vec<Self::Genome>;
    fn crossover(&self, a: &Self::Genome, b: &Self::Genome, rng: &mut SearchRng) -> (Self::Genome, Self::Genome);
    /// Mutates with probability `rate` (per individual).
    fn mutate(&self, genome: &mut Self::Genome, rate: f64, rng: &mut SearchRng);
}

#[derive(Debug, Clone)]
pub struct FjspProblem {
    pub instance: Arc<FjspInstance>,
    pub objective_set: ObjectiveSet,
    pub scale: f64,
}

impl FjspProblem {
    pub fn new(instance: Arc<FjspInstance>, objective_set: ObjectiveSet, scale: f64) -> Self {
        Self { instance, objective_set, scale }
    }
}

impl GaProblem for FjspProblem {
    type Genome = FjspGenome;

    fn num_objectives(&self) -> usize {
        self.objective_set.len()
    }

    fn evaluate(&self, genome: &FjspGenome) -> ObjectiveVector {
        let schedule = genome.decode(&self.instance);
        schedule_objectives(&self.instance, &schedule, self.objective_set).scaled(self.scale)
    }

    fn initial_population(&self, size: usize, rng: &mut SearchRng) -> Vec<FjspGenome> {
        init_population_fjsp(&self.instance, size, rng)
    }

    fn crossover(&self, a: &FjspGenome, b: &FjspGenome, rng: &mut SearchRng) -> (FjspGenome, FjspGenome) {
        crossover_fjsp(&self.instance, a, b, rng)
    }

    fn mutate(&self, genome: &mut FjspGenome, rate: f64, rng: &mut SearchRng) {
        mutate_fjsp(&self.instance, genome, rate, rng);
    }
}

#[derive(Debug, Clone)]
pub struct CvrpProblem {
    pub instance: Arc<CvrpInstance>,
    pub scale: f64,
}

impl CvrpProblem {
    pub fn new(instance: Arc<CvrpInstance>, scale: f64) -> Self {
        Self { instance, scale }
    }

    /// Objectives of a visiting order after capacity splitting.
    pub fn evaluate_order(&self, order: &[usize]) -> ObjectiveVector {
        routes_objectives(&self.instance, &split_by_capacity(&self.instance, order)).scaled(self.scale)
    }
}

impl GaProblem for CvrpProblem {
    type Genome = CvrpGenome;

    fn num_objectives(&self) -> usize {
        2
    }

    fn evaluate(&self, genome: &CvrpGenome) -> ObjectiveVector {
        self.evaluate_order(&genome.tour)
    }

    fn initial_population(&self, size: usize, rng: &mut SearchRng) -> Vec<CvrpGenome> {
        (0..size).map(|_| CvrpGenome::random(self.instance.num_customers(), rng)).collect()
    }

    fn crossover(&self, a: &CvrpGenome, b: &CvrpGenome, rng: &mut SearchRng) -> (CvrpGenome, CvrpGenome) {
        crossover_cvrp(a, b, rng)
    }

    fn mutate(&self, genome: &mut CvrpGenome, rate: f64, rng: &mut SearchRng) {
        mutate_cvrp(genome, rate, rng);
    }
}
