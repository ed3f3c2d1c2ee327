//! Target algorithms: NSGA-II with scheduling and routing operator suites, and
//! MOPSO for routing. Each accepts fresh [`GenerationParams`] every
//! generation.

mod archive;
pub mod cvrp;
pub mod fjsp;
mod mopso;
mod nsga2;
mod problem;

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::pareto::hypervolume;
use crate::problems::{Instance, ObjectiveSet, ObjectiveVector, ProblemError, ProblemKind};

pub use archive::Archive;
pub use cvrp::CvrpGenome;
pub use fjsp::FjspGenome;
pub use mopso::{decode_cvrp_keys, Mopso, Particle, VELOCITY_LIMIT};
pub use nsga2::Nsga2;
pub use problem::{CvrpProblem, FjspProblem, GaProblem};

/// Random stream used by every search component.
pub type SearchRng = ChaCha8Rng;

/// Parameters applied for one generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GenerationParams {
    Ga { crossover_rate: f64, mutation_rate: f64 },
    Pso { phi1: f64, phi2: f64, inertia: f64 },
}

impl GenerationParams {
    /// Rule-of-thumb static NSGA-II configuration.
    pub const VANILLA_GA: GenerationParams = GenerationParams::Ga { crossover_rate: 0.7, mutation_rate: 0.02 };
    /// Static MOPSO configuration.
    pub const VANILLA_PSO: GenerationParams = GenerationParams::Pso { phi1: 2.0, phi2: 2.0, inertia: 0.9 };

    pub fn vanilla(kind: AlgorithmKind) -> Self {
        match kind {
            AlgorithmKind::Nsga2 => Self::VANILLA_GA,
            AlgorithmKind::Mopso => Self::VANILLA_PSO,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        match *self {
            GenerationParams::Ga { crossover_rate, mutation_rate } => vec![crossover_rate, mutation_rate],
            GenerationParams::Pso { phi1, phi2, inertia } => vec![phi1, phi2, inertia],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    Nsga2,
    Mopso,
}

impl AlgorithmKind {
    /// Tunable parameter ranges, in action order.
    pub fn param_ranges(self) -> &'static [(f64, f64)] {
        match self {
            AlgorithmKind::Nsga2 => &[(0.6, 1.0), (0.0, 0.1)],
            AlgorithmKind::Mopso => &[(1.0, 3.0), (1.0, 3.0), (0.6, 0.9)],
        }
    }

    pub fn action_dim(self) -> usize {
        self.param_ranges().len()
    }

    /// Builds parameters from values already in their natural ranges.
    pub fn params_from(self, values: &[f64]) -> GenerationParams {
        assert_eq!(values.len(), self.action_dim(), "parameter count mismatch");
        match self {
            AlgorithmKind::Nsga2 => GenerationParams::Ga { crossover_rate: values[0], mutation_rate: values[1] },
            AlgorithmKind::Mopso => GenerationParams::Pso { phi1: values[0], phi2: values[1], inertia: values[2] },
        }
    }

    pub fn supports(self, problem: ProblemKind) -> bool {
        matches!((self, problem), (AlgorithmKind::Nsga2, _) | (AlgorithmKind::Mopso, ProblemKind::Cvrp))
    }
}

impl std::str::FromStr for AlgorithmKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nsga2" | "nsga-ii" => Ok(AlgorithmKind::Nsga2),
            "mopso" => Ok(AlgorithmKind::Mopso),
            other => Err(format!("unknown algorithm `{other}` (expected nsga2 or mopso)")),
        }
    }
}

/// A genome (or particle) with its evaluated objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual<G> {
    pub genome: G,
    pub objectives: ObjectiveVector,
}

/// Population plus the episode bookkeeping shared by both algorithms.
/// Equality ignores `hv_time`.
#[derive(Debug, Clone)]
pub struct SearchState<G> {
    pub population: Vec<Individual<G>>,
    /// Non-dominated set of every objective vector evaluated so far.
    pub archive: Archive<G>,
    pub generation: usize,
    /// Component-wise worst objective values of generation 0.
    pub nadir: ObjectiveVector,
    pub hv_initial: f64,
    /// Population hypervolume (w.r.t. `nadir`) of the latest generation.
    pub hv_current: f64,
    /// Maximum of `hv_current` over the episode.
    pub hv_best: f64,
    /// Time spent computing hypervolumes.
    pub hv_time: Duration,
}

impl<G: PartialEq> PartialEq for SearchState<G> {
    fn eq(&self, other: &Self) -> bool {
        self.population == other.population
            && self.archive == other.archive
            && self.generation == other.generation
            && self.nadir == other.nadir
            && self.hv_initial == other.hv_initial
            && self.hv_current == other.hv_current
            && self.hv_best == other.hv_best
    }
}

impl<G: Clone> SearchState<G> {
    /// Generation-0 state: fixes the nadir and the initial hypervolume.
    pub fn initial(population: Vec<Individual<G>>) -> Self {
        assert!(!population.is_empty(), "empty population");
        let dims = population[0].objectives.len();
        let mut nadir = vec![f64::NEG_INFINITY; dims];
        for ind in &population {
            for (n, v) in nadir.iter_mut().zip(ind.objectives.iter()) {
                *n = n.max(*v);
            }
        }
        let nadir = ObjectiveVector(nadir);
        let mut archive = Archive::default();
        for ind in &population {
            archive.insert(&ind.objectives, || ind.genome.clone());
        }
        let started = Instant::now();
        let hv = population_hv(&population, &nadir);
        let hv_time = started.elapsed();
        Self { population, archive, generation: 0, nadir, hv_initial: hv, hv_current: hv, hv_best: hv, hv_time }
    }

    /// Installs the next population; `evaluated` are the newly evaluated
    /// candidates of this generation (fed to the archive).
    pub fn advance(&mut self, population: Vec<Individual<G>>, evaluated: &[Individual<G>]) {
        for ind in evaluated {
            self.archive.insert(&ind.objectives, || ind.genome.clone());
        }
        self.population = population;
        self.generation += 1;
        let started = Instant::now();
        self.hv_current = population_hv(&self.population, &self.nadir);
        self.hv_time += started.elapsed();
        self.hv_best = self.hv_best.max(self.hv_current);
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.population.iter().map(|i| i.objectives.clone()).collect()
    }
}

fn population_hv<G>(population: &[Individual<G>], nadir: &ObjectiveVector) -> f64 {
    let pts: Vec<&[f64]> = population.iter().map(|i| i.objectives.as_ref()).collect();
    hypervolume(&pts, nadir).expect("population objectives share the nadir's dimension")
}

/// Snapshot of the scalar search statistics.
#[derive(Debug, Clone, Copy)]
pub struct SearchStats {
    pub generation: usize,
    pub hv_initial: f64,
    pub hv_current: f64,
    pub hv_best: f64,
    pub hv_time: Duration,
}

/// Object-safe view of a running algorithm, used by the episode environment.
pub trait TunableAlgorithm: Send + Sync {
    fn kind(&self) -> AlgorithmKind;
    fn stats(&self) -> SearchStats;
    fn nadir(&self) -> &ObjectiveVector;
    fn population_objectives(&self) -> Vec<ObjectiveVector>;
    fn archive_objectives(&self) -> Vec<ObjectiveVector>;
    /// Runs one generation.
    ///
    /// # Panics
    ///
    /// If `params` belong to the other algorithm family.
    fn step(&mut self, params: &GenerationParams, rng: &mut SearchRng);
}

/// What to run on an instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSetup {
    pub algorithm: AlgorithmKind,
    pub objective_set: ObjectiveSet,
    pub population_size: usize,
    /// Multiplier applied to every objective value (1.0 in normal use).
    #[serde(default = "unit_scale")]
    pub objective_scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

impl RunSetup {
    pub fn new(algorithm: AlgorithmKind, objective_set: ObjectiveSet, population_size: usize) -> Self {
        Self { algorithm, objective_set, population_size, objective_scale: 1.0 }
    }

    pub fn num_objectives(&self) -> usize {
        self.objective_set.len()
    }
}

/// Initializes the configured algorithm on `instance` (generation 0).
pub fn build_algorithm(
    instance: &Instance,
    setup: &RunSetup,
    rng: &mut SearchRng,
) -> Result<Box<dyn TunableAlgorithm>, ProblemError> {
    setup.objective_set.check_for(instance.kind())?;
    if setup.population_size == 0 {
        return Err(ProblemError::InvalidCount { what: "population size", value: 0 });
    }
    if !setup.algorithm.supports(instance.kind()) {
        return Err(ProblemError::InvalidInstance(format!(
            "{:?} cannot run on {:?} instances",
            setup.algorithm,
            instance.kind()
        )));
    }
    Ok(match (instance, setup.algorithm) {
        (Instance::Fjsp(inst), _) => {
            let problem = FjspProblem::new(Arc::clone(inst), setup.objective_set, setup.objective_scale);
            Box::new(Nsga2::new(problem, setup.population_size, rng))
        }
        (Instance::Cvrp(inst), AlgorithmKind::Nsga2) => {
            let problem = CvrpProblem::new(Arc::clone(inst), setup.objective_scale);
            Box::new(Nsga2::new(problem, setup.population_size, rng))
        }
        (Instance::Cvrp(inst), AlgorithmKind::Mopso) => {
            let problem = CvrpProblem::new(Arc::clone(inst), setup.objective_scale);
            Box::new(Mopso::new(problem, setup.population_size, rng))
        }
    })
}
