use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{map_action, normalized_improvement, step_reward, RlError};
use crate::graphstate::{build_state_graph, NormalizationContext, StateGraph};
use crate::moea::{build_algorithm, GenerationParams, RunSetup, SearchRng, TunableAlgorithm};
use crate::neural::PolicyNet;
use crate::pareto::hypervolume;
use crate::problems::{Instance, InstanceFile, InstanceMeta, ObjectiveVector};

/// Generations per episode unless configured otherwise.
pub const DEFAULT_BUDGET: usize = 50;

/// What a trainer needs from an environment.
pub trait Environment: Send {
    fn action_dim(&self) -> usize;
    /// Starts a new episode; the seed fixes everything random in it.
    fn reset(&mut self, seed: u64) -> Result<StateGraph, RlError>;
    fn step(&mut self, action: &[f64]) -> Result<StepResult, RlError>;
    /// Normalized improvement reached by the current episode, if defined.
    fn final_delta(&self) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub graph: StateGraph,
    pub reward: f64,
    pub done: bool,
}

/// An instance paired with its bootstrapped metadata.
#[derive(Debug, Clone)]
pub struct EnvInstance {
    pub instance: Instance,
    pub meta: InstanceMeta,
}

impl EnvInstance {
    pub fn from_file(file: &InstanceFile) -> Result<Self, RlError> {
        let meta = file
            .meta
            .clone()
            .ok_or_else(|| RlError::MissingMeta(format!("instance with seed {}", file.seed)))?;
        Ok(Self { instance: file.instance.clone(), meta })
    }
}

/// Wall-clock seconds per episode component.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    /// Population initialization and generation-0 bookkeeping.
    pub setup: f64,
    pub state_graph: f64,
    pub inference: f64,
    /// Variation, selection and evaluation, excluding hypervolume.
    pub generation: f64,
    pub hypervolume: f64,
}

impl Timings {
    pub fn sum(&self) -> f64 {
        self.setup + self.state_graph + self.inference + self.generation + self.hypervolume
    }
}

struct Episode {
    source: usize,
    algorithm: Box<dyn TunableAlgorithm>,
    ctx: NormalizationContext,
    hv_ideal: f64,
    hv_best: f64,
    rng: SearchRng,
}

/// One episode is one run of the target algorithm on an instance drawn from
/// the pool; one step is one generation.
pub struct EpisodeEnv {
    pool: Vec<EnvInstance>,
    setup: RunSetup,
    budget: usize,
    episode: Option<Episode>,
    timings: Timings,
}

impl EpisodeEnv {
    pub fn new(pool: Vec<EnvInstance>, setup: RunSetup, budget: usize) -> Result<Self, RlError> {
        if pool.is_empty() {
            return Err(RlError::InvalidConfig { field: "instances", message: "empty instance pool".into() });
        }
        for e in &pool {
            setup.objective_set.check_for(e.instance.kind())?;
            if e.meta.num_objectives() != setup.num_objectives() {
                return Err(RlError::MissingMeta(format!(
                    "metadata has {} objectives but the run uses {}",
                    e.meta.num_objectives(),
                    setup.num_objectives()
                )));
            }
        }
        Ok(Self { pool, setup, budget, episode: None, timings: Timings::default() })
    }

    pub fn setup(&self) -> &RunSetup {
        &self.setup
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn pool(&self) -> &[EnvInstance] {
        &self.pool
    }

    pub fn timings(&self) -> Timings {
        self.timings
    }

    pub fn reset_timings(&mut self) {
        self.timings = Timings::default();
    }

    fn episode(&self) -> Result<&Episode, RlError> {
        self.episode.as_ref().ok_or(RlError::NotReset)
    }

    pub fn algorithm(&self) -> Result<&dyn TunableAlgorithm, RlError> {
        Ok(self.episode()?.algorithm.as_ref())
    }

    /// Pool index of the running episode's instance.
    pub fn current_instance(&self) -> Result<usize, RlError> {
        Ok(self.episode()?.source)
    }

    pub fn generation(&self) -> Result<usize, RlError> {
        Ok(self.episode()?.algorithm.stats().generation)
    }

    pub fn is_done(&self) -> bool {
        self.episode.as_ref().is_some_and(|e| e.algorithm.stats().generation >= self.budget)
    }

    pub fn hv_ideal(&self) -> Result<f64, RlError> {
        Ok(self.episode()?.hv_ideal)
    }

    pub fn hv_best(&self) -> Result<f64, RlError> {
        Ok(self.episode()?.hv_best)
    }

    pub fn hv_initial(&self) -> Result<f64, RlError> {
        Ok(self.episode()?.algorithm.stats().hv_initial)
    }

    pub fn context(&self) -> Result<&NormalizationContext, RlError> {
        Ok(&self.episode()?.ctx)
    }

    /// Normalized improvement of `hv` within the running episode.
    pub fn delta(&self, hv: f64) -> Result<f64, RlError> {
        let e = self.episode()?;
        Ok(normalized_improvement(hv, e.algorithm.stats().hv_initial, e.hv_ideal))
    }

    /// Starts an episode on the pool entry with index `source`.
    pub fn reset_on(&mut self, source: usize, seed: u64) -> Result<StateGraph, RlError> {
        let started = Instant::now();
        let entry = self.pool.get(source).ok_or_else(|| RlError::InvalidConfig {
            field: "instance index",
            message: format!("{source} out of range for {} instances", self.pool.len()),
        })?;
        let mut rng = SearchRng::seed_from_u64(seed);
        let algorithm = build_algorithm(&entry.instance, &self.setup, &mut rng)?;
        let population = algorithm.population_objectives();
        let ctx = NormalizationContext::from_initial(&population);
        let stats = algorithm.stats();
        let ideal: Vec<f64> =
            entry.meta.ideal_point.iter().zip(ctx.best_so_far.iter()).map(|(a, b)| a.min(*b)).collect();
        let hv_ideal = hypervolume(&[ideal], algorithm.nadir())?.max(stats.hv_initial);
        let graph_started = Instant::now();
        let graph = build_state_graph(&population, &ctx, 0, self.budget);
        self.timings.state_graph += graph_started.elapsed().as_secs_f64();
        self.timings.hypervolume += stats.hv_time.as_secs_f64();
        self.timings.setup += graph_started.duration_since(started).as_secs_f64() - stats.hv_time.as_secs_f64();
        self.episode = Some(Episode { source, algorithm, ctx, hv_ideal, hv_best: stats.hv_initial, rng });
        Ok(graph)
    }

    /// Runs one generation with explicit parameters.
    pub fn step_with_params(&mut self, params: &GenerationParams) -> Result<StepResult, RlError> {
        let budget = self.budget;
        let ep = self.episode.as_mut().ok_or(RlError::NotReset)?;
        let before = ep.algorithm.stats();
        if before.generation >= budget {
            return Err(RlError::EpisodeDone);
        }
        let started = Instant::now();
        ep.algorithm.step(params, &mut ep.rng);
        let elapsed = started.elapsed();
        let after = ep.algorithm.stats();
        let hv_spent = after.hv_time.saturating_sub(before.hv_time);
        self.timings.hypervolume += hv_spent.as_secs_f64();
        self.timings.generation += elapsed.saturating_sub(hv_spent).as_secs_f64();

        let reward = step_reward(after.hv_current, ep.hv_best, after.hv_initial, ep.hv_ideal);
        ep.hv_best = ep.hv_best.max(after.hv_current);

        let graph_started = Instant::now();
        let population = ep.algorithm.population_objectives();
        ep.ctx.update(&population);
        let graph = build_state_graph(&population, &ep.ctx, after.generation, budget);
        self.timings.state_graph += graph_started.elapsed().as_secs_f64();
        Ok(StepResult { graph, reward, done: after.generation >= budget })
    }
}

impl Environment for EpisodeEnv {
    fn action_dim(&self) -> usize {
        self.setup.algorithm.action_dim()
    }

    /// Draws the instance uniformly from the pool, then initializes the run.
    fn reset(&mut self, seed: u64) -> Result<StateGraph, RlError> {
        let mut pick = SearchRng::seed_from_u64(seed);
        let source = if self.pool.len() == 1 { 0 } else { pick.random_range(0..self.pool.len()) };
        self.reset_on(source, pick.random())
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult, RlError> {
        let kind = self.setup.algorithm;
        if action.len() != kind.action_dim() {
            return Err(RlError::ActionDim { expected: kind.action_dim(), found: action.len() });
        }
        self.step_with_params(&map_action(action, kind))
    }

    fn final_delta(&self) -> Option<f64> {
        let e = self.episode.as_ref()?;
        Some(normalized_improvement(e.hv_best, e.algorithm.stats().hv_initial, e.hv_ideal))
    }
}

/// Source of the per-generation parameters during an evaluation episode.
pub enum Controller<'a> {
    /// The same parameters every generation.
    Static(GenerationParams),
    /// Policy means, or samples when an RNG is supplied.
    Policy { net: &'a PolicyNet, sampler: Option<SearchRng> },
}

/// Record of a finished episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    /// Non-dominated set of every evaluated objective vector.
    pub archive: Vec<ObjectiveVector>,
    pub population: Vec<ObjectiveVector>,
    pub nadir: ObjectiveVector,
    pub hv_initial: f64,
    pub hv_ideal: f64,
    /// Best population hypervolume after each generation, generation 0 first.
    pub hv_best_trace: Vec<f64>,
    pub hv_current_trace: Vec<f64>,
    pub rewards: Vec<f64>,
    pub params: Vec<GenerationParams>,
}

impl EpisodeOutcome {
    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }

    pub fn final_delta(&self) -> f64 {
        normalized_improvement(*self.hv_best_trace.last().unwrap_or(&self.hv_initial), self.hv_initial, self.hv_ideal)
    }
}

/// Runs one full episode on pool entry `source`.
pub fn run_episode(
    env: &mut EpisodeEnv,
    source: usize,
    seed: u64,
    mut controller: Controller<'_>,
) -> Result<EpisodeOutcome, RlError> {
    let kind = env.setup.algorithm;
    let mut graph = env.reset_on(source, seed)?;
    let hv_initial = env.hv_initial()?;
    let mut outcome = EpisodeOutcome {
        archive: Vec::new(),
        population: Vec::new(),
        nadir: env.algorithm()?.nadir().clone(),
        hv_initial,
        hv_ideal: env.hv_ideal()?,
        hv_best_trace: vec![hv_initial],
        hv_current_trace: vec![hv_initial],
        rewards: Vec::new(),
        params: Vec::new(),
    };
    while !env.is_done() {
        let params = match &mut controller {
            Controller::Static(p) => *p,
            Controller::Policy { net, sampler } => {
                let started = Instant::now();
                let out = net.predict(&graph)?;
                let action: Vec<f64> = match sampler {
                    Some(rng) => out
                        .mean
                        .iter()
                        .zip(net.log_std())
                        .map(|(m, ls)| m + ls.exp() * rng.sample::<f64, _>(StandardNormal))
                        .collect(),
                    None => out.mean,
                };
                env.timings.inference += started.elapsed().as_secs_f64();
                map_action(&action, kind)
            }
        };
        let step = env.step_with_params(&params)?;
        graph = step.graph;
        outcome.rewards.push(step.reward);
        outcome.params.push(params);
        outcome.hv_best_trace.push(env.hv_best()?);
        outcome.hv_current_trace.push(env.algorithm()?.stats().hv_current);
    }
    let alg = env.algorithm()?;
    outcome.archive = alg.archive_objectives();
    outcome.population = alg.population_objectives();
    Ok(outcome)
}

/// Runs the vanilla-configured algorithm for twice `budget` generations to
/// find the ideal point; the reference point is the generation-0 worst of a
/// seed-0 run.
pub fn bootstrap_instance_meta(
    instance: &Instance,
    setup: &RunSetup,
    budget: usize,
    seed: u64,
) -> Result<InstanceMeta, RlError> {
    let mut canonical_rng = SearchRng::seed_from_u64(0);
    let reference_point = build_algorithm(instance, setup, &mut canonical_rng)?.nadir().clone();

    let mut rng = SearchRng::seed_from_u64(seed);
    let mut alg = build_algorithm(instance, setup, &mut rng)?;
    let params = GenerationParams::vanilla(setup.algorithm);
    for _ in 0..2 * budget {
        alg.step(&params, &mut rng);
    }
    let mut ideal = reference_point.0.clone();
    for p in alg.archive_objectives() {
        for (i, v) in ideal.iter_mut().zip(p.iter()) {
            *i = i.min(*v);
        }
    }
    let hv_ideal = hypervolume(&[&ideal], &reference_point)?;
    Ok(InstanceMeta {
        reference_point,
        ideal_point: ObjectiveVector(ideal),
        source_seed: seed,
        algorithm: Some(format!("{:?}", setup.algorithm).to_lowercase()),
        objective_set: Some(setup.objective_set),
        hv_ideal: Some(hv_ideal),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moea::AlgorithmKind;
    use crate::problems::{generate_fjsp, FjspGenConfig, ObjectiveSet};
    use std::sync::Arc;

    fn env() -> EpisodeEnv {
        let inst = Instance::Fjsp(Arc::new(generate_fjsp(3, 4, 3, &FjspGenConfig::default()).unwrap()));
        let setup = RunSetup::new(AlgorithmKind::Nsga2, ObjectiveSet::Bi, 12);
        let meta = bootstrap_instance_meta(&inst, &setup, 5, 1).unwrap();
        EpisodeEnv::new(vec![EnvInstance { instance: inst, meta }], setup, 5).unwrap()
    }

    #[test]
    fn reset_is_deterministic_and_starts_at_zero_budget() {
        let mut e = env();
        let a = e.reset(9).unwrap();
        let b = e.reset(9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.budget_feature, 0.0);
        assert!(e.hv_ideal().unwrap() >= e.hv_initial().unwrap());
    }

    #[test]
    fn episode_runs_to_budget_then_refuses() {
        let mut e = env();
        e.reset(1).unwrap();
        let mut steps = 0;
        loop {
            let r = e.step(&[0.0, 0.0]).unwrap();
            steps += 1;
            assert!(r.reward >= 0.0);
            if r.done {
                assert_eq!(r.graph.budget_feature, 1.0);
                break;
            }
        }
        assert_eq!(steps, 5);
        assert!(matches!(e.step(&[0.0, 0.0]), Err(RlError::EpisodeDone)));
    }

    #[test]
    fn missing_meta_is_reported() {
        let inst = Instance::Fjsp(Arc::new(generate_fjsp(3, 2, 2, &FjspGenConfig::default()).unwrap()));
        let file = InstanceFile::new(3, inst);
        assert!(matches!(EnvInstance::from_file(&file), Err(RlError::MissingMeta(_))));
    }
}
