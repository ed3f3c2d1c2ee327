//! NSGA-II with per-generation crossover and mutation rates.

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::Rng;

use super::problem::GaProblem;
use super::{AlgorithmKind, GenerationParams, Individual, SearchRng, SearchState, SearchStats, TunableAlgorithm};
use crate::pareto::{crowding_distance, non_dominated_sort};
use crate::problems::ObjectiveVector;

/// Attempts to replace a duplicate genome in the initial population.
const INIT_DEDUP_ATTEMPTS: usize = 20;

pub struct Nsga2<P: GaProblem> {
    problem: P,
    pop_size: usize,
    state: SearchState<P::Genome>,
    rank: Vec<usize>,
    crowding: Vec<f64>,
}

/// Front rank and crowding distance of every member of `objectives`.
fn rank_and_crowding(objectives: &[&ObjectiveVector]) -> (Vec<usize>, Vec<f64>) {
    let partition = non_dominated_sort(objectives).expect("population objectives are consistent");
    let mut crowding = vec![0.0; objectives.len()];
    for front in &partition.fronts {
        let pts: Vec<&ObjectiveVector> = front.iter().map(|&i| objectives[i]).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&pts)) {
            crowding[i] = d;
        }
    }
    (partition.rank, crowding)
}

/// Elitist truncation of `candidates` to `n` members: whole fronts first, the
/// last front by descending crowding distance. Returns selected indices.
fn truncate(candidates: &[&ObjectiveVector], n: usize) -> Vec<usize> {
    if candidates.is_empty() || n == 0 {
        return Vec::new();
    }
    let partition = non_dominated_sort(candidates).expect("population objectives are consistent");
    let mut chosen = Vec::with_capacity(n);
    for front in partition.fronts {
        if chosen.len() + front.len() <= n {
            chosen.extend(front);
            if chosen.len() == n {
                break;
            }
            continue;
        }
        let pts: Vec<&ObjectiveVector> = front.iter().map(|&i| candidates[i]).collect();
        let dist = crowding_distance(&pts);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| dist[b].partial_cmp(&dist[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        let missing = n - chosen.len();
        chosen.extend(order.into_iter().take(missing).map(|k| front[k]));
        break;
    }
    chosen
}

impl<P: GaProblem> Nsga2<P> {
    /// Initializes and evaluates a population of `pop_size` genomes.
    pub fn new(problem: P, pop_size: usize, rng: &mut SearchRng) -> Self {
        assert!(pop_size > 0, "population size must be positive");
        let mut genomes = problem.initial_population(pop_size, rng);
        let mut seen = HashSet::new();
        for g in genomes.iter_mut() {
            let mut attempts = 0;
            while seen.contains(g) && attempts < INIT_DEDUP_ATTEMPTS {
                problem.mutate(g, 1.0, rng);
                attempts += 1;
            }
            seen.insert(g.clone());
        }
        let population: Vec<_> = genomes
            .into_iter()
            .map(|genome| {
                let objectives = problem.evaluate(&genome);
                Individual { genome, objectives }
            })
            .collect();
        let refs: Vec<&ObjectiveVector> = population.iter().map(|i| &i.objectives).collect();
        let (rank, crowding) = rank_and_crowding(&refs);
        Self { problem, pop_size, state: SearchState::initial(population), rank, crowding }
    }

    pub fn problem(&self) -> &P {
        &self.problem
    }

    pub fn state(&self) -> &SearchState<P::Genome> {
        &self.state
    }

    pub fn ranks(&self) -> &[usize] {
        &self.rank
    }

    /// Binary tournament on (rank ascending, crowding descending).
    fn tournament(&self, rng: &mut SearchRng) -> usize {
        let n = self.state.population.len();
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let better_b = self.rank[b] < self.rank[a] || (self.rank[b] == self.rank[a] && self.crowding[b] > self.crowding[a]);
        if better_b {
            b
        } else {
            a
        }
    }

    /// One generation: tournament selection, crossover with probability
    /// `crossover_rate` per pair, mutation with probability `mutation_rate`
    /// per child, then (μ+λ) survival over distinct genomes.
    pub fn generation(&mut self, crossover_rate: f64, mutation_rate: f64, rng: &mut SearchRng) {
        let mut offspring = Vec::with_capacity(self.pop_size);
        while offspring.len() < self.pop_size {
            let pa = self.tournament(rng);
            let pb = self.tournament(rng);
            let (a, b) = (&self.state.population[pa].genome, &self.state.population[pb].genome);
            let (mut c1, mut c2) = if rng.random_bool(crossover_rate.clamp(0.0, 1.0)) {
                self.problem.crossover(a, b, rng)
            } else {
                (a.clone(), b.clone())
            };
            self.problem.mutate(&mut c1, mutation_rate, rng);
            self.problem.mutate(&mut c2, mutation_rate, rng);
            offspring.push(c1);
            if offspring.len() < self.pop_size {
                offspring.push(c2);
            }
        }
        let offspring: Vec<Individual<P::Genome>> = offspring
            .into_iter()
            .map(|genome| {
                let objectives = self.problem.evaluate(&genome);
                Individual { genome, objectives }
            })
            .collect();

        let mut combined: Vec<Individual<P::Genome>> = self.state.population.clone();
        combined.extend(offspring.iter().cloned());

        // Distinct genomes compete first; duplicates only fill leftover slots.
        let mut seen = HashSet::with_capacity(combined.len());
        let (mut unique, mut dupes) = (Vec::new(), Vec::new());
        for (i, ind) in combined.iter().enumerate() {
            if seen.insert(&ind.genome) {
                unique.push(i);
            } else {
                dupes.push(i);
            }
        }
        let unique_objs: Vec<&ObjectiveVector> = unique.iter().map(|&i| &combined[i].objectives).collect();
        let mut selected: Vec<usize> = truncate(&unique_objs, self.pop_size).into_iter().map(|k| unique[k]).collect();
        selected.extend(dupes.iter().take(self.pop_size - selected.len()));

        let mut slots: Vec<Option<Individual<P::Genome>>> = combined.into_iter().map(Some).collect();
        let next: Vec<_> = selected.iter().map(|&i| slots[i].take().expect("selected once")).collect();
        let refs: Vec<&ObjectiveVector> = next.iter().map(|i| &i.objectives).collect();
        let (rank, crowding) = rank_and_crowding(&refs);
        self.rank = rank;
        self.crowding = crowding;
        self.state.advance(next, &offspring);
    }
}

impl<P: GaProblem> TunableAlgorithm for Nsga2<P> {
    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::Nsga2
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
        let GenerationParams::Ga { crossover_rate, mutation_rate } = *params else {
            panic!("NSGA-II expects crossover/mutation parameters, got {params:?}");
        };
        self.generation(crossover_rate, mutation_rate, rng);
    }
}
