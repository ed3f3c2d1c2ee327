//! Scheduling genome and its operators.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::problems::{decode_semi_active, FjspInstance, Schedule};

/// Two-part scheduling chromosome.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FjspGenome {
    /// Per flat operation: index into that operation's eligible machine list.
    pub machine_selection: Vec<usize>,
    /// Permutation of the job multiset; the `k`-th occurrence of job `j`
    /// denotes operation `(j, k)`.
    pub operation_sequence: Vec<usize>,
}

impl FjspGenome {
    pub fn decode(&self, inst: &FjspInstance) -> Schedule {
        decode_semi_active(inst, &self.machine_selection, &self.operation_sequence)
    }

    pub fn is_valid(&self, inst: &FjspInstance) -> bool {
        if self.machine_selection.len() != inst.num_operations()
            || self.operation_sequence.len() != inst.num_operations()
        {
            return false;
        }
        let eligible_ok =
            self.machine_selection.iter().enumerate().all(|(op, &choice)| choice < inst.eligible(op).len());
        let mut counts = vec![0usize; inst.num_jobs()];
        for &j in &self.operation_sequence {
            if j >= inst.num_jobs() {
                return false;
            }
            counts[j] += 1;
        }
        eligible_ok && counts == inst.ops_per_job()
    }
}

/// Population shares of the Global and Local assignment methods; the rest is
/// Random.
pub const GLOBAL_SHARE: f64 = 0.6;
pub const LOCAL_SHARE: f64 = 0.3;

/// Counts of (Global, Local, Random) individuals for a population size.
pub fn init_mix(size: usize) -> (usize, usize, usize) {
    let global = (size as f64 * GLOBAL_SHARE).floor() as usize;
    let local = (size as f64 * LOCAL_SHARE).floor() as usize;
    (global, local, size - global - local)
}

/// Index of the eligible machine minimizing `load + time`; first on ties.
fn least_loaded(inst: &FjspInstance, flat_op: usize, load: &[u64]) -> usize {
    let mut best = 0;
    let mut best_cost = u64::MAX;
    for (idx, &(m, t)) in inst.eligible(flat_op).iter().enumerate() {
        let cost = load[m] + u64::from(t);
        if cost < best_cost {
            best = idx;
            best_cost = cost;
        }
    }
    best
}

/// Global method: jobs visited in random order, operations in sequence, each
/// assigned to the machine with the smallest accumulated load including it.
pub fn global_assignment<R: Rng + ?Sized>(inst: &FjspInstance, rng: &mut R) -> Vec<usize> {
    let mut jobs: Vec<usize> = (0..inst.num_jobs()).collect();
    jobs.shuffle(rng);
    let mut load = vec![0u64; inst.num_machines()];
    let mut selection = vec![0; inst.num_operations()];
    for j in jobs {
        for k in 0..inst.ops_per_job()[j] {
            let flat = inst.op_offset(j) + k;
            let idx = least_loaded(inst, flat, &load);
            let (m, t) = inst.eligible(flat)[idx];
            load[m] += u64::from(t);
            selection[flat] = idx;
        }
    }
    selection
}

/// Local method: like the global method but the load table is reset for
/// every job, minimizing each job's own machine loads.
pub fn local_assignment(inst: &FjspInstance) -> Vec<usize> {
    let mut selection = vec![0; inst.num_operations()];
    for j in 0..inst.num_jobs() {
        let mut load = vec![0u64; inst.num_machines()];
        for k in 0..inst.ops_per_job()[j] {
            let flat = inst.op_offset(j) + k;
            let idx = least_loaded(inst, flat, &load);
            let (m, t) = inst.eligible(flat)[idx];
            load[m] += u64::from(t);
            selection[flat] = idx;
        }
    }
    selection
}

pub fn random_assignment<R: Rng + ?Sized>(inst: &FjspInstance, rng: &mut R) -> Vec<usize> {
    (0..inst.num_operations()).map(|op| rng.random_range(0..inst.eligible(op).len())).collect()
}

fn random_sequence<R: Rng + ?Sized>(inst: &FjspInstance, rng: &mut R) -> Vec<usize> {
    let mut seq = inst.job_multiset();
    seq.shuffle(rng);
    seq
}

/// Initial population: Global, then Local, then Random individuals, each with
/// a uniformly random operation sequence.
pub fn init_population_fjsp<R: Rng + ?Sized>(inst: &FjspInstance, size: usize, rng: &mut R) -> Vec<FjspGenome> {
    let (global, local, _) = init_mix(size);
    (0..size)
        .map(|i| {
            let machine_selection = if i < global {
                global_assignment(inst, rng)
            } else if i < global + local {
                local_assignment(inst)
            } else {
                random_assignment(inst, rng)
            };
            FjspGenome { machine_selection, operation_sequence: random_sequence(inst, rng) }
        })
        .collect()
}

/// Precedence-preserving order-based crossover: jobs with `keep[job]` stay at
/// their positions from `primary`; the remaining positions are filled with the
/// other jobs in `secondary`'s relative order.
pub fn pox(primary: &[usize], secondary: &[usize], keep: &[bool]) -> Vec<usize> {
    let mut fill = secondary.iter().copied().filter(|&j| !keep[j]);
    primary
        .iter()
        .map(|&j| if keep[j] { j } else { fill.next().expect("parents share the job multiset") })
        .collect()
}

fn two_point<T: Copy, R: Rng + ?Sized>(a: &mut [T], b: &mut [T], rng: &mut R) {
    let n = a.len();
    let mut i = rng.random_range(0..=n);
    let mut j = rng.random_range(0..=n);
    if i > j {
        std::mem::swap(&mut i, &mut j);
    }
    a[i..j].swap_with_slice(&mut b[i..j]);
}

fn uniform<T: Copy, R: Rng + ?Sized>(a: &mut [T], b: &mut [T], rng: &mut R) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        if rng.random_bool(0.5) {
            std::mem::swap(x, y);
        }
    }
}

/// Machine selection: two-point or uniform crossover (fair coin).
/// Operation sequence: POX over a random job subset.
pub fn crossover_fjsp<R: Rng + ?Sized>(
    inst: &FjspInstance,
    a: &FjspGenome,
    b: &FjspGenome,
    rng: &mut R,
) -> (FjspGenome, FjspGenome) {
    let mut ms_a = a.machine_selection.clone();
    let mut ms_b = b.machine_selection.clone();
    if rng.random_bool(0.5) {
        two_point(&mut ms_a, &mut ms_b, rng);
    } else {
        uniform(&mut ms_a, &mut ms_b, rng);
    }
    let keep: Vec<bool> = (0..inst.num_jobs()).map(|_| rng.random_bool(0.5)).collect();
    let seq_a = pox(&a.operation_sequence, &b.operation_sequence, &keep);
    let seq_b = pox(&b.operation_sequence, &a.operation_sequence, &keep);
    (
        FjspGenome { machine_selection: ms_a, operation_sequence: seq_a },
        FjspGenome { machine_selection: ms_b, operation_sequence: seq_b },
    )
}

/// With probability `rate`, moves one random flexible operation to a different
/// eligible machine and swaps two sequence positions holding different jobs.
pub fn mutate_fjsp<R: Rng + ?Sized>(inst: &FjspInstance, genome: &mut FjspGenome, rate: f64, rng: &mut R) {
    if rate <= 0.0 || !rng.random_bool(rate.min(1.0)) {
        return;
    }
    let flexible: Vec<usize> = (0..inst.num_operations()).filter(|&op| inst.eligible(op).len() > 1).collect();
    if !flexible.is_empty() {
        let op = flexible[rng.random_range(0..flexible.len())];
        let n = inst.eligible(op).len();
        let shift = rng.random_range(1..n);
        genome.machine_selection[op] = (genome.machine_selection[op] + shift) % n;
    }
    if inst.num_jobs() >= 2 {
        let seq = &mut genome.operation_sequence;
        let i = rng.random_range(0..seq.len());
        let others: Vec<usize> = (0..seq.len()).filter(|&p| seq[p] != seq[i]).collect();
        let j = others[rng.random_range(0..others.len())];
        seq.swap(i, j);
    }
}
