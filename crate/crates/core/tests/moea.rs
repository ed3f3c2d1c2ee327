use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};

use modac_core::moea::cvrp::{crossover_cvrp, mutate_cvrp};
use modac_core::moea::fjsp::{crossover_fjsp, init_population_fjsp, mutate_fjsp};
use modac_core::moea::{
    build_algorithm, decode_cvrp_keys, CvrpGenome, CvrpProblem, FjspProblem, Mopso, Nsga2, RunSetup, SearchRng,
    VELOCITY_LIMIT,
};
use modac_core::pareto::dominates;
use modac_core::problems::{
    evaluate_cvrp, evaluate_fjsp, generate_cvrp, generate_fjsp, CvrpGenConfig, FjspGenConfig, Instance, ObjectiveSet,
};
use modac_core::{AlgorithmKind, GenerationParams};

#[test]
fn fjsp_crossover_and_mutation_keep_genomes_valid() {
    let mut rng = SearchRng::seed_from_u64(1);
    let mut pairs = 0;
    for seed in 0..20 {
        let jobs = 2 + seed as usize % 6;
        let inst = generate_fjsp(seed, jobs, 1 + seed as usize % 5, &FjspGenConfig::default()).unwrap();
        let pop = init_population_fjsp(&inst, 20, &mut rng);
        for _ in 0..500 {
            let a = &pop[rng.random_range(0..pop.len())];
            let b = &pop[rng.random_range(0..pop.len())];
            let (mut c, mut d) = crossover_fjsp(&inst, a, b, &mut rng);
            mutate_fjsp(&inst, &mut c, 1.0, &mut rng);
            mutate_fjsp(&inst, &mut d, 0.5, &mut rng);
            for child in [&c, &d] {
                assert!(child.is_valid(&inst));
                assert!(evaluate_fjsp(&inst, &child.decode(&inst), ObjectiveSet::Penta).is_ok());
            }
            pairs += 1;
        }
    }
    assert_eq!(pairs, 10_000);
}

#[test]
fn cvrp_crossover_and_mutation_keep_permutations() {
    let mut rng = SearchRng::seed_from_u64(2);
    for trial in 0..10_000 {
        let n = 1 + trial % 40;
        let a = CvrpGenome::random(n, &mut rng);
        let b = CvrpGenome::random(n, &mut rng);
        let (mut c, mut d) = crossover_cvrp(&a, &b, &mut rng);
        mutate_cvrp(&mut c, 1.0, &mut rng);
        mutate_cvrp(&mut d, 0.3, &mut rng);
        assert!(c.is_valid(n) && d.is_valid(n), "trial {trial}");
    }
}

#[test]
fn full_rate_fjsp_mutation_changes_assignment_and_order() {
    let inst = generate_fjsp(4, 4, 3, &FjspGenConfig::default()).unwrap();
    let mut rng = SearchRng::seed_from_u64(3);
    for g in init_population_fjsp(&inst, 30, &mut rng) {
        let mut m = g.clone();
        mutate_fjsp(&inst, &mut m, 1.0, &mut rng);
        let changed_ops = (0..inst.num_operations()).filter(|&o| m.machine_selection[o] != g.machine_selection[o]).count();
        let flexible = (0..inst.num_operations()).any(|o| inst.eligible(o).len() > 1);
        assert_eq!(changed_ops, usize::from(flexible));
        let moved = m.operation_sequence.iter().zip(&g.operation_sequence).filter(|(x, y)| x != y).count();
        assert_eq!(moved, 2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_keys_decode_to_capacity_respecting_partitions(
        keys in prop::collection::vec(0.0f64..1.0, 1..60),
        seed in any::<u64>(),
    ) {
        let inst = generate_cvrp(seed, keys.len(), &CvrpGenConfig::default()).unwrap();
        let routes = decode_cvrp_keys(&keys, &inst);
        prop_assert!(evaluate_cvrp(&inst, &routes).is_ok());
        // Customers appear in ascending key order across the routes.
        let order = routes.concat();
        prop_assert!(order.windows(2).all(|w| keys[w[0]] < keys[w[1]] || (keys[w[0]] == keys[w[1]] && w[0] < w[1])));
    }

    #[test]
    fn mutation_keeps_every_machine_eligible(seed in any::<u64>(), rate in 0.0f64..=1.0) {
        let inst = generate_fjsp(seed, 6, 4, &FjspGenConfig::default()).unwrap();
        let mut rng = SearchRng::seed_from_u64(seed);
        for mut g in init_population_fjsp(&inst, 10, &mut rng) {
            for _ in 0..20 {
                mutate_fjsp(&inst, &mut g, rate, &mut rng);
            }
            let schedule = g.decode(&inst);
            for op in &schedule.ops {
                prop_assert!(inst.proc_time(op.job, op.op, op.machine).is_some());
            }
        }
    }
}

fn fjsp_nsga2(seed: u64, set: ObjectiveSet) -> (Nsga2<FjspProblem>, SearchRng) {
    let inst = Arc::new(generate_fjsp(seed, 5, 5, &FjspGenConfig::default()).unwrap());
    let mut rng = SearchRng::seed_from_u64(seed);
    let alg = Nsga2::new(FjspProblem::new(inst, set, 1.0), 20, &mut rng);
    (alg, rng)
}

#[test]
fn nsga2_generation_replays_identically() {
    let (mut a, mut ra) = fjsp_nsga2(8, ObjectiveSet::Tri);
    let (mut b, mut rb) = fjsp_nsga2(8, ObjectiveSet::Tri);
    assert_eq!(a.state(), b.state());
    for _ in 0..5 {
        a.generation(0.7, 0.2, &mut ra);
        b.generation(0.7, 0.2, &mut rb);
        assert_eq!(a.state(), b.state());
    }
}

#[test]
fn zero_rates_keep_the_population() {
    for seed in 0..5 {
        let (mut alg, mut rng) = fjsp_nsga2(seed, ObjectiveSet::Bi);
        let sorted = |alg: &Nsga2<FjspProblem>| {
            let mut g: Vec<_> = alg.state().population.iter().map(|i| i.genome.clone()).collect();
            g.sort_by(|x, y| {
                (&x.machine_selection, &x.operation_sequence).cmp(&(&y.machine_selection, &y.operation_sequence))
            });
            g
        };
        let before = sorted(&alg);
        let hv = alg.state().hv_initial;
        for _ in 0..5 {
            alg.generation(0.0, 0.0, &mut rng);
            assert_eq!(sorted(&alg), before);
            assert_eq!(alg.state().hv_current, hv);
        }
    }
}

#[test]
fn nsga2_population_hypervolume_never_drops() {
    // Elitist survival keeps the first front, so the population dominates
    // at least what it dominated before.
    let (mut alg, mut rng) = fjsp_nsga2(12, ObjectiveSet::Bi);
    let mut last = alg.state().hv_current;
    for _ in 0..20 {
        alg.generation(0.9, 0.3, &mut rng);
        assert!(alg.state().hv_current >= last);
        last = alg.state().hv_current;
    }
    assert!(alg.state().hv_best >= alg.state().hv_initial);
}

#[test]
fn cvrp_nsga2_runs_through_the_common_interface() {
    let inst = Instance::from(generate_cvrp(3, 20, &CvrpGenConfig::default()).unwrap());
    let setup = RunSetup::new(AlgorithmKind::Nsga2, ObjectiveSet::Bi, 16);
    let mut rng = SearchRng::seed_from_u64(1);
    let mut alg = build_algorithm(&inst, &setup, &mut rng).unwrap();
    for _ in 0..10 {
        alg.step(&GenerationParams::VANILLA_GA, &mut rng);
    }
    assert_eq!(alg.stats().generation, 10);
    let archive = alg.archive_objectives();
    for a in &archive {
        assert!(!archive.iter().any(|b| dominates(b, a)));
    }
}

fn swarm(seed: u64) -> (Mopso, SearchRng) {
    let inst = Arc::new(generate_cvrp(seed, 20, &CvrpGenConfig::default()).unwrap());
    let mut rng = SearchRng::seed_from_u64(seed);
    (Mopso::new(CvrpProblem::new(inst, 1.0), 15, &mut rng), rng)
}

#[test]
fn mopso_replays_and_respects_bounds() {
    let (mut a, mut ra) = swarm(4);
    let (mut b, mut rb) = swarm(4);
    for _ in 0..10 {
        a.generation(2.0, 2.0, 0.9, &mut ra);
        b.generation(2.0, 2.0, 0.9, &mut rb);
        assert_eq!(a.state(), b.state());
        for p in a.particles() {
            assert!(p.position.iter().all(|x| (0.0..=1.0).contains(x)));
            assert!(p.velocity.iter().all(|v| v.abs() <= VELOCITY_LIMIT));
            // A personal best is never dominated by the current position.
            let current = a.state().population.iter().find(|i| i.genome == p.position).unwrap();
            assert!(!dominates(&current.objectives, &p.personal_best.1));
        }
    }
    let archive = a.state().archive.objectives();
    assert!(archive.iter().all(|x| !archive.iter().any(|y| dominates(y, x))));
}

#[test]
fn algorithm_and_problem_mismatch_is_rejected() {
    let inst = Instance::from(generate_fjsp(1, 3, 3, &FjspGenConfig::default()).unwrap());
    let setup = RunSetup::new(AlgorithmKind::Mopso, ObjectiveSet::Bi, 10);
    assert!(build_algorithm(&inst, &setup, &mut SearchRng::seed_from_u64(0)).is_err());
}
