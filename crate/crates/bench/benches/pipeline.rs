//! Benchmarks for the pipeline's hot paths: assignment distance, pool
//! diversity, sequencing policies, full-pool assembly, and a short GA run.
//!
//! Sizes are kept small enough that `cargo bench` finishes in a couple of
//! minutes while still exercising the real algorithms.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use coaplan_core::{
    assemble_pool, diversity, pairwise_distance, repair, run_ga, sample_scenario, sequence_exact,
    sequence_greedy, sequence_random, CoaPool, CondensedCoa, GaConfig, NominalTravel, PolicyKind,
    SampleConfig, Scenario, SequencerSim,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_coa(rng: &mut ChaCha8Rng, n_tasks: usize, n_agents: usize) -> CondensedCoa {
    let genome: Vec<usize> = (0..n_tasks)
        .map(|_| rng.random_range(0..n_agents))
        .collect();
    CondensedCoa::new(genome, n_agents).unwrap()
}

fn random_pool(scenario: &Scenario, n_coa: usize, seed: u64) -> CoaPool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coas = (0..n_coa)
        .map(|_| {
            let raw = random_coa(&mut rng, scenario.n_tasks(), scenario.n_agents());
            repair(&raw, scenario.compat(), scenario.t_max()).unwrap()
        })
        .collect();
    CoaPool::new(coas, scenario.fingerprint()).unwrap()
}

fn bench_distance_and_diversity(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_coa(&mut rng, 100, 5);
    let b = random_coa(&mut rng, 100, 5);
    c.bench_function("pairwise_distance/100 tasks", |bench| {
        bench.iter(|| pairwise_distance(black_box(&a), black_box(&b)).unwrap())
    });

    let scenario = sample_scenario(&SampleConfig::new(100, 5, 2)).unwrap();
    let pool = random_pool(&scenario, 20, 3);
    c.bench_function("diversity/20 COAs x 100 tasks", |bench| {
        bench.iter(|| diversity(black_box(&pool)).unwrap())
    });
}

fn bench_sequencing(c: &mut Criterion) {
    let scenario = sample_scenario(&SampleConfig {
        deadline_range: (400.0, 5000.0),
        c_min: 0.1,
        ..SampleConfig::new(12, 1, 4)
    })
    .unwrap();
    let assigned: Vec<usize> = (0..scenario.n_tasks()).collect();
    let sim = || SequencerSim::new(&scenario, 0, assigned.clone(), &NominalTravel).unwrap();

    c.bench_function("sequence_greedy/12 tasks", |bench| {
        bench.iter_batched(sim, |s| sequence_greedy(s).unwrap(), BatchSize::SmallInput)
    });
    c.bench_function("sequence_exact/12 tasks", |bench| {
        bench.iter_batched(
            sim,
            |s| sequence_exact(s, 16).unwrap(),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("sequence_random/12 tasks", |bench| {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        bench.iter_batched(
            sim,
            |s| sequence_random(s, &mut rng).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_assembly(c: &mut Criterion) {
    let scenario = sample_scenario(&SampleConfig::new(40, 4, 6)).unwrap();
    let pool = random_pool(&scenario, 10, 7);
    c.bench_function("assemble_pool/greedy 10 COAs x 40 tasks", |bench| {
        bench.iter(|| {
            assemble_pool(
                black_box(&pool),
                black_box(&scenario),
                PolicyKind::Greedy,
                &NominalTravel,
                8,
                16,
            )
            .unwrap()
        })
    });
}

fn bench_ga(c: &mut Criterion) {
    let scenario = sample_scenario(&SampleConfig::new(20, 2, 9)).unwrap();
    let config = GaConfig {
        iterations: 50,
        seed: 10,
        ..GaConfig::default()
    };
    c.bench_function("run_ga/5 COAs x 20 tasks x 50 iterations", |bench| {
        bench.iter(|| run_ga(black_box(&scenario), 5, black_box(&config)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_distance_and_diversity,
    bench_sequencing,
    bench_assembly,
    bench_ga
);
criterion_main!(benches);
