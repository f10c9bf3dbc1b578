use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hybrid_observer::certification::{assemble_error_system, compute_certificate, DEFAULT_GRID_POINTS};
use hybrid_observer::decomposition::{build_decomposition, find_hop_depths};
use hybrid_observer::scenario::{Problem, ScenarioFile};
use hybrid_observer::simulator::simulate;
use hybrid_observer::synthesis::synthesize;
use hybrid_observer::Tolerance;

fn ring4() -> Problem {
    ScenarioFile::ring4().to_problem().unwrap()
}

fn pipeline(c: &mut Criterion) {
    let tol = Tolerance::default();
    let mut problem = ring4();
    let depths = find_hop_depths(&problem.plant, &problem.graph, problem.targets.alpha, None, &tol)
        .unwrap()
        .into_depths()
        .unwrap();
    let decomp = build_decomposition(&problem.plant, &problem.graph, &depths, &tol).unwrap();
    let gains = synthesize(&decomp, &problem.plant, &problem.graph, &problem.targets, &tol).unwrap();
    let es = assemble_error_system(
        &decomp,
        &problem.plant,
        &gains,
        &problem.graph,
        problem.targets.t_period,
    )
    .unwrap();

    c.bench_function("ring4/decomposition", |b| {
        b.iter(|| {
            let depths = find_hop_depths(&problem.plant, &problem.graph, problem.targets.alpha, None, &tol)
                .unwrap()
                .into_depths()
                .unwrap();
            black_box(build_decomposition(&problem.plant, &problem.graph, &depths, &tol).unwrap())
        })
    });
    c.bench_function("ring4/synthesis", |b| {
        b.iter(|| {
            black_box(synthesize(&decomp, &problem.plant, &problem.graph, &problem.targets, &tol).unwrap())
        })
    });
    c.bench_function("ring4/certificate", |b| {
        b.iter(|| black_box(compute_certificate(&es, problem.targets.alpha, DEFAULT_GRID_POINTS).unwrap()))
    });

    problem.sim.t_final = 1.0;
    let sc = problem.scenario(decomp.clone(), gains.clone());
    let mut group = c.benchmark_group("ring4");
    group.sample_size(20);
    group.bench_function("simulate_1s", |b| b.iter(|| black_box(simulate(&sc).unwrap())));
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
