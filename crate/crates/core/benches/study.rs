use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mle_expansion::moments::compute_moment_set_with;
use mle_expansion::montecarlo::{run_study, SimulationConfig};
use mle_expansion::{DensityModel, Execution, FamilySpec};

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Auto)]
}

fn study(c: &mut Criterion) {
    let mut group = c.benchmark_group("study");
    group.sample_size(10);
    let cfg = SimulationConfig::new(FamilySpec::new("logistic"), vec![50, 200], 4096, 1);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::new("logistic", name), &exec, |b, &exec| {
            b.iter(|| black_box(run_study(&cfg, exec).unwrap()))
        });
    }
    group.finish();
}

fn moments(c: &mut Criterion) {
    let mut group = c.benchmark_group("moments");
    let model = DensityModel::student_t(7.0).unwrap();
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::new("student-t", name), &exec, |b, &exec| {
            b.iter(|| black_box(compute_moment_set_with(&model, 1e-10, exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, study, moments);
criterion_main!(benches);
