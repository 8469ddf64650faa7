use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gasket_eikonal::{
    build_prefractal, run_levels, solve_discrete, solve_network, value_iteration, BoundaryData, ConvergenceOptions, QuadratureConfig,
    ScalarField,
};
use rayon::{ThreadPool, ThreadPoolBuilder};

fn pools() -> Vec<(&'static str, ThreadPool)> {
    vec![
        ("parallel", ThreadPoolBuilder::new().build().unwrap()),
        ("sequential", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
    ]
}

fn bench_solvers(c: &mut Criterion) {
    let f = ScalarField::parse("1 + 0.5*sin(3*x)*cos(2*y)").unwrap();
    let gb = BoundaryData::zero(2);

    let mut group = c.benchmark_group("network_level7");
    let g = build_prefractal(2, 7).unwrap();
    let q = QuadratureConfig::for_level(7);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| solve_network(&g, &f, &gb, &q).unwrap()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("value_iteration_level5");
    group.sample_size(10);
    let g = build_prefractal(2, 5).unwrap();
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| value_iteration(&g, &f, &gb, 1e-12, 100_000).unwrap()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("dijkstra_level7");
    let g = build_prefractal(2, 7).unwrap();
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| solve_discrete(&g, &f, &gb).unwrap()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("converge_levels_1_7");
    group.sample_size(10);
    let opts = ConvergenceOptions {
        lipschitz: Some(2.5),
        ..Default::default()
    };
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| run_levels(2, &f, &gb, 1, 7, &opts).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_solvers);
criterion_main!(benches);
