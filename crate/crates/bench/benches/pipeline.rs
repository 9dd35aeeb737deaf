use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sigtamper_bench::instance;
use sigtamper_core::{expand, optimal_control, pareto_frontier, NetworkSpec, ScenarioConfig};

fn bench_expand(c: &mut Criterion) {
    let mut group = c.benchmark_group("expand");
    for net in ["A", "C"] {
        let inst = ScenarioConfig::uniform(net.parse::<NetworkSpec>().unwrap(), 150, 400)
            .instantiate(None)
            .unwrap();
        group.bench_function(BenchmarkId::from_parameter(net), |b| {
            b.iter(|| expand(&inst.network, inst.horizon, &inst.demand, inst.policy).unwrap())
        });
    }
    group.finish();
}

fn bench_optimal_control(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimal_control");
    group.sample_size(10);
    for net in ["A", "C"] {
        let g = instance(net, 400, 150);
        group.bench_function(BenchmarkId::from_parameter(net), |b| {
            b.iter(|| optimal_control(&g).unwrap())
        });
    }
    group.finish();
}

fn bench_pareto_frontier(c: &mut Criterion) {
    let mut group = c.benchmark_group("pareto_frontier");
    group.sample_size(10);
    for (net, steps) in [("crossing", 40), ("A", 150)] {
        let g = instance(net, 800, steps);
        let opt = optimal_control(&g).unwrap();
        group.bench_function(BenchmarkId::new(net, steps), |b| {
            b.iter(|| pareto_frontier(&g, &opt).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_expand,
    bench_optimal_control,
    bench_pareto_frontier
);
criterion_main!(benches);
