use bbtoolkit::{
    run_baseline, simulate_run, AlgorithmSpec, Baseline, BaselineConfig, PopulationSpec,
};
use criterion::{black_box, criterion_group, criterion_main, Criterion, Throughput};

const N: u64 = 100_000;

fn primary(c: &mut Criterion) {
    let pop = PopulationSpec::square(N).unwrap();
    let mut g = c.benchmark_group("simulate_run");
    g.throughput(Throughput::Elements(N));
    g.sample_size(20);
    for (name, m, l, ranked) in [
        ("unranked_M2_L2", vec![2], vec![2], false),
        ("ranked_M20_L3", vec![20], vec![3], true),
        ("ranked_122_233", vec![1, 2, 2], vec![2, 3, 3], true),
    ] {
        let spec = AlgorithmSpec::new(m, l, ranked).unwrap();
        let mut seed = 0;
        g.bench_function(name, |b| {
            b.iter(|| {
                seed += 1;
                simulate_run(black_box(&spec), &pop, seed)
            })
        });
    }
    g.finish();
}

fn baselines(c: &mut Criterion) {
    let mut g = c.benchmark_group("baseline");
    g.throughput(Throughput::Elements(N));
    g.sample_size(20);
    for b in Baseline::ALL {
        let mut cfg = BaselineConfig::preset(b, N, 3, 0);
        g.bench_function(b.name(), |bench| {
            bench.iter(|| {
                cfg.seed += 1;
                run_baseline(black_box(&cfg)).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, primary, baselines);
criterion_main!(benches);
