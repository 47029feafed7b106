use bbtoolkit::scenarios::SCENARIOS;
use bbtoolkit::{
    run_estimate, AlgorithmSpec, PoissonTruncation, PopulationSpec, TableBuilder, TableLayout,
    TableSettings,
};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn first_round(c: &mut Criterion) {
    let pop = PopulationSpec::square(1_000_000).unwrap();
    let t = PoissonTruncation::default();
    let mut g = c.benchmark_group("first_round");
    for ranked in [false, true] {
        for m in [2u32, 20] {
            let spec = AlgorithmSpec::new(vec![m], vec![3], ranked).unwrap();
            let id = format!("{}_M{m}_L3", if ranked { "ranked" } else { "unranked" });
            g.bench_function(BenchmarkId::from_parameter(id), |b| {
                b.iter(|| run_estimate(black_box(&spec), &pop, &t).unwrap())
            });
        }
    }
    g.finish();
}

fn scenarios(c: &mut Criterion) {
    let pop = PopulationSpec::square(1_000_000).unwrap();
    let t = PoissonTruncation::default();
    let mut g = c.benchmark_group("scenario");
    for s in &SCENARIOS {
        let spec = s.spec();
        g.bench_function(s.name, |b| {
            b.iter(|| run_estimate(black_box(&spec), &pop, &t).unwrap())
        });
    }
    g.finish();
}

fn all_tables(c: &mut Criterion) {
    c.bench_function("tables_estimates_only", |b| {
        b.iter(|| {
            let mut builder = TableBuilder::new(TableSettings::new(1_000_000, 0, 1));
            for layout in TableLayout::all() {
                black_box(builder.build(layout).unwrap());
            }
        })
    });
}

criterion_group!(benches, first_round, scenarios, all_tables);
criterion_main!(benches);
