use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fowler_core::nonlocal::{CoefficientTable, DiscretizationKind, TruncationPolicy};
use fowler_core::spectral::SpectralAnalyzer;
use fowler_core::DimensionlessGroups;
use std::hint::black_box;

fn far_field(c: &mut Criterion) {
    let mut g = c.benchmark_group("far_symbol");
    for terms in [1_000, 100_000] {
        let table =
            CoefficientTable::build(DiscretizationKind::I2, TruncationPolicy::Terms(terms), 1.0)
                .unwrap();
        g.bench_with_input(BenchmarkId::new("single_theta", terms), &table, |b, t| {
            b.iter(|| t.far_symbol(black_box(2.0)))
        });
        g.bench_with_input(BenchmarkId::new("lattice_4096", terms), &table, |b, t| {
            b.iter(|| t.far_symbol_lattice(black_box(4096)))
        });
    }
    g.finish();
}

fn verdict(c: &mut Criterion) {
    let an = SpectralAnalyzer::new();
    let t = TruncationPolicy::Terms(100_000);
    let groups = DimensionlessGroups::new(0.1, 0.2, 0.1);
    // first call builds and caches the table and lattice
    an.stability_verdict_groups(DiscretizationKind::I1, &groups, t, 1.0, 4096)
        .unwrap();
    c.bench_function("stability_verdict_cached", |b| {
        b.iter(|| {
            an.stability_verdict_groups(DiscretizationKind::I1, black_box(&groups), t, 1.0, 4096)
                .unwrap()
        })
    });
}

criterion_group!(benches, far_field, verdict);
criterion_main!(benches);
