use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fowler_bench::{field, operator};
use fowler_core::nonlocal::{ConvolutionMethod, DiscretizationKind};
use std::hint::black_box;

fn apply(c: &mut Criterion) {
    let mut g = c.benchmark_group("nonlocal_apply");
    for n in [64, 256, 1024, 4096] {
        let u = field(n);
        for (name, method) in [
            ("naive", ConvolutionMethod::Naive),
            ("fft", ConvolutionMethod::Fft),
        ] {
            if method == ConvolutionMethod::Naive && n > 1024 {
                continue;
            }
            let op = operator(DiscretizationKind::I1, n, method);
            g.bench_with_input(BenchmarkId::new(name, n), &u, |b, u| {
                b.iter(|| op.apply(black_box(u)).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, apply);
criterion_main!(benches);
