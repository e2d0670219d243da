use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use rmwalk_core::analysis::{DriftSpec, IntegralAccumulator, SignChangeTracker};
use rmwalk_core::{PrimeSignAssignment, WalkStream};

const N: u64 = 1_000_000;

fn walks(c: &mut Criterion) {
    let mut g = c.benchmark_group("walk");
    g.throughput(Throughput::Elements(N));
    g.sample_size(20);
    g.bench_function("stream_1d", |b| {
        b.iter(|| WalkStream::new(PrimeSignAssignment::rademacher(black_box(42)), N).unwrap().final_value())
    });
    g.bench_function("stream_2d", |b| {
        b.iter(|| WalkStream::new(PrimeSignAssignment::quarternary(black_box(7)), N).unwrap().final_value())
    });
    g.bench_function("sign_changes", |b| {
        b.iter(|| {
            let mut t = SignChangeTracker::new(DriftSpec::Zero);
            for p in WalkStream::new(PrimeSignAssignment::rademacher(black_box(1)), N).unwrap() {
                t.push(p.n, p.value.re);
            }
            t.count()
        })
    });
    g.bench_function("abs_integral", |b| {
        b.iter(|| {
            let mut acc = IntegralAccumulator::new(DriftSpec::Zero, true);
            for p in WalkStream::new(PrimeSignAssignment::rademacher(black_box(3)), N).unwrap() {
                acc.push(p.n, p.value.re);
            }
            acc.value()
        })
    });
    g.finish();
}

criterion_group!(benches, walks);
criterion_main!(benches);
