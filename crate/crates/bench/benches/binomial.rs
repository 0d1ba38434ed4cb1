use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gnpx_core::binomial::{binom_tail, log_binom_pmf};
use gnpx_core::limits::lambda_exact;
use gnpx_core::BinomialParams;

fn tails(c: &mut Criterion) {
    let bp = BinomialParams::new(1_000_000, 0.5).unwrap();
    c.bench_function("binom_tail_1e6", |b| b.iter(|| binom_tail(bp, black_box(501_000.0))));
    c.bench_function("log_binom_pmf_1e6", |b| b.iter(|| log_binom_pmf(bp, black_box(501_000)).unwrap()));
    c.bench_function("lambda_exact_1e5_k2", |b| {
        b.iter(|| lambda_exact(black_box(100_000), 0.3, 2, 0.0).unwrap())
    });
}

criterion_group!(benches, tails);
criterion_main!(benches);
