use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dppkit_bench::fixtures;
use dppkit_core::dimension::s_n_q;
use dppkit_core::lcs::lcs_length;
use dppkit_core::mixing::psi_finite_window;
use dppkit_core::sampler::sample_prefix;
use dppkit_core::{Cylinder, Measure};

fn cylinder(c: &mut Criterion) {
    let mut g = c.benchmark_group("cylinder_prob");
    for (name, sym) in fixtures() {
        let m = Measure::new(&sym).unwrap();
        let word = Cylinder::new((0..64).map(|i| i % 3 == 0).collect()).unwrap();
        g.bench_function(BenchmarkId::new("fast", name), |b| b.iter(|| m.cylinder_log_prob(black_box(&word))));
        g.bench_function(BenchmarkId::new("dense", name), |b| {
            b.iter(|| m.cylinder_log_prob_dense(black_box(&word)))
        });
    }
    g.finish();
}

fn moments(c: &mut Criterion) {
    let mut g = c.benchmark_group("s_n_q");
    g.sample_size(10);
    for (name, sym) in fixtures() {
        g.bench_function(BenchmarkId::new("N16_q2", name), |b| b.iter(|| s_n_q(&sym, black_box(16), 2.0)));
    }
    g.finish();
}

fn mixing(c: &mut Criterion) {
    let (_, sym) = &fixtures()[1];
    let mut g = c.benchmark_group("psi_finite_window");
    g.sample_size(10);
    g.bench_function("poisson_N5_ell2", |b| b.iter(|| psi_finite_window(sym, 2, black_box(5))));
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_prefix");
    g.sample_size(10);
    for (name, sym) in fixtures() {
        g.bench_function(BenchmarkId::new("n16384", name), |b| b.iter(|| sample_prefix(&sym, black_box(1 << 14), 1)));
    }
    g.finish();
}

fn lcs(c: &mut Criterion) {
    let (_, sym) = &fixtures()[2];
    let x = sample_prefix(sym, 1 << 16, 1).unwrap().bits;
    let y = sample_prefix(sym, 1 << 16, 2).unwrap().bits;
    let mut g = c.benchmark_group("lcs_length");
    g.sample_size(20);
    g.bench_function("n65536", |b| b.iter(|| lcs_length(black_box(&x), black_box(&y), 1 << 16)));
    g.finish();
}

criterion_group!(benches, cylinder, moments, mixing, sampling, lcs);
criterion_main!(benches);
