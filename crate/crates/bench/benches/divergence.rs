use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use renyi_core::divergence::{sandwiched_renyi, sandwiched_renyi_trace_form};
use renyi_core::linalg::schatten_norm;
use renyi_core::optimize::{conditional_renyi_entropy, mutual_info_dual, OptimizerConfig};
use renyi_core::states::random::random_density;
use renyi_core::{AlphaOrder, NormOrder};

fn divergence(c: &mut Criterion) {
    let mut g = c.benchmark_group("sandwiched");
    for d in [2, 4, 8, 16] {
        let rho = random_density(d, d, 1).unwrap();
        let sigma = random_density(d, d, 2).unwrap();
        g.bench_with_input(BenchmarkId::new("norm_form", d), &d, |b, _| {
            b.iter(|| sandwiched_renyi(black_box(&rho), black_box(&sigma), AlphaOrder::Finite(2.0)))
        });
        g.bench_with_input(BenchmarkId::new("trace_form", d), &d, |b, _| {
            b.iter(|| sandwiched_renyi_trace_form(black_box(&rho), black_box(&sigma), AlphaOrder::Finite(2.0)))
        });
    }
    g.finish();
}

fn norms(c: &mut Criterion) {
    let mut g = c.benchmark_group("schatten");
    for d in [4, 16] {
        let x = random_density(d, d, 3).unwrap().matrix().clone();
        g.bench_with_input(BenchmarkId::new("p=3", d), &d, |b, _| {
            b.iter(|| schatten_norm(black_box(&x), NormOrder::Finite(3.0)))
        });
    }
    g.finish();
}

fn optimizers(c: &mut Criterion) {
    let mut g = c.benchmark_group("optimize");
    g.sample_size(10);
    let rho = random_density(4, 4, 4).unwrap().with_dims(vec![2, 2]).unwrap();
    let cfg = OptimizerConfig::with_seed(0);
    g.bench_function("conditional_entropy_2x2", |b| {
        b.iter(|| conditional_renyi_entropy(black_box(&rho), AlphaOrder::Finite(2.0), &cfg))
    });
    g.bench_function("mutual_info_dual_2x2", |b| {
        b.iter(|| mutual_info_dual(black_box(&rho), AlphaOrder::Finite(2.0), &cfg))
    });
    g.finish();
}

criterion_group!(benches, divergence, norms, optimizers);
criterion_main!(benches);
