//! Kernel timings on the default rayon pool against a one-thread pool.
//! Build with `--no-default-features` to time the sequential fallback itself.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use oldroyd_core::experiment::check::random_state;
use oldroyd_core::model::{rhs, ModelParams, Variant};
use oldroyd_core::spectral::{Grid, ScalarField};
use oldroyd_core::timestep::{step, Scheme, StepConfig};
use rayon::{ThreadPool, ThreadPoolBuilder};

fn pools() -> Vec<(&'static str, ThreadPool)> {
    vec![
        ("pool", ThreadPoolBuilder::new().build().unwrap()),
        ("one_thread", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
    ]
}

fn params() -> ModelParams {
    ModelParams {
        mu: 0.5,
        coupling: 1.0,
        alpha: 1.0,
        beta: 0.2,
        slip: 0.3,
        q_enabled: true,
        variant: Variant::Full,
        ..Default::default()
    }
}

fn fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft_round_trip");
    for n in [128, 256] {
        let g = Grid::periodic_square(n).unwrap();
        let values: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        for (name, pool) in pools() {
            group.bench_with_input(BenchmarkId::new(name, n), &values, |b, v| {
                pool.install(|| {
                    b.iter(|| {
                        let f = ScalarField::from_physical(&g, black_box(v.clone())).unwrap();
                        black_box(f.padded_physical())
                    })
                })
            });
        }
    }
    group.finish();
}

fn right_hand_side(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    let p = params();
    for n in [64, 128] {
        let s = random_state(n, 1);
        for (name, pool) in pools() {
            group.bench_with_input(BenchmarkId::new(name, n), &s, |b, s| {
                pool.install(|| b.iter(|| black_box(rhs(black_box(s), &p))))
            });
        }
    }
    group.finish();
}

fn ifrk4_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("ifrk4_step");
    group.sample_size(20);
    let p = params();
    let cfg = StepConfig::fixed(Scheme::Ifrk4, 1e-3, 1.0);
    for n in [64, 128] {
        let s = random_state(n, 2);
        for (name, pool) in pools() {
            group.bench_with_input(BenchmarkId::new(name, n), &s, |b, s| {
                pool.install(|| b.iter(|| black_box(step(black_box(s), 1e-3, &p, &cfg).unwrap())))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, fft, right_hand_side, ifrk4_step);
criterion_main!(benches);
