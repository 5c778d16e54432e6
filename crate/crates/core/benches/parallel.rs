//! Thread-pool comparison for the data-parallel kernels.
//!
//! Each kernel runs inside a one-thread rayon pool and inside a wider
//! pool. Built with `--no-default-features`, both variants exercise the
//! sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use frachamil::energy::gradient;
use frachamil::fracops::{marchaud_derivative, Side};
use frachamil::mpa::{estimate_rim, nehari_minimize, rim_monte_carlo, NehariSettings};
use frachamil::par;
use frachamil::problem::{build_instance, growth_check, InstanceConfig, ProblemInstance};
use frachamil::sampling::gaussian_bump;
use frachamil::RealField;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(points: usize) -> ProblemInstance {
    let mut c = InstanceConfig::canonical();
    c.points = points;
    build_instance(&c).unwrap()
}

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let wide = rayon::current_num_threads().max(2);
    [1, wide]
        .into_iter()
        .map(|n| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            (format!("{n}-threads"), pool)
        })
        .collect()
}

fn label(pool: &str) -> String {
    if par::is_parallel() {
        pool.to_string()
    } else {
        format!("sequential-{pool}")
    }
}

fn kernels(c: &mut Criterion) {
    let inst = instance(4096);
    let u = gaussian_bump(inst.grid(), 1);
    let gauss = RealField::from_fn(inst.grid(), |t| (-t * t).exp());
    let small = instance(1024);
    let rim = estimate_rim(&inst).unwrap();

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (name, pool) in pools() {
        let id = label(&name);
        group.bench_function(BenchmarkId::new("gradient_n4096", &id), |b| {
            pool.install(|| b.iter(|| gradient(&inst, &u).unwrap()))
        });
        group.bench_function(BenchmarkId::new("marchaud_n4096", &id), |b| {
            pool.install(|| b.iter(|| marchaud_derivative(&gauss, 0.75, Side::Left).unwrap()))
        });
        group.bench_function(BenchmarkId::new("growth_check_1e4", &id), |b| {
            pool.install(|| b.iter(|| growth_check(&inst, 10_000, &mut ChaCha8Rng::seed_from_u64(1))))
        });
        group.bench_function(BenchmarkId::new("rim_monte_carlo_20", &id), |b| {
            pool.install(|| b.iter(|| rim_monte_carlo(&inst, &rim, 20, &mut ChaCha8Rng::seed_from_u64(2)).unwrap()))
        });
        group.bench_function(BenchmarkId::new("nehari_4_restarts_n1024", &id), |b| {
            let settings = NehariSettings { tol: 1e-6, max_iter: 5000 };
            pool.install(|| b.iter(|| nehari_minimize(&small, 4, settings, &mut ChaCha8Rng::seed_from_u64(3)).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
