use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use welander_core::nonsmooth::{find_periodic_orbit, return_map, verify_homoclinic};
use welander_core::smooth::{find_smooth_orbits, hopf_scan};
use welander_core::{build_nonsmooth, integrate, IntegratorOptions, Params, State};

fn integrator(c: &mut Criterion) {
    let sys = build_nonsmooth(&Params::with_epsilon(-0.05));
    let opts = IntegratorOptions::default().with_t_max(50.0);
    c.bench_function("integrate periodic regime t=50", |b| {
        b.iter(|| integrate(&sys, black_box(State::new(0.5, 0.3)), &opts).unwrap())
    });
}

fn nonsmooth(c: &mut Criterion) {
    c.bench_function("return map eps=-0.03", |b| b.iter(|| return_map(-0.03, black_box(0.57)).unwrap()));
    c.bench_function("periodic orbit eps=-0.03", |b| b.iter(|| find_periodic_orbit(black_box(-0.03)).unwrap()));
    c.bench_function("homoclinic check", |b| b.iter(|| verify_homoclinic(black_box(1e-8), 1e-5).unwrap()));
}

fn smooth(c: &mut Criterion) {
    let mut g = c.benchmark_group("smooth");
    g.sample_size(10);
    g.bench_function("hopf scan a=1e-3", |b| b.iter(|| hopf_scan(1e-3, black_box(-0.07), -0.06).unwrap()));
    g.bench_function("orbits a=1e-3 eps=-0.0652", |b| {
        b.iter(|| find_smooth_orbits(black_box(-0.0652), 1e-3).unwrap())
    });
    g.finish();
}

criterion_group!(benches, integrator, nonsmooth, smooth);
criterion_main!(benches);
