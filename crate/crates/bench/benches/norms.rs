use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use freelip::gallery;
use freelip::{norm_alpha, norm_flow, norm_flow_exact, norm_line, orbit_norm_profile, Backend};
use freelip_bench::{alpha_vector, finite_vector, line_vector};

fn flow(c: &mut Criterion) {
    let mut g = c.benchmark_group("norm_flow");
    for n in [8, 16, 32, 64] {
        let mu = finite_vector(n, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &mu, |b, mu| b.iter(|| norm_flow(black_box(mu)).unwrap()));
    }
    g.finish();
}

fn exact(c: &mut Criterion) {
    let mut g = c.benchmark_group("norm_flow_exact");
    g.sample_size(10);
    for n in [8, 16] {
        let mu = finite_vector(n, 2);
        g.bench_with_input(BenchmarkId::from_parameter(n), &mu, |b, mu| {
            b.iter(|| norm_flow_exact(black_box(mu)).unwrap())
        });
    }
    g.finish();
}

fn closed_forms(c: &mut Criterion) {
    let mut g = c.benchmark_group("closed_form");
    let a = alpha_vector(10_000, 1_000, 3);
    g.bench_function("alpha_1000", |b| b.iter(|| norm_alpha(black_box(&a)).unwrap()));
    g.bench_function("flow_on_alpha_100", |b| {
        let small = alpha_vector(1_000, 100, 4);
        b.iter(|| norm_flow(black_box(&small)).unwrap())
    });
    let l = line_vector(1_000, 5);
    g.bench_function("line_1000", |b| b.iter(|| norm_line(black_box(&l)).unwrap()));
    g.finish();
}

fn doubling_profile(c: &mut Criterion) {
    let f = gallery::doubling_map();
    let mu = gallery::dyadic_vector(f.space().clone(), 40).unwrap();
    c.bench_function("doubling_profile_40x30", |b| {
        b.iter(|| orbit_norm_profile(&f, black_box(&mu), 30, Backend::Line).unwrap())
    });
}

criterion_group!(benches, flow, exact, closed_forms, doubling_profile);
criterion_main!(benches);
