use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use toeplab::asymptotics::{closed_form_coefficients, stationary_phase_terms};
use toeplab::experiments::{phase_problem, phase_quadrature, PhaseKind};
use toeplab::quantum::{build_basis, spectral_space_q1};
use toeplab::toeplitz::{assemble, compose};
use toeplab::{Expr, KahlerModel};
use toeplab_bench::{height, perturbed_sphere, probe_point, sphere_basis};

fn bases(c: &mut Criterion) {
    let mut g = c.benchmark_group("basis");
    g.sample_size(10);
    for k in [16, 32, 64] {
        g.bench_with_input(BenchmarkId::new("cp1_fs", k), &k, |b, &k| {
            b.iter(|| build_basis(&perturbed_sphere(), black_box(k)).unwrap())
        });
    }
    g.bench_function("bargmann/32", |b| {
        b.iter(|| build_basis(&KahlerModel::bargmann(), black_box(32)).unwrap())
    });
    g.bench_function("landau_q1/32", |b| {
        b.iter(|| spectral_space_q1(&KahlerModel::landau_q1(), black_box(32), 8).unwrap())
    });
    g.finish();
}

fn operators(c: &mut Criterion) {
    let mut g = c.benchmark_group("toeplitz");
    for k in [16, 64] {
        let basis = sphere_basis(k);
        let f = height();
        g.bench_with_input(BenchmarkId::new("assemble", k), &k, |b, _| {
            b.iter(|| assemble(&basis, black_box(&f)).unwrap())
        });
        let t = assemble(&basis, &f).unwrap();
        g.bench_with_input(BenchmarkId::new("compose", k), &k, |b, _| {
            b.iter(|| compose(&t, black_box(&t)).unwrap())
        });
    }
    g.finish();
}

fn coefficients(c: &mut Criterion) {
    let model = perturbed_sphere();
    let f = height();
    let x = probe_point();
    let mut g = c.benchmark_group("closed_form");
    for depth in [1, 2] {
        g.bench_with_input(BenchmarkId::from_parameter(depth), &depth, |b, &d| {
            b.iter(|| closed_form_coefficients(&model, &f, black_box(x), d).unwrap())
        });
    }
    g.finish();
}

fn stationary_phase(c: &mut Criterion) {
    let amp = Expr::parse("1").unwrap();
    let mut g = c.benchmark_group("stationary_phase");
    g.bench_function("jets/3", |b| {
        b.iter(|| phase_problem(PhaseKind::Quartic, &amp, black_box(3)).unwrap())
    });
    let problem = phase_problem(PhaseKind::Quartic, &amp, 3).unwrap();
    g.bench_function("engine/3", |b| {
        b.iter(|| stationary_phase_terms(&problem, black_box(20.0), 3).unwrap())
    });
    g.sample_size(10);
    g.bench_function("quadrature/k20", |b| {
        b.iter(|| phase_quadrature(PhaseKind::Quartic, &amp, black_box(20.0)))
    });
    g.finish();
}

criterion_group!(benches, bases, operators, coefficients, stationary_phase);
criterion_main!(benches);
