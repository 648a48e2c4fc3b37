use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fracfit::models::{bal_fractional_b, bal_fractional_b_many, tape_fractional};
use fracfit::{bundled_dataset, caputo_derivative, lm_fit, mittag_leffler, GridFunction, LmOptions, ModelSpec, SeriesConfig};
use fracfit_bench::{bal_fractional_params, tape_params, BAL_TIMES};

fn special_functions(c: &mut Criterion) {
    let cfg = SeriesConfig::default();
    c.bench_function("mittag_leffler alpha=0.8 z=-5", |b| {
        b.iter(|| mittag_leffler(black_box(0.8), black_box(-5.0), &cfg).unwrap())
    });
    c.bench_function("mittag_leffler alpha=1.2 z=-20", |b| {
        b.iter(|| mittag_leffler(black_box(1.2), black_box(-20.0), &cfg).unwrap())
    });
}

fn double_series(c: &mut Criterion) {
    let theta = bal_fractional_params();
    let cfg = SeriesConfig::default();
    c.bench_function("bal_fractional_b t=90 order=45", |b| {
        b.iter(|| bal_fractional_b(black_box(90.0), &theta, &cfg).unwrap())
    });
    c.bench_function("bal_fractional_b_many 9 points", |b| {
        b.iter(|| bal_fractional_b_many(black_box(&BAL_TIMES), &theta, &cfg).unwrap())
    });
    let deep = cfg.with_double_series_order(120);
    c.bench_function("bal_fractional_b t=90 order=120", |b| {
        b.iter(|| bal_fractional_b(black_box(90.0), &theta, &deep).unwrap())
    });
}

fn quadrature(c: &mut Criterion) {
    let theta = tape_params();
    c.bench_function("tape_fractional t=240", |b| {
        b.iter(|| tape_fractional(black_box(240.0), &theta).unwrap())
    });
    let grid = GridFunction::from_fn(0.0, 10.0, 1e-2, |t| t * t).unwrap();
    c.bench_function("caputo_derivative 1000 nodes", |b| {
        b.iter(|| caputo_derivative(&grid, black_box(0.5), 10.0).unwrap())
    });
}

fn fitting(c: &mut Criterion) {
    let data = bundled_dataset("bal").unwrap();
    let classical = ModelSpec::by_name("bal-classical").unwrap();
    c.bench_function("lm_fit bal-classical", |b| {
        b.iter(|| lm_fit(&classical, &[250.0, 0.1, 0.02], &data, &LmOptions::default()).unwrap())
    });
    let fractional = ModelSpec::by_name("bal-fractional").unwrap();
    let mut group = c.benchmark_group("slow");
    group.sample_size(10);
    group.bench_function("lm_fit bal-fractional", |b| {
        b.iter(|| lm_fit(&fractional, &fractional.default_start(), &data, &LmOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, special_functions, double_series, quadrature, fitting);
criterion_main!(benches);
