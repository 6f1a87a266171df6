//! Parallel vs sequential timings of the data-parallel hot spots.
//!
//! With the `parallel` feature each workload runs twice: inside a one-thread
//! rayon pool and on the global pool. Without it only the sequential
//! fallback is measured.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;

use dropout_core::bagging::{self, BaggingConfig};
use dropout_core::dataset::{ClassLabel, Dataset, FeatureKind, FeatureSchema};
use dropout_core::etl::{self, SynthConfig};
use dropout_core::imbalance::{self, SmoteConfig};
use dropout_core::rng;
use dropout_core::selection::{cross_validate, ExperimentConfig, ModelSpec, ParamPoint};

fn dataset(n: usize, positive_rate: f64, seed: u64) -> Dataset {
    let mut r = rng::seeded(seed);
    let schema = vec![
        FeatureSchema::new("x", FeatureKind::Numeric),
        FeatureSchema::new("y", FeatureKind::Numeric),
        FeatureSchema::new("grade", FeatureKind::ordinal(0, 12)),
        FeatureSchema::new("flag", FeatureKind::yes_no()),
    ];
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let pos = r.random_bool(positive_rate);
        let shift = if pos { 0.8 } else { 0.0 };
        rows.push(vec![
            r.random_range(0.0..3.0) + shift,
            r.random_range(0.0..3.0) - shift,
            r.random_range(0..=12) as f64,
            f64::from(u8::from(r.random_bool(if pos { 0.5 } else { 0.2 }))),
        ]);
        labels.push(if pos { ClassLabel::Positive } else { ClassLabel::Negative });
    }
    Dataset::new(schema, rows, labels).expect("valid bench data")
}

#[cfg(feature = "parallel")]
fn modes() -> Vec<(&'static str, Option<rayon::ThreadPool>)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool");
    vec![("sequential", Some(one)), ("parallel", None)]
}

#[cfg(not(feature = "parallel"))]
fn modes() -> Vec<(&'static str, Option<()>)> {
    vec![("sequential", None)]
}

#[cfg(feature = "parallel")]
fn run<T: Send>(pool: &Option<rayon::ThreadPool>, f: impl FnOnce() -> T + Send) -> T {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run<T: Send>(_: &Option<()>, f: impl FnOnce() -> T + Send) -> T {
    f()
}

fn bench_bagging(c: &mut Criterion) {
    let ds = dataset(3000, 0.1, 1);
    let cfg = BaggingConfig {
        trials: 16,
        seed: 5,
        ..BaggingConfig::default()
    };
    let mut g = c.benchmark_group("bagging_fit_16_trees");
    g.sample_size(10);
    for (name, pool) in modes() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run(&pool, || bagging::fit(&ds, &cfg).unwrap()))
        });
    }
    g.finish();
}

fn bench_smote(c: &mut Criterion) {
    let ds = dataset(4000, 0.1, 2);
    let cfg = SmoteConfig {
        seed: 9,
        ..SmoteConfig::default()
    };
    let mut g = c.benchmark_group("smote_draws");
    g.sample_size(10);
    for (name, pool) in modes() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run(&pool, || imbalance::smote_draws(&ds, &cfg).unwrap()))
        });
    }
    g.finish();
}

fn bench_cross_validation(c: &mut Criterion) {
    let ds = dataset(3000, 0.05, 3);
    let spec = ModelSpec::by_id("single_tree_hybrid").unwrap();
    let point = ParamPoint::Tree { cp: 0.0005, c_fn: None };
    let cfg = ExperimentConfig {
        seed: 11,
        ..ExperimentConfig::default()
    };
    let mut g = c.benchmark_group("cross_validate_5_folds");
    g.sample_size(10);
    for (name, pool) in modes() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run(&pool, || cross_validate(&spec, &point, &ds, &cfg).unwrap()))
        });
    }
    g.finish();
}

fn bench_etl(c: &mut Criterion) {
    let cohort = etl::generate_synthetic(&SynthConfig {
        students: 3000,
        ..SynthConfig::default()
    })
    .unwrap();
    let mut g = c.benchmark_group("etl_build_all_time");
    g.sample_size(10);
    for (name, pool) in modes() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run(&pool, || etl::build_all_time(&cohort.years).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_bagging, bench_smote, bench_cross_validation, bench_etl);
criterion_main!(benches);
