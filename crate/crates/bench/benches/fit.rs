use std::hint::black_box;

use betamix::estimator::initial_params;
use betamix::rng::seeded_rng;
use betamix::{cem_fit, em_mle_fit, multi_start_fit, ConstraintSpec, EmConfig, EstimatorConfig};
use betamix_bench::three_cluster_truth;
use criterion::{criterion_group, criterion_main, Criterion};

fn fits(c: &mut Criterion) {
    let (data, _) = three_cluster_truth().sample(500, &mut seeded_rng(2)).unwrap();
    let spec = ConstraintSpec::new(50.0, 1e-3).unwrap();
    let mut config = EstimatorConfig::new(3, 0.3, spec.clone());
    config.n_starts = 4;
    let init = initial_params(&data, &config, 7).unwrap();
    let mut em = EmConfig::new(3, spec);
    em.n_starts = 4;

    let mut group = c.benchmark_group("fit_n500_k3");
    group.sample_size(20);
    group.bench_function("cem_single_start", |b| b.iter(|| cem_fit(black_box(&data), &config, &init)));
    group.bench_function("cem_four_starts", |b| b.iter(|| multi_start_fit(black_box(&data), &config)));
    group.bench_function("em_four_starts", |b| b.iter(|| em_mle_fit(black_box(&data), &em)));
    group.finish();
}

criterion_group!(benches, fits);
criterion_main!(benches);
