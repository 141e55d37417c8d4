use betamix::estimator::{component_objective, initial_params, m_step_component, InnerOptions};
use betamix::rng::seeded_rng;
use betamix::validation::{align_by_means, boundedness_check};
use betamix::{
    cem_fit, check_constraints, em_mle_fit, multi_start_fit, ConstraintSpec, Dataset, EmConfig, EmVariant,
    EstimatorConfig, ModelParams, SymMatrix,
};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn two_blobs_2d(n: usize, seed: u64) -> Dataset {
    let truth = ModelParams::new(
        vec![0.45, 0.55],
        vec![vec![-3.0, 0.0], vec![3.0, 1.0]],
        vec![SymMatrix::new(2, vec![1.0, 0.3, 0.3, 0.8]).unwrap(), SymMatrix::diagonal(&[0.6, 1.5])],
    )
    .unwrap();
    truth.sample(n, &mut seeded_rng(seed)).unwrap().0
}

fn spec() -> ConstraintSpec {
    ConstraintSpec::new(50.0, 1e-3).unwrap()
}

fn max_abs_diff(a: &ModelParams, b: &ModelParams) -> f64 {
    let w = a.weights.iter().zip(&b.weights).map(|(x, y)| (x - y).abs());
    let m = a.means.iter().flatten().zip(b.means.iter().flatten()).map(|(x, y)| (x - y).abs());
    let s = a
        .covariances
        .iter()
        .flat_map(|c| c.as_slice().iter())
        .zip(b.covariances.iter().flat_map(|c| c.as_slice().iter()))
        .map(|(x, y)| (x - y).abs());
    w.chain(m).chain(s).fold(0.0, f64::max)
}

#[test]
fn translation_moves_means_only() {
    let data = two_blobs_2d(200, 1);
    let shift = [100.0, -40.0];
    let moved = data.translated(&shift);
    let mut config = EstimatorConfig::new(2, 0.4, spec());
    config.outer_tol = 1e-14;
    config.inner_tol = 1e-13;
    config.inner_fixedpoint_iters = 500;
    let init = initial_params(&data, &config, 3).unwrap();
    let mut init_moved = init.clone();
    for mu in &mut init_moved.means {
        mu.iter_mut().zip(&shift).for_each(|(m, s)| *m += s);
    }
    let a = cem_fit(&data, &config, &init).unwrap();
    let b = cem_fit(&moved, &config, &init_moved).unwrap();
    assert_eq!(a.labels, b.labels);
    let mut back = b.params.clone();
    for mu in &mut back.means {
        mu.iter_mut().zip(&shift).for_each(|(m, s)| *m -= s);
    }
    // An objective-based stop fixes parameters only to about the square root
    // of double precision.
    assert!(max_abs_diff(&a.params, &back) < 1e-6);
}

#[test]
fn permuted_start_gives_permuted_fit() {
    let data = two_blobs_2d(150, 2);
    let mut config = EstimatorConfig::new(3, 0.3, spec());
    config.max_outer_iters = 200;
    let init = initial_params(&data, &config, 11).unwrap();
    let perm = [2, 0, 1];
    let a = cem_fit(&data, &config, &init).unwrap();
    let b = cem_fit(&data, &config, &init.permuted(&perm)).unwrap();
    assert!(max_abs_diff(&a.params.permuted(&perm), &b.params) < 1e-10);
    assert!((a.final_objective() - b.final_objective()).abs() < 1e-12);
}

#[test]
fn small_beta_approaches_classification_em() {
    let data = two_blobs_2d(300, 4);
    let wide = ConstraintSpec::new(1e6, 1e-9).unwrap();
    let mut config = EstimatorConfig::new(2, 1e-4, wide.clone());
    config.n_starts = 5;
    config.inner_fixedpoint_iters = 200;
    config.inner_tol = 1e-12;
    let robust = multi_start_fit(&data, &config).unwrap();
    let mut em = EmConfig::new(2, wide);
    em.variant = EmVariant::Hard;
    em.n_starts = 5;
    em.max_iters = 1000;
    em.tol = 1e-12;
    let hard = em_mle_fit(&data, &em).unwrap();
    let hard = align_by_means(&hard.params, &robust.params).unwrap();
    assert!(max_abs_diff(&robust.params, &hard) < 5e-3, "{:?} vs {:?}", robust.params, hard);
}

#[test]
fn fits_stay_bounded() {
    let mut rng = seeded_rng(77);
    for run in 0..50u64 {
        let data = two_blobs_2d(rng.random_range(60..250), 500 + run);
        let k = 2 + (run % 2) as usize;
        let mut config = EstimatorConfig::new(k, rng.random_range(0.1..1.0), spec());
        config.n_starts = 2;
        config.seed = run;
        let fit = multi_start_fit(&data, &config).unwrap();
        let report = boundedness_check(&data, &fit.params, &config.constraints).unwrap();
        assert!(report.within(0.0, 10.0), "run {run}: {report:?}");
    }
}

#[test]
fn component_fixed_point_maximises_over_a_grid() {
    let mut rng = seeded_rng(31);
    let rows: Vec<[f64; 1]> = (0..400)
        .map(|i| {
            let z: f64 = StandardNormal.sample(&mut rng);
            [if i < 360 { 1.0 + 0.7 * z } else { 9.0 + z }]
        })
        .collect();
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let beta = 0.5;
    let wide = ConstraintSpec::new(1e6, 1e-9).unwrap();
    let step = m_step_component(
        &refs,
        &[0.0],
        &SymMatrix::identity(1),
        beta,
        &wide,
        InnerOptions { max_iters: 2000, tol: 1e-14 },
    )
    .unwrap();
    assert!(step.converged);
    let (mu, var) = (step.mean[0], step.cov.get(0, 0));
    let objective = |m: f64, v: f64| component_objective(&refs, &[m], &SymMatrix::diagonal(&[v]), beta).unwrap();

    let var_grid = (0..4001).map(|i| 0.2 + i as f64 * 0.0002);
    let best_var = var_grid.max_by(|a, b| objective(mu, *a).total_cmp(&objective(mu, *b))).unwrap();
    assert!((best_var - var).abs() <= 0.0004, "grid {best_var} vs fixed point {var}");
    let mu_grid = (0..4001).map(|i| 0.6 + i as f64 * 0.0002);
    let best_mu = mu_grid.max_by(|a, b| objective(*a, var).total_cmp(&objective(*b, var))).unwrap();
    assert!((best_mu - mu).abs() <= 0.0004, "grid {best_mu} vs fixed point {mu}");
    // Outliers at 9 barely move the robust location.
    assert!((mu - 1.0).abs() < 0.15);
}

#[test]
fn clean_cluster_recovered_within_sampling_error() {
    let truth = ModelParams::new(vec![1.0], vec![vec![2.0, -1.0]], vec![SymMatrix::diagonal(&[1.0, 4.0])]).unwrap();
    let (data, _) = truth.sample(500, &mut seeded_rng(8)).unwrap();
    let config = EstimatorConfig::new(1, 0.3, spec());
    let fit = multi_start_fit(&data, &config).unwrap();
    for (d, (m, t)) in fit.params.means[0].iter().zip(&truth.means[0]).enumerate() {
        let se = (truth.covariances[0].get(d, d) / 500.0).sqrt();
        assert!((m - t).abs() < 4.0 * se);
    }
}

#[test]
fn robust_mean_beats_sample_mean_under_outliers() {
    let mut rng = seeded_rng(12);
    let mut rows: Vec<[f64; 1]> = (0..180).map(|_| [StandardNormal.sample(&mut rng)]).collect();
    rows.extend((0..20).map(|_| [rng.random_range(15.0..20.0)]));
    let data = Dataset::from_rows(&rows, "contaminated").unwrap();
    let fit = multi_start_fit(&data, &EstimatorConfig::new(1, 0.5, spec())).unwrap();
    let sample_mean = data.column_means()[0];
    assert!(fit.params.means[0][0].abs() < sample_mean.abs());
}

#[test]
fn more_starts_never_lose() {
    let data = two_blobs_2d(120, 9);
    let mut config = EstimatorConfig::new(3, 0.3, spec());
    config.n_starts = 20;
    config.seed = 400;
    let best = multi_start_fit(&data, &config).unwrap().final_objective();
    for s in 0..20u64 {
        let init = initial_params(&data, &config, 400 + s).unwrap();
        let single = cem_fit(&data, &config, &init).unwrap().final_objective();
        assert!(best >= single);
    }
    config.nested_starts = true;
    assert!(multi_start_fit(&data, &config).unwrap().final_objective() >= best);
}

#[test]
fn maximum_likelihood_recovers_clean_mixture() {
    let data = two_blobs_2d(2000, 13);
    let mut em = EmConfig::new(2, spec());
    em.n_starts = 5;
    let fit = em_mle_fit(&data, &em).unwrap();
    let means = [[-3.0, 0.0], [3.0, 1.0]];
    let mut found: Vec<Vec<f64>> = fit.params.means.clone();
    found.sort_by(|a, b| a[0].total_cmp(&b[0]));
    for (m, t) in found.iter().zip(means) {
        for (a, b) in m.iter().zip(t) {
            assert!((a - b).abs() < 0.15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn traces_ascend_and_fits_are_feasible(seed in any::<u64>(), k in 1usize..=4, beta in 0.05f64..1.5, c in 1.0f64..100.0) {
        let data = two_blobs_2d(120, seed);
        let spec = ConstraintSpec::new(c, 1e-3).unwrap();
        let config = EstimatorConfig::new(k, beta, spec.clone());
        let init = initial_params(&data, &config, seed).unwrap();
        let fit = cem_fit(&data, &config, &init).unwrap();
        for w in fit.objective_trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-10);
        }
        let summary = check_constraints(&fit.params.covariances, &spec).unwrap().summary;
        prop_assert!(summary.max / summary.min <= c * (1.0 + 1e-10));
        prop_assert!(summary.min >= 1e-3 * (1.0 - 1e-10));
    }
}
