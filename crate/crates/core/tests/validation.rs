use betamix::validation::{
    assumption1_report, assumption1_threshold, consistency_experiment, integrate, lemma_inequality_suite,
    min_scale_inflation, scale_inflation_bracket, ConsistencyPlan,
};
use betamix::{ConstraintSpec, Error, EstimatorConfig, ModelParams, SymMatrix};

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn single_component_error_shrinks_at_root_n() {
    let truth = ModelParams::new(vec![1.0], vec![vec![0.5, -1.0]], vec![SymMatrix::diagonal(&[1.0, 2.0])]).unwrap();
    let mut config = EstimatorConfig::new(1, 0.3, ConstraintSpec::new(50.0, 1e-3).unwrap());
    config.n_starts = 1;
    let mut plan = ConsistencyPlan::new(vec![100, 400, 1600, 6400], (1..=20).collect());
    // The normal family contains the truth, so it is its own maximiser.
    plan.reference_n = 0;
    let table = consistency_experiment(&truth, 0.3, &plan, &config).unwrap();
    let xs: Vec<f64> = table.rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = table.rows.iter().map(|r| r.median.ln()).collect();
    let s = slope(&xs, &ys);
    assert!((s + 0.5).abs() <= 0.15, "slope {s}");
}

#[test]
fn one_point_grid_gives_one_row() {
    let truth = ModelParams::new(vec![1.0], vec![vec![0.0]], vec![SymMatrix::identity(1)]).unwrap();
    let mut config = EstimatorConfig::new(1, 0.5, ConstraintSpec::new(10.0, 1e-3).unwrap());
    config.n_starts = 1;
    let mut plan = ConsistencyPlan::new(vec![50], vec![3]);
    plan.reference_n = 0;
    let table = consistency_experiment(&truth, 0.5, &plan, &config).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert!(table.rows[0].median >= 0.0);
}

#[test]
fn assumption_threshold_examples() {
    assert!((assumption1_threshold(0.5, 1, 1e-15).unwrap() - 0.5 / 1.5f64.powf(1.5)).abs() < 1e-12);
    assert!((assumption1_threshold(0.3, 5, 1e-15).unwrap() - 0.3 / 1.3f64.powf(3.5)).abs() < 1e-12);
    assert!(matches!(assumption1_threshold(0.0, 1, 0.1), Err(Error::InvalidArgs(_))));
    assert!(matches!(assumption1_threshold(0.5, 1, 0.0), Err(Error::InvalidArgs(_))));
    let report = assumption1_report(&[0.6, 0.4], 0.3, 1, 0.1).unwrap();
    assert!(report.satisfied && report.threshold > 0.0);
    let report = assumption1_report(&[0.1; 10], 0.5, 1, 0.1).unwrap();
    assert!(!report.satisfied);
}

#[test]
fn inflation_root_closes_the_bracket() {
    for (pi, beta, p) in [(0.442, 0.5, 1), (0.6, 0.3, 2), (0.9, 0.3, 5), (0.5, 1.0, 3)] {
        match min_scale_inflation(pi, beta, p) {
            Ok(c) => assert!(scale_inflation_bracket(pi, beta, p, c) >= -1e-12),
            Err(e) => assert!(matches!(e, Error::Infeasible { .. }), "{e:?}"),
        }
    }
}

#[test]
fn inequality_suite_is_deterministic_and_clean() {
    let a = lemma_inequality_suite(200, 99).unwrap();
    let b = lemma_inequality_suite(200, 99).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.total_violations(), 0);
    assert!(a.checks >= 200);
}

#[test]
fn quadrature_handles_peaked_integrands() {
    let narrow = integrate(|x| (-x * x / 2e-4).exp(), -1.0, 1.0, 1e-12).unwrap();
    assert!((narrow / (2e-4 * std::f64::consts::PI).sqrt() - 1.0).abs() < 1e-10);
}
