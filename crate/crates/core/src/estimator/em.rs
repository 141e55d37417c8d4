//! Maximum-likelihood baseline: classical EM for normal mixtures, with the same
//! covariance projection as the robust fit so the two are directly comparable.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::init::build;
use super::{FitResult, InitMode};
use crate::constraints::{project_eigenvalues, ConstraintSpec};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::mixture::{assign, MixtureEval, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EmVariant {
    /// Posterior-weighted updates.
    #[default]
    Soft,
    /// Argmax assignments (classification likelihood).
    Hard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub tol: f64,
    pub constraints: ConstraintSpec,
    pub n_starts: usize,
    pub variant: EmVariant,
    pub init_mode: InitMode,
}

impl EmConfig {
    pub fn new(k: usize, constraints: ConstraintSpec) -> Self {
        Self {
            k,
            seed: 42,
            max_iters: 500,
            tol: 1e-9,
            constraints,
            n_starts: 20,
            variant: EmVariant::Soft,
            init_mode: InitMode::RandomRows,
        }
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Weighted mean and scatter (divided by the total weight).
fn weighted_moments(data: &Dataset, weights: &[f64]) -> (Vec<f64>, SymMatrix) {
    let p = data.p();
    let total: f64 = weights.iter().sum();
    let mut mu = vec![0.0; p];
    for (x, w) in data.rows().zip(weights) {
        for (m, v) in mu.iter_mut().zip(x) {
            *m += w * v;
        }
    }
    mu.iter_mut().for_each(|m| *m /= total);
    let mut s = vec![0.0; p * p];
    for (x, w) in data.rows().zip(weights) {
        if *w == 0.0 {
            continue;
        }
        for i in 0..p {
            let di = x[i] - mu[i];
            for j in 0..=i {
                s[i * p + j] += w * di * (x[j] - mu[j]);
            }
        }
    }
    for i in 0..p {
        for j in 0..=i {
            let v = s[i * p + j] / total;
            s[i * p + j] = v;
            s[j * p + i] = v;
        }
    }
    (mu, SymMatrix::new(p, s).expect("mirrored"))
}

struct Estep {
    /// Mean log-likelihood (soft) or mean classification log-likelihood (hard).
    objective: f64,
    /// `n x k` row-major responsibilities.
    resp: Vec<f64>,
}

fn e_step(data: &Dataset, theta: &ModelParams, variant: EmVariant) -> Result<Estep> {
    let eval = MixtureEval::new(theta)?;
    let k = theta.k();
    let mut resp = vec![0.0; data.n() * k];
    let mut total = 0.0;
    let mut scores = vec![0.0; k];
    for (i, x) in data.rows().enumerate() {
        for j in 0..k {
            scores[j] = eval.comps[j].log_weight + eval.log_pdf(j, x);
        }
        match variant {
            EmVariant::Soft => {
                let lse = log_sum_exp(&scores);
                total += lse;
                for j in 0..k {
                    resp[i * k + j] = (scores[j] - lse).exp();
                }
            }
            EmVariant::Hard => {
                let (best, _) = eval.best(x);
                total += scores[best];
                resp[i * k + best] = 1.0;
            }
        }
    }
    Ok(Estep { objective: total / data.n() as f64, resp })
}

fn single_run(data: &Dataset, config: &EmConfig, theta_init: ModelParams) -> Result<FitResult> {
    let k = config.k;
    let n = data.n();
    let mut theta = theta_init;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut previous = f64::NEG_INFINITY;
    while iterations < config.max_iters {
        let e = e_step(data, &theta, config.variant)?;
        trace.push(e.objective);
        if (e.objective - previous).abs() <= config.tol * e.objective.abs().max(1.0) {
            converged = true;
            break;
        }
        previous = e.objective;
        iterations += 1;

        let mut weights = Vec::with_capacity(k);
        let mut means = theta.means.clone();
        let mut covs = theta.covariances.clone();
        for j in 0..k {
            let col: Vec<f64> = (0..n).map(|i| e.resp[i * k + j]).collect();
            let mass: f64 = col.iter().sum();
            weights.push(mass / n as f64);
            if mass > 1e-12 {
                let (mu, s) = weighted_moments(data, &col);
                means[j] = mu;
                covs[j] = s;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let covs = project_eigenvalues(&covs, &config.constraints)?;
        theta = ModelParams { weights, means, covariances: covs };
    }
    let labels = assign(data, &theta)?;
    Ok(FitResult {
        params: theta,
        labels,
        objective_trace: trace,
        converged,
        start_index: 0,
        iterations,
        anomaly_flags: None,
    })
}

/// EM maximum-likelihood fit; the trace holds the mean log-likelihood
/// (classification log-likelihood for [`EmVariant::Hard`]) per iteration.
pub fn em_mle_fit(data: &Dataset, config: &EmConfig) -> Result<FitResult> {
    if config.k == 0 || config.max_iters == 0 || config.n_starts == 0 || !(config.tol > 0.0) {
        return Err(Error::InvalidArgs("k, max_iters, n_starts and tol must be positive".into()));
    }
    if data.n() < config.k {
        return Err(Error::TooFewRows { n: data.n(), k: config.k });
    }
    let outcomes: Vec<Result<FitResult>> = (0..config.n_starts)
        .into_par_iter()
        .map(|s| {
            let seed = config.seed.wrapping_add(s as u64);
            let init = build(data, config.k, config.init_mode, &config.constraints, seed)?;
            let mut fit = single_run(data, config, init)?;
            fit.start_index = s;
            Ok(fit)
        })
        .collect();
    let mut best: Option<FitResult> = None;
    let mut last_error = None;
    for outcome in outcomes {
        match outcome {
            Ok(fit) => {
                if best.as_ref().is_none_or(|b| fit.final_objective() > b.final_objective()) {
                    best = Some(fit);
                }
            }
            Err(e) => last_error = Some(e),
        }
    }
    best.ok_or_else(|| Error::AllStartsFailed {
        starts: config.n_starts,
        last: last_error.map(|e| e.to_string()).unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    #[test]
    fn single_component_is_sample_moments() {
        let data = Dataset::from_rows(&[[0.0, 1.0], [2.0, -1.0], [1.0, 3.0], [5.0, 0.5]], "t").unwrap();
        let mut cfg = EmConfig::new(1, ConstraintSpec::new(1e6, 1e-9).unwrap());
        cfg.n_starts = 1;
        let fit = em_mle_fit(&data, &cfg).unwrap();
        assert_eq!(fit.params.means[0], data.column_means());
        for (a, b) in fit.params.covariances[0].as_slice().iter().zip(data.covariance()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn log_likelihood_trace_is_monotone_without_active_projection() {
        let truth = ModelParams::new(
            vec![0.3, 0.7],
            vec![vec![0.0, 0.0], vec![3.0, 1.0]],
            vec![SymMatrix::identity(2), SymMatrix::diagonal(&[0.5, 2.0])],
        )
        .unwrap();
        let (data, _) = truth.sample(300, &mut seeded_rng(2)).unwrap();
        let mut cfg = EmConfig::new(2, ConstraintSpec::new(1e12, 1e-12).unwrap());
        cfg.n_starts = 3;
        let fit = em_mle_fit(&data, &cfg).unwrap();
        for w in fit.objective_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-8);
        }
    }
}
