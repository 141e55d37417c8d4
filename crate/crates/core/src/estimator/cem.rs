use rayon::prelude::*;

use super::init::initial_params;
use super::mstep::{m_step_component, relative_change, update_proportions};
use super::{EstimatorConfig, FitResult};
use crate::constraints::{floor_eigenvalues, project_eigenvalues};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::mixture::{assign, evaluate_objective, Assignment, MixtureEval, ModelParams, ObjectiveEval};

/// Step-halvings tried before an outer iteration is declared stalled.
const MAX_HALVINGS: usize = 30;

fn lerp_params(from: &ModelParams, to: &ModelParams, t: f64) -> ModelParams {
    let mix = |a: f64, b: f64| (1.0 - t) * a + t * b;
    let mut weights: Vec<f64> = from.weights.iter().zip(&to.weights).map(|(a, b)| mix(*a, *b)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    ModelParams {
        weights,
        means: from
            .means
            .iter()
            .zip(&to.means)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| mix(*x, *y)).collect())
            .collect(),
        covariances: from.covariances.iter().zip(&to.covariances).map(|(a, b)| a.lerp(b, t)).collect(),
    }
}

/// Moves each empty component onto the worst-fitted rows and relabels once.
fn reseed_empty(
    data: &Dataset,
    theta: &ModelParams,
    labels: &[usize],
    counts: &[usize],
    config: &EstimatorConfig,
) -> Result<(ModelParams, Assignment)> {
    let eval = MixtureEval::new(theta)?;
    let mut fit: Vec<(usize, f64)> =
        labels.iter().enumerate().map(|(i, &j)| (i, eval.log_pdf(j, data.row(i)))).collect();
    fit.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let p = data.p();
    let cov = floor_eigenvalues(&SymMatrix::symmetrized(p, data.covariance())?, config.constraints.c1)?;
    let empty: Vec<usize> = counts.iter().enumerate().filter(|(_, &c)| c == 0).map(|(j, _)| j).collect();
    let n = data.n() as f64;
    let seeded_mass = empty.len() as f64 / n;
    let occupied_mass: f64 = (0..theta.k()).filter(|j| counts[*j] > 0).map(|j| theta.weights[j]).sum();

    let mut next = theta.clone();
    for (slot, &j) in empty.iter().enumerate() {
        next.means[j] = data.row(fit[slot.min(fit.len() - 1)].0).to_vec();
        next.covariances[j] = cov.clone();
    }
    for j in 0..theta.k() {
        next.weights[j] = if counts[j] == 0 { 1.0 / n } else { theta.weights[j] / occupied_mass * (1.0 - seeded_mass) };
    }
    next.covariances = project_eigenvalues(&next.covariances, &config.constraints)?;
    let relabeled = assign(data, &next)?;
    Ok((next, relabeled))
}

struct Candidate {
    params: ModelParams,
    inner_converged: bool,
}

/// Proportion update and per-component fixed point at fixed labels.
fn step_from(
    data: &Dataset,
    base: &ModelParams,
    assignment: &Assignment,
    config: &EstimatorConfig,
) -> Result<Candidate> {
    let k = config.k;
    let counts = assignment.counts(k);
    let weights = update_proportions(assignment, data.n(), k);
    let mut members: Vec<Vec<&[f64]>> = vec![Vec::new(); k];
    for (i, &j) in assignment.labels.iter().enumerate() {
        members[j].push(data.row(i));
    }

    let mut means = base.means.clone();
    let mut covs = base.covariances.clone();
    let mut inner_converged = true;
    for j in 0..k {
        if counts[j] == 0 {
            continue;
        }
        let step = m_step_component(
            &members[j],
            &base.means[j],
            &base.covariances[j],
            config.beta,
            &config.constraints,
            config.inner(),
        )?;
        inner_converged &= step.converged || step.iterations == 0;
        means[j] = step.mean;
        covs[j] = step.cov;
    }
    let covs = project_eigenvalues(&covs, &config.constraints)?;
    Ok(Candidate { params: ModelParams { weights, means, covariances: covs }, inner_converged })
}

fn max_param_change(a: &ModelParams, b: &ModelParams) -> f64 {
    let weights = a.weights.iter().zip(&b.weights).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    (0..a.k())
        .map(|j| relative_change(&a.means[j], &b.means[j], &a.covariances[j], &b.covariances[j]))
        .fold(weights, f64::max)
}

/// Candidate updates in order of preference: with empty components reseeded
/// (when there are any), then the plain update that leaves them at zero weight.
fn propose(data: &Dataset, theta: &ModelParams, labels: &[usize], config: &EstimatorConfig) -> Result<Vec<Candidate>> {
    let assignment = Assignment { labels: labels.to_vec() };
    let counts = assignment.counts(config.k);
    let mut out = Vec::with_capacity(2);
    if config.k > 1 && counts.contains(&0) {
        let (reseeded, relabeled) = reseed_empty(data, theta, labels, &counts, config)?;
        out.push(step_from(data, &reseeded, &relabeled, config)?);
    }
    out.push(step_from(data, theta, &assignment, config)?);
    Ok(out)
}

/// Classification-EM maximisation of the pseudo beta-likelihood from `theta_init`.
///
/// Each outer iteration assigns rows, updates proportions, runs the per-component
/// fixed point, projects the covariances jointly, and accepts the result only if
/// the objective does not decrease. Empty components are first reseeded; if that
/// lowers the objective the plain update is tried, then the previous
/// covariances, then step halving toward the current iterate. A component can
/// therefore end with zero weight when dropping it is what the objective prefers.
pub fn cem_fit(data: &Dataset, config: &EstimatorConfig, theta_init: &ModelParams) -> Result<FitResult> {
    config.validate()?;
    let n = data.n();
    if n < config.k {
        return Err(Error::TooFewRows { n, k: config.k });
    }
    if theta_init.k() != config.k {
        return Err(Error::DimensionMismatch { expected: config.k, found: theta_init.k() });
    }
    if theta_init.p() != data.p() {
        return Err(Error::DimensionMismatch { expected: data.p(), found: theta_init.p() });
    }
    theta_init.validate()?;
    let beta = config.beta;
    let mut theta = theta_init.clone();
    theta.covariances = project_eigenvalues(&theta.covariances, &config.constraints)?;
    let mut current: ObjectiveEval = evaluate_objective(data, &theta, beta)?;
    let mut trace = vec![current.value(beta)];
    let mut converged = false;
    let mut iterations = 0;
    let mut last_delta = f64::INFINITY;

    while iterations < config.max_outer_iters {
        iterations += 1;
        let candidates = propose(data, &theta, &current.labels, config)?;
        let improves = |params: &ModelParams| {
            evaluate_objective(data, params, beta).ok().filter(|eval| eval.centered >= current.centered)
        };

        let mut accepted: Option<(ModelParams, ObjectiveEval, bool)> = None;
        let mut inner_converged = true;
        for candidate in &candidates {
            if let Some(eval) = improves(&candidate.params) {
                inner_converged = candidate.inner_converged;
                accepted = Some((candidate.params.clone(), eval, true));
                break;
            }
        }
        let plain = &candidates.last().expect("at least one candidate").params;
        if accepted.is_none() {
            let kept_covs = ModelParams { covariances: theta.covariances.clone(), ..plain.clone() };
            accepted = improves(&kept_covs).map(|eval| (kept_covs, eval, false));
        }
        let mut t = 1.0;
        for _ in 0..MAX_HALVINGS {
            if accepted.is_some() {
                break;
            }
            t *= 0.5;
            let step = lerp_params(&theta, plain, t);
            accepted = improves(&step).map(|eval| (step, eval, false));
        }

        let Some((next, eval, full_step)) = accepted else {
            // No update improves on the current point. It is a numerical fixed
            // point if the plain update lands within tolerance of it.
            let tol = config.outer_tol * current.centered.abs().max(1.0);
            converged = last_delta <= tol
                || evaluate_objective(data, plain, beta).is_ok_and(|eval| current.centered - eval.centered <= tol);
            break;
        };
        let delta = eval.centered - current.centered;
        // Inner loops that keep pulling against the joint projection never
        // report convergence; an update that changes nothing is settled anyway.
        let settled = inner_converged || max_param_change(&theta, &next) <= config.inner_tol;
        theta = next;
        current = eval;
        trace.push(current.value(beta));
        let tol = config.outer_tol * current.centered.abs().max(1.0);
        // Partial steps near a constraint boundary can creep forever with
        // shrinking gains; two sub-tolerance ones in a row count as converged.
        if delta <= tol && ((full_step && settled) || (!full_step && last_delta <= tol)) {
            converged = true;
            break;
        }
        last_delta = delta;
    }

    Ok(FitResult {
        labels: Assignment { labels: current.labels },
        params: theta,
        objective_trace: trace,
        converged,
        start_index: 0,
        iterations,
        anomaly_flags: None,
    })
}

/// Runs [`cem_fit`] from `config.n_starts` initialisations seeded `seed + s`
/// and keeps the highest final objective (lowest start index on ties).
pub fn multi_start_fit(data: &Dataset, config: &EstimatorConfig) -> Result<FitResult> {
    config.validate()?;
    if data.n() < config.k {
        return Err(Error::TooFewRows { n: data.n(), k: config.k });
    }
    let mut outcomes: Vec<Result<FitResult>> = (0..config.n_starts)
        .into_par_iter()
        .map(|s| {
            let seed = config.seed.wrapping_add(s as u64);
            let init = initial_params(data, config, seed)?;
            let mut fit = cem_fit(data, config, &init)?;
            fit.start_index = s;
            Ok(fit)
        })
        .collect();
    if config.nested_starts {
        // The maximiser may leave components empty, which k-component starts
        // rarely reach: fits with fewer components, padded with zero-weight
        // copies, seed one extra run per smaller size.
        let nested: Vec<Result<FitResult>> = (1..config.k)
            .into_par_iter()
            .map(|g| {
                let mut cfg = config.clone();
                cfg.k = g;
                cfg.nested_starts = false;
                let smaller = multi_start_fit(data, &cfg)?;
                let mut fit = cem_fit(data, config, &pad_with_empty(&smaller.params, config.k))?;
                fit.start_index = config.n_starts + g - 1;
                Ok(fit)
            })
            .collect();
        outcomes.extend(nested);
    }

    let mut best: Option<FitResult> = None;
    let mut last_error = None;
    for outcome in outcomes {
        match outcome {
            Ok(fit) => {
                let better = best.as_ref().is_none_or(|b| fit.final_objective() > b.final_objective());
                if better {
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

/// Extends `params` to `k` components; the extra ones copy the last component
/// and carry zero weight, so the objective is unchanged.
pub(crate) fn pad_with_empty(params: &ModelParams, k: usize) -> ModelParams {
    let mut out = params.clone();
    let last = params.k() - 1;
    while out.k() < k {
        out.weights.push(0.0);
        out.means.push(params.means[last].clone());
        out.covariances.push(params.covariances[last].clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::ConstraintSpec;
    use crate::estimator::mstep::{m_step_component, InnerOptions};
    use crate::rng::seeded_rng;

    fn spec() -> ConstraintSpec {
        ConstraintSpec::new(50.0, 1e-6).unwrap()
    }

    fn two_cluster_1d(n: usize, seed: u64) -> (Dataset, Vec<usize>) {
        let truth = ModelParams::new(
            vec![0.5, 0.5],
            vec![vec![-5.0], vec![5.0]],
            vec![SymMatrix::identity(1), SymMatrix::identity(1)],
        )
        .unwrap();
        truth.sample(n, &mut seeded_rng(seed)).unwrap()
    }

    #[test]
    fn single_component_reduces_to_m_step() {
        let (data, _) = two_cluster_1d(200, 1);
        let mut cfg = EstimatorConfig::new(1, 0.3, spec());
        cfg.inner_fixedpoint_iters = 50;
        let init = initial_params(&data, &cfg, 5).unwrap();
        let fit = cem_fit(&data, &cfg, &init).unwrap();
        assert_eq!(fit.params.weights, vec![1.0]);
        let rows: Vec<&[f64]> = data.rows().collect();
        let direct = m_step_component(
            &rows,
            &fit.params.means[0],
            &fit.params.covariances[0],
            0.3,
            &cfg.constraints,
            InnerOptions { max_iters: 1000, tol: 1e-13 },
        )
        .unwrap();
        assert!((direct.mean[0] - fit.params.means[0][0]).abs() < 1e-6);
    }

    #[test]
    fn separated_clusters_recovered() {
        let (data, truth_labels) = two_cluster_1d(400, 11);
        let mut cfg = EstimatorConfig::new(2, 0.3, spec());
        cfg.n_starts = 5;
        let fit = multi_start_fit(&data, &cfg).unwrap();
        let agree = fit.labels.labels.iter().zip(&truth_labels).filter(|(a, b)| a == b).count();
        let frac = agree.max(400 - agree) as f64 / 400.0;
        assert!(frac >= 0.99, "agreement {frac}");
    }

    #[test]
    fn too_few_rows() {
        let data = Dataset::from_rows(&[[0.0], [1.0], [2.0]], "t").unwrap();
        let cfg = EstimatorConfig::new(4, 0.3, spec());
        assert_eq!(multi_start_fit(&data, &cfg).unwrap_err(), Error::TooFewRows { n: 3, k: 4 });
    }

    #[test]
    fn single_start_equals_direct_fit_and_is_deterministic() {
        let (data, _) = two_cluster_1d(120, 4);
        let mut cfg = EstimatorConfig::new(2, 0.4, spec());
        cfg.n_starts = 1;
        cfg.seed = 17;
        let a = multi_start_fit(&data, &cfg).unwrap();
        let direct = cem_fit(&data, &cfg, &initial_params(&data, &cfg, 17).unwrap()).unwrap();
        assert_eq!(a, direct);
        cfg.n_starts = 4;
        assert_eq!(multi_start_fit(&data, &cfg).unwrap(), multi_start_fit(&data, &cfg).unwrap());
    }
}
