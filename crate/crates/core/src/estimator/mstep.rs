//! Per-component maximisation step.
//!
//! For the rows currently assigned to one component, the stationarity
//! conditions of the pseudo beta-likelihood give a weighted fixed point:
//!
//! ```text
//! w_i   = phi(x_i; mu, S)^beta
//! mu    = sum w_i x_i / sum w_i
//! S     = sum w_i (x_i - mu)(x_i - mu)^T / D
//! D     = sum w_i - n_j beta (2 pi)^(-p beta/2) (1+beta)^(-(p+2)/2) |S|^(-beta/2)
//! ```
//!
//! which reduces to the sample mean and covariance as beta goes to zero.

use std::f64::consts::PI;

use crate::constraints::{floor_eigenvalues, ConstraintSpec};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, SymMatrix};
use crate::mixture::{centered_power_term, check_beta, dpd_integral_from_logdet, Assignment, ComponentEval};

/// `pi_j = n_j / n`.
pub fn update_proportions(labels: &Assignment, n: usize, k: usize) -> Vec<f64> {
    labels.counts(k).into_iter().map(|c| c as f64 / n as f64).collect()
}

/// Density-power weights `phi(x_i; mu, sigma)^beta`.
pub fn dpd_weights(rows: &[&[f64]], mu: &[f64], sigma: &SymMatrix, beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    let comp = ComponentEval::new(1.0, sigma)?;
    Ok(rows.iter().map(|x| (beta * comp.log_pdf(x, mu)).exp()).collect())
}

pub fn update_mean(rows: &[&[f64]], weights: &[f64]) -> Result<Vec<f64>> {
    let p = rows.first().map(|r| r.len()).ok_or(Error::DegenerateCluster)?;
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateCluster);
    }
    let mut mu = vec![0.0; p];
    for (x, w) in rows.iter().zip(weights) {
        for (m, v) in mu.iter_mut().zip(x.iter()) {
            *m += w * v;
        }
    }
    mu.iter_mut().for_each(|m| *m /= total);
    Ok(mu)
}

/// Weighted scatter about `mu_new` divided by the fixed-point denominator.
/// The result may be singular when the rows span less than `p` dimensions.
pub fn update_cov(
    rows: &[&[f64]],
    weights: &[f64],
    mu_new: &[f64],
    sigma_current: &SymMatrix,
    beta: f64,
    n_j: usize,
) -> Result<SymMatrix> {
    check_beta(beta)?;
    let p = mu_new.len();
    let logdet = cholesky(sigma_current)?.logdet();
    let pf = p as f64;
    let penalty = n_j as f64
        * beta
        * (-0.5 * pf * beta * (2.0 * PI).ln() - 0.5 * (pf + 2.0) * (1.0 + beta).ln() - 0.5 * beta * logdet).exp();
    let denominator = weights.iter().sum::<f64>() - penalty;
    if !(denominator > 0.0) {
        return Err(Error::NonPositiveDenominator { denominator });
    }
    let mut scatter = vec![0.0; p * p];
    let mut diff = vec![0.0; p];
    for (x, w) in rows.iter().zip(weights) {
        for (d, (a, b)) in diff.iter_mut().zip(x.iter().zip(mu_new)) {
            *d = a - b;
        }
        for i in 0..p {
            for j in 0..=i {
                scatter[i * p + j] += w * diff[i] * diff[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..=i {
            let v = scatter[i * p + j] / denominator;
            scatter[i * p + j] = v;
            scatter[j * p + i] = v;
        }
    }
    SymMatrix::new(p, scatter)
}

/// Per-row contribution of one component's `(mu, sigma)` to the objective,
/// excluding the log-weight and shifted by `-1/beta`:
/// `(1/n_j) sum_i (phi_i^beta - 1)/beta - int phi^(1+beta) / (1+beta)`.
pub fn component_objective(rows: &[&[f64]], mu: &[f64], sigma: &SymMatrix, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if rows.is_empty() {
        return Err(Error::DegenerateCluster);
    }
    let comp = ComponentEval::new(1.0, sigma)?;
    let power: f64 = rows.iter().map(|x| centered_power_term(comp.log_pdf(x, mu), beta)).sum();
    Ok(power / rows.len() as f64 - dpd_integral_from_logdet(comp.logdet, beta, mu.len()) / (1.0 + beta))
}

/// Iteration controls for [`m_step_component`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOptions {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self { max_iters: 50, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentStep {
    pub mean: Vec<f64>,
    pub cov: SymMatrix,
    pub iterations: usize,
    /// The fixed point was reached within tolerance.
    pub converged: bool,
    /// Some fixed-point proposal lowered the component objective and had to
    /// be shortened or dropped.
    pub reverted: bool,
}

pub(crate) fn relative_change(mu_old: &[f64], mu_new: &[f64], s_old: &SymMatrix, s_new: &SymMatrix) -> f64 {
    let scale = (s_old.trace() / s_old.dim() as f64).max(f64::MIN_POSITIVE).sqrt();
    let dmu = mu_old.iter().zip(mu_new).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / scale;
    let dsig = s_new.sub(s_old).frobenius_norm() / s_old.frobenius_norm().max(f64::MIN_POSITIVE);
    dmu.max(dsig)
}

/// Step halvings tried when a fixed-point proposal lowers the objective.
const MAX_INNER_HALVINGS: usize = 30;

/// Weighted scatter about `mu` divided by the total weight; the fallback
/// direction when the fixed-point denominator is not positive.
fn weighted_scatter(rows: &[&[f64]], weights: &[f64], mu: &[f64]) -> Result<SymMatrix> {
    let total: f64 = weights.iter().sum();
    let p = mu.len();
    let mut s = vec![0.0; p * p];
    for (x, w) in rows.iter().zip(weights) {
        for i in 0..p {
            for j in 0..=i {
                s[i * p + j] += w * (x[i] - mu[i]) * (x[j] - mu[j]);
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
    SymMatrix::new(p, s)
}

/// Runs the weighted fixed point for one component. Covariance iterates are
/// floored at `spec.c1`; the ratio constraint is left to the joint projection.
/// A proposal that lowers the component objective is halved back toward the
/// current iterate, so the objective never decreases along the iterations.
pub fn m_step_component(
    rows: &[&[f64]],
    mu_init: &[f64],
    sigma_init: &SymMatrix,
    beta: f64,
    spec: &ConstraintSpec,
    options: InnerOptions,
) -> Result<ComponentStep> {
    let n_j = rows.len();
    if n_j == 0 {
        return Err(Error::DegenerateCluster);
    }
    let mut value = component_objective(rows, mu_init, sigma_init, beta)?;
    let mut mu = mu_init.to_vec();
    let mut sigma = sigma_init.clone();
    let mut converged = false;
    let mut reverted = false;
    let mut iterations = 0;
    while iterations < options.max_iters {
        let weights = dpd_weights(rows, &mu, &sigma, beta)?;
        let mu_next = update_mean(rows, &weights)?;
        let raw = match update_cov(rows, &weights, &mu_next, &sigma, beta, n_j) {
            Ok(s) => s,
            Err(Error::NonPositiveDenominator { .. }) => weighted_scatter(rows, &weights, &mu_next)?,
            Err(e) => return Err(e),
        };
        let sigma_next = floor_eigenvalues(&raw, spec.c1)?;
        iterations += 1;

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_INNER_HALVINGS {
            let mu_t: Vec<f64> = mu.iter().zip(&mu_next).map(|(a, b)| a + t * (b - a)).collect();
            let sigma_t = sigma.lerp(&sigma_next, t);
            if let Ok(v) = component_objective(rows, &mu_t, &sigma_t, beta) {
                if v >= value {
                    accepted = Some((mu_t, sigma_t, v));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((mu_t, sigma_t, v)) = accepted else {
            reverted = true;
            break;
        };
        if t < 1.0 {
            reverted = true;
        }
        let change = relative_change(&mu, &mu_t, &sigma, &sigma_t);
        mu = mu_t;
        sigma = sigma_t;
        value = v;
        if change < options.tol {
            converged = true;
            break;
        }
    }
    Ok(ComponentStep { mean: mu, cov: sigma, iterations, converged, reverted })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn as_rows(v: &[Vec<f64>]) -> Vec<&[f64]> {
        v.iter().map(Vec::as_slice).collect()
    }

    #[test]
    fn proportions() {
        let a = Assignment { labels: vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1] };
        assert_eq!(update_proportions(&a, 10, 2), vec![0.5, 0.5]);
        let a = Assignment { labels: vec![0, 0, 0, 1, 1, 1, 1, 1, 1, 1] };
        assert_eq!(update_proportions(&a, 10, 2), vec![0.3, 0.7]);
        let a = Assignment { labels: vec![0; 10] };
        assert_eq!(update_proportions(&a, 10, 2), vec![1.0, 0.0]);
    }

    #[test]
    fn weights_limits() {
        let data = vec![vec![0.0], vec![1.0], vec![-4.0]];
        let rows = as_rows(&data);
        let s = SymMatrix::identity(1);
        let w = dpd_weights(&rows, &[0.0], &s, 1e-10).unwrap();
        assert!(w.iter().all(|x| (x - 1.0).abs() < 1e-8));
        let w = dpd_weights(&rows[..1], &[0.0], &s, 0.5).unwrap();
        assert!((w[0] - 0.631_618_777_746_064_7).abs() < 1e-14);
        let near = dpd_weights(&[&[1.0][..]], &[0.0], &s, 0.2).unwrap()[0];
        let far = dpd_weights(&[&[10.0][..]], &[0.0], &s, 0.2).unwrap()[0];
        assert!(far < near);
    }

    #[test]
    fn mean_updates() {
        let data = vec![vec![2.0, -1.0]];
        assert_eq!(update_mean(&as_rows(&data), &[0.7]).unwrap(), vec![2.0, -1.0]);
        let data = vec![vec![1.0], vec![2.0], vec![6.0]];
        assert_eq!(update_mean(&as_rows(&data), &[1.0; 3]).unwrap(), vec![3.0]);
        let data = vec![vec![-1.5], vec![1.5], vec![-0.2], vec![0.2]];
        let rows = as_rows(&data);
        let w = dpd_weights(&rows, &[0.0], &SymMatrix::diagonal(&[2.0]), 0.4).unwrap();
        assert!(update_mean(&rows, &w).unwrap()[0].abs() < 1e-15);
        assert_eq!(update_mean(&rows, &[0.0; 4]).unwrap_err(), Error::DegenerateCluster);
    }

    #[test]
    fn covariance_small_beta_is_sample_covariance() {
        let data = vec![vec![1.0, 0.0], vec![-1.0, 0.5], vec![0.5, 2.0], vec![0.0, -1.0]];
        let rows = as_rows(&data);
        let beta = 1e-10;
        let w = dpd_weights(&rows, &[0.1, 0.2], &SymMatrix::identity(2), beta).unwrap();
        let mu = update_mean(&rows, &w).unwrap();
        let s = update_cov(&rows, &w, &mu, &SymMatrix::identity(2), beta, rows.len()).unwrap();
        let d = crate::dataset::Dataset::from_rows(&data, "t").unwrap();
        let sample = d.covariance();
        for (a, b) in s.as_slice().iter().zip(&sample) {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-3));
        }
    }

    #[test]
    fn singleton_denominator_nonpositive_or_singular() {
        let data = vec![vec![0.5, 0.5]];
        let rows = as_rows(&data);
        let sigma = SymMatrix::identity(2);
        let w = dpd_weights(&rows, &[0.0, 0.0], &sigma, 0.5).unwrap();
        let mu = update_mean(&rows, &w).unwrap();
        match update_cov(&rows, &w, &mu, &sigma, 0.5, 1) {
            Ok(s) => assert!(s.frobenius_norm() == 0.0),
            Err(e) => assert!(matches!(e, Error::NonPositiveDenominator { .. })),
        }
    }

    #[test]
    fn fixed_point_is_stationary() {
        // Symmetric data around 0; iterate to the fixed point, then one more step is a no-op.
        let data: Vec<Vec<f64>> = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0].iter().map(|v| vec![*v]).collect();
        let rows = as_rows(&data);
        let spec = ConstraintSpec::new(1e6, 1e-9).unwrap();
        let opts = InnerOptions { max_iters: 500, tol: 1e-14 };
        let first = m_step_component(&rows, &[0.0], &SymMatrix::identity(1), 0.3, &spec, opts).unwrap();
        assert!(first.converged);
        let again = m_step_component(&rows, &first.mean, &first.cov, 0.3, &spec, InnerOptions::default()).unwrap();
        assert!((again.mean[0] - first.mean[0]).abs() < 1e-12);
        assert!((again.cov.get(0, 0) - first.cov.get(0, 0)).abs() < 1e-10);
    }
}
