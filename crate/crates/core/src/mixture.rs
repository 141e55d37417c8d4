//! Mixture parameters, normal densities and the pseudo beta-likelihood.
//!
//! The objective for a sample `x_1..x_n` and parameter `theta` is
//!
//! ```text
//! L(theta) = (1/n) sum_i [ log pi_j(i) + phi(x_i; mu_j(i), S_j(i))^beta / beta
//!                          - int phi^(1+beta) / (1 + beta) ]
//! ```
//!
//! where `j(i)` is the component with the largest discriminant
//! `pi_j phi(x_i; mu_j, S_j)`. Discriminants are compared on the log scale,
//! zero-weight components never win, and ties go to the lowest index.

use std::f64::consts::PI;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, Cholesky, SymMatrix};
use crate::rng::seeded_rng;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Full parameter of a `k`-component, `p`-dimensional normal mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub covariances: Vec<SymMatrix>,
}

impl ModelParams {
    pub fn new(weights: Vec<f64>, means: Vec<Vec<f64>>, covariances: Vec<SymMatrix>) -> Result<Self> {
        let params = Self { weights, means, covariances };
        params.validate()?;
        Ok(params)
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn p(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.weights.len();
        if k == 0 {
            return Err(Error::InvalidArgs("mixture needs at least one component".into()));
        }
        if self.means.len() != k || self.covariances.len() != k {
            return Err(Error::DimensionMismatch { expected: k, found: self.means.len().min(self.covariances.len()) });
        }
        let p = self.p();
        if p == 0 {
            return Err(Error::InvalidArgs("dimension must be at least 1".into()));
        }
        if let Some(w) = self.weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidArgs(format!("weight {w} outside [0, 1]")));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidArgs(format!("weights sum to {total}, not 1")));
        }
        for (mu, sigma) in self.means.iter().zip(&self.covariances) {
            if mu.len() != p {
                return Err(Error::DimensionMismatch { expected: p, found: mu.len() });
            }
            if sigma.dim() != p {
                return Err(Error::DimensionMismatch { expected: p, found: sigma.dim() });
            }
            if mu.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgs("non-finite mean".into()));
            }
            cholesky(sigma)?;
        }
        Ok(())
    }

    /// Reorders components so that new component `i` is old component `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            weights: perm.iter().map(|&j| self.weights[j]).collect(),
            means: perm.iter().map(|&j| self.means[j].clone()).collect(),
            covariances: perm.iter().map(|&j| self.covariances[j].clone()).collect(),
        }
    }

    /// Draws `n` rows; also returns the generating component of each row.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<(Dataset, Vec<usize>)> {
        let factors = self.covariances.iter().map(cholesky).collect::<Result<Vec<_>>>()?;
        let picker = WeightedIndex::new(&self.weights).map_err(|e| Error::InvalidArgs(format!("weights: {e}")))?;
        let p = self.p();
        let mut values = Vec::with_capacity(n * p);
        let mut labels = Vec::with_capacity(n);
        let mut z = vec![0.0; p];
        for _ in 0..n {
            let j = picker.sample(rng);
            for zi in z.iter_mut() {
                *zi = StandardNormal.sample(rng);
            }
            let shifted = factors[j].apply_lower(&z);
            values.extend(shifted.iter().zip(&self.means[j]).map(|(a, b)| a + b));
            labels.push(j);
        }
        Ok((Dataset::new(p, values, "simulated")?, labels))
    }
}

/// Hard component labels, zero-based internally.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub labels: Vec<usize>,
}

impl Assignment {
    pub fn counts(&self, k: usize) -> Vec<usize> {
        let mut c = vec![0; k];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Per-component quantities reused across many density evaluations.
#[derive(Debug, Clone)]
pub(crate) struct ComponentEval {
    pub chol: Cholesky,
    pub log_norm: f64,
    pub log_weight: f64,
    pub logdet: f64,
}

impl ComponentEval {
    pub fn new(weight: f64, sigma: &SymMatrix) -> Result<Self> {
        let chol = cholesky(sigma)?;
        let logdet = chol.logdet();
        let p = sigma.dim() as f64;
        Ok(Self {
            log_norm: -0.5 * (p * LN_2PI + logdet),
            log_weight: if weight > 0.0 { weight.ln() } else { f64::NEG_INFINITY },
            chol,
            logdet,
        })
    }

    #[inline]
    pub fn log_pdf(&self, x: &[f64], mu: &[f64]) -> f64 {
        let diff: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
        self.log_norm - 0.5 * self.chol.mahalanobis_sq(&diff)
    }
}

/// Cached evaluator for a whole parameter vector.
#[derive(Debug, Clone)]
pub(crate) struct MixtureEval<'a> {
    pub params: &'a ModelParams,
    pub comps: Vec<ComponentEval>,
}

impl<'a> MixtureEval<'a> {
    pub fn new(params: &'a ModelParams) -> Result<Self> {
        let comps = params
            .weights
            .iter()
            .zip(&params.covariances)
            .map(|(w, s)| ComponentEval::new(*w, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { params, comps })
    }

    pub fn log_pdf(&self, j: usize, x: &[f64]) -> f64 {
        self.comps[j].log_pdf(x, &self.params.means[j])
    }

    /// Winning component and its log density. Zero-weight components are skipped.
    pub fn best(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (usize::MAX, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (j, c) in self.comps.iter().enumerate() {
            if c.log_weight == f64::NEG_INFINITY {
                continue;
            }
            let lp = c.log_pdf(x, &self.params.means[j]);
            let score = c.log_weight + lp;
            if best.0 == usize::MAX || score > best.1 {
                best = (j, score, lp);
            }
        }
        (best.0, best.2)
    }

    pub fn dpd_integral(&self, j: usize, beta: f64) -> f64 {
        dpd_integral_from_logdet(self.comps[j].logdet, beta, self.params.p())
    }
}

pub(crate) fn check_dims(x: &[f64], mu: &[f64], sigma: &SymMatrix) -> Result<()> {
    if x.len() != sigma.dim() || mu.len() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), found: x.len().min(mu.len()) });
    }
    Ok(())
}

pub fn log_mvn_pdf(x: &[f64], mu: &[f64], sigma: &SymMatrix) -> Result<f64> {
    check_dims(x, mu, sigma)?;
    Ok(ComponentEval::new(1.0, sigma)?.log_pdf(x, mu))
}

/// Multivariate normal density, evaluated through the Cholesky factor of `sigma`.
pub fn mvn_pdf(x: &[f64], mu: &[f64], sigma: &SymMatrix) -> Result<f64> {
    Ok(log_mvn_pdf(x, mu, sigma)?.exp())
}

/// `mvn_pdf(x, mu, sigma)^beta`, formed on the log scale.
pub fn power_density(x: &[f64], mu: &[f64], sigma: &SymMatrix, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok((beta * log_mvn_pdf(x, mu, sigma)?).exp())
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgs(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

pub(crate) fn dpd_integral_from_logdet(logdet: f64, beta: f64, p: usize) -> f64 {
    let p = p as f64;
    (-0.5 * p * beta * LN_2PI - 0.5 * beta * logdet - 0.5 * p * (1.0 + beta).ln()).exp()
}

/// Closed form of `int phi(x; mu, sigma)^(1+beta) dx`; independent of the mean.
pub fn dpd_integral(sigma: &SymMatrix, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let logdet = cholesky(sigma)?.logdet();
    Ok(dpd_integral_from_logdet(logdet, beta, sigma.dim()))
}

/// `pi_j * phi(x; mu_j, sigma_j)` for every component.
pub fn discriminants(x: &[f64], theta: &ModelParams) -> Result<Vec<f64>> {
    if x.len() != theta.p() {
        return Err(Error::DimensionMismatch { expected: theta.p(), found: x.len() });
    }
    let eval = MixtureEval::new(theta)?;
    Ok((0..theta.k())
        .map(|j| {
            let w = theta.weights[j];
            if w == 0.0 {
                0.0
            } else {
                w * eval.log_pdf(j, x).exp()
            }
        })
        .collect())
}

/// Mixture density `sum_j pi_j phi(x; mu_j, sigma_j)`.
pub fn mixture_pdf(x: &[f64], theta: &ModelParams) -> Result<f64> {
    Ok(discriminants(x, theta)?.iter().sum())
}

fn check_data(data: &Dataset, theta: &ModelParams) -> Result<()> {
    if data.p() != theta.p() {
        return Err(Error::DimensionMismatch { expected: theta.p(), found: data.p() });
    }
    Ok(())
}

/// Labels every row with its largest-discriminant component.
pub fn assign(data: &Dataset, theta: &ModelParams) -> Result<Assignment> {
    check_data(data, theta)?;
    let eval = MixtureEval::new(theta)?;
    let labels = data
        .rows()
        .enumerate()
        .map(|(i, x)| {
            let (j, _) = eval.best(x);
            if j == usize::MAX {
                Err(Error::AllZeroDiscriminants { row: i })
            } else {
                Ok(j)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Assignment { labels })
}

/// Objective value together with the labels it was evaluated at.
#[derive(Debug, Clone)]
pub(crate) struct ObjectiveEval {
    /// Objective minus the constant `1/beta`. Exactly order-equivalent to the
    /// full objective but free of the `1/beta` cancellation for small beta.
    pub centered: f64,
    pub labels: Vec<usize>,
}

impl ObjectiveEval {
    pub fn value(&self, beta: f64) -> f64 {
        self.centered + 1.0 / beta
    }
}

#[inline]
pub(crate) fn centered_power_term(log_phi: f64, beta: f64) -> f64 {
    (beta * log_phi).exp_m1() / beta
}

pub(crate) fn evaluate_objective(data: &Dataset, theta: &ModelParams, beta: f64) -> Result<ObjectiveEval> {
    check_beta(beta)?;
    check_data(data, theta)?;
    let eval = MixtureEval::new(theta)?;
    let integrals: Vec<f64> = (0..theta.k()).map(|j| eval.dpd_integral(j, beta) / (1.0 + beta)).collect();
    let mut total = 0.0;
    let mut labels = Vec::with_capacity(data.n());
    for (i, x) in data.rows().enumerate() {
        let (j, log_phi) = eval.best(x);
        if j == usize::MAX {
            return Err(Error::AllZeroDiscriminants { row: i });
        }
        total += eval.comps[j].log_weight + centered_power_term(log_phi, beta) - integrals[j];
        labels.push(j);
    }
    Ok(ObjectiveEval { centered: total / data.n() as f64, labels })
}

/// Empirical pseudo beta-likelihood of `theta` on `data`.
pub fn pseudo_beta_likelihood(data: &Dataset, theta: &ModelParams, beta: f64) -> Result<f64> {
    Ok(evaluate_objective(data, theta, beta)?.value(beta))
}

/// The same decomposition evaluated at caller-supplied labels instead of the
/// argmax assignment. Returns `-inf` if a label points at a zero-weight component.
pub fn fixed_label_objective(data: &Dataset, theta: &ModelParams, labels: &[usize], beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_data(data, theta)?;
    if labels.len() != data.n() {
        return Err(Error::DimensionMismatch { expected: data.n(), found: labels.len() });
    }
    let eval = MixtureEval::new(theta)?;
    let mut total = 0.0;
    for (x, &j) in data.rows().zip(labels) {
        if j >= theta.k() {
            return Err(Error::InvalidArgs(format!("label {j} out of range")));
        }
        let log_phi = eval.log_pdf(j, x);
        total +=
            eval.comps[j].log_weight + centered_power_term(log_phi, beta) - eval.dpd_integral(j, beta) / (1.0 + beta);
    }
    Ok(total / data.n() as f64 + 1.0 / beta)
}

/// Monte-Carlo estimate of the population objective under `truth`,
/// deterministic for a given seed.
pub fn population_objective(
    theta: &ModelParams,
    truth: &ModelParams,
    beta: f64,
    mc_draws: usize,
    seed: u64,
) -> Result<f64> {
    if mc_draws == 0 {
        return Err(Error::InvalidArgs("mc_draws must be at least 1".into()));
    }
    truth.validate()?;
    let mut rng = seeded_rng(seed);
    let (sample, _) = truth.sample(mc_draws, &mut rng)?;
    pseudo_beta_likelihood(&sample, theta, beta)
}

/// Standard normal density, handy for one-dimensional checks.
pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}
