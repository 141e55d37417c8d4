//! Randomised check of the three elementary bounds that hold on the
//! constrained parameter set: determinant sandwich, Mahalanobis lower bound
//! and the lower bound on the normalising integral.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constraints::eigen_summary;
use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, SymMatrix};
use crate::mixture::dpd_integral;
use crate::rng::seeded_rng;

/// Relative slack granted to every inequality.
pub const INEQUALITY_SLACK: f64 = 1e-10;
const DIMENSIONS: [usize; 4] = [1, 2, 3, 5];
const MAX_EXAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub trials: usize,
    /// Individual component checks performed per inequality.
    pub checks: usize,
    /// `m^p <= |Sigma| <= M^p`.
    pub determinant_violations: usize,
    /// `(x-mu)' Sigma^-1 (x-mu) >= |x-mu|^2 / M`.
    pub mahalanobis_violations: usize,
    /// `I/(1+beta) >= (2 pi)^(-p beta/2) M^(-p beta/2) (1+beta)^(-(p+2)/2)`.
    pub integral_violations: usize,
    pub examples: Vec<String>,
}

impl InequalityReport {
    pub fn total_violations(&self) -> usize {
        self.determinant_violations + self.mahalanobis_violations + self.integral_violations
    }
}

/// A random symmetric positive-definite matrix with prescribed eigenvalues.
pub fn random_spd_with_eigenvalues<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> Result<SymMatrix> {
    let p = values.len();
    let mut raw = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let v: f64 = rng.sample(StandardNormal);
            raw[i * p + j] = v;
            raw[j * p + i] = v;
        }
    }
    let basis = sym_eigen(&SymMatrix::new(p, raw)?)?;
    Ok(basis.compose(values))
}

fn below(lhs: f64, rhs: f64) -> bool {
    lhs < rhs - INEQUALITY_SLACK * rhs.abs().max(1.0)
}

/// Runs `trials` random configurations cycling through p in {1, 2, 3, 5}.
pub fn lemma_inequality_suite(trials: usize, seed: u64) -> Result<InequalityReport> {
    if trials == 0 {
        return Err(Error::InvalidArgs("trials must be at least 1".into()));
    }
    let mut rng = seeded_rng(seed);
    let mut report = InequalityReport {
        trials,
        checks: 0,
        determinant_violations: 0,
        mahalanobis_violations: 0,
        integral_violations: 0,
        examples: Vec::new(),
    };
    for trial in 0..trials {
        let p = DIMENSIONS[trial % DIMENSIONS.len()];
        let pf = p as f64;
        let k = rng.random_range(1..=4);
        let beta = rng.random_range(0.01..3.0);
        let c = if rng.random_bool(0.1) { 1.0 } else { rng.random_range(1.0..100.0) };
        let c1 = 10f64.powf(rng.random_range(-3.0..1.0));
        let base = c1 * rng.random_range(1.0..3.0);
        let covs = (0..k)
            .map(|_| {
                let values: Vec<f64> = (0..p).map(|_| base * rng.random_range(1.0..=c)).collect();
                random_spd_with_eigenvalues(&values, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        let summary = eigen_summary(&covs)?;
        let (big, small) = (summary.max, summary.min);

        for (j, sigma) in covs.iter().enumerate() {
            report.checks += 1;
            let note = |report: &mut InequalityReport, what: &str| {
                if report.examples.len() < MAX_EXAMPLES {
                    report.examples.push(format!("trial {trial} component {j} (p={p}, beta={beta:.4}): {what}"));
                }
            };

            let chol = sigma.cholesky()?;
            let logdet = chol.logdet();
            if below(logdet, pf * small.ln()) || below(pf * big.ln(), logdet) {
                report.determinant_violations += 1;
                note(&mut report, "determinant bound");
            }

            let diff: Vec<f64> = (0..p).map(|_| rng.random_range(-5.0..5.0) * big.sqrt()).collect();
            let quad = chol.mahalanobis_sq(&diff);
            let norm_sq: f64 = diff.iter().map(|d| d * d).sum();
            if below(quad, norm_sq / big) {
                report.mahalanobis_violations += 1;
                note(&mut report, "mahalanobis bound");
            }

            let lhs = dpd_integral(sigma, beta)? / (1.0 + beta);
            let rhs = (2.0 * std::f64::consts::PI * big).powf(-pf * beta / 2.0) * (1.0 + beta).powf(-(pf + 2.0) / 2.0);
            if lhs < rhs * (1.0 - INEQUALITY_SLACK) {
                report.integral_violations += 1;
                note(&mut report, "integral bound");
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prescribed_spectrum() {
        let mut rng = seeded_rng(4);
        let s = random_spd_with_eigenvalues(&[4.0, 2.0, 0.5], &mut rng).unwrap();
        let d = sym_eigen(&s).unwrap();
        for (a, b) in d.eigenvalues.iter().zip([4.0, 2.0, 0.5]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn small_suite_is_clean() {
        let r = lemma_inequality_suite(40, 1).unwrap();
        assert_eq!(r.total_violations(), 0, "{:?}", r.examples);
        assert!(r.checks >= 40);
    }
}
