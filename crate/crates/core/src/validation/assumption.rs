//! The largest-weight condition behind existence of the maximiser, and the
//! covariance inflation that makes the single-component witness objective positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assumption1Report {
    pub beta: f64,
    pub p: usize,
    pub k0: f64,
    pub threshold: f64,
    pub max_weight: f64,
    pub satisfied: bool,
    /// Smallest covariance inflation making the witness bracket non-negative,
    /// or `None` when no finite inflation exists.
    pub min_scale_inflation: Option<f64>,
}

/// `(1 + k0) beta / (1 + beta)^(1 + p/2)`.
pub fn assumption1_threshold(beta: f64, p: usize, k0: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgs(format!("beta must be positive, got {beta}")));
    }
    if !(k0 > 0.0) || !k0.is_finite() {
        return Err(Error::InvalidArgs(format!("k0 must be positive, got {k0}")));
    }
    if p == 0 {
        return Err(Error::InvalidArgs("p must be at least 1".into()));
    }
    Ok((1.0 + k0) * beta / (1.0 + beta).powf(1.0 + p as f64 / 2.0))
}

/// Checks the condition against a set of mixing weights.
pub fn assumption1_report(weights: &[f64], beta: f64, p: usize, k0: f64) -> Result<Assumption1Report> {
    let threshold = assumption1_threshold(beta, p, k0)?;
    let max_weight = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Assumption1Report {
        beta,
        p,
        k0,
        threshold,
        max_weight,
        satisfied: max_weight >= threshold,
        min_scale_inflation: min_scale_inflation(max_weight, beta, p).ok(),
    })
}

/// `pi_max - beta (1 + beta/c')^(p/2) / (1 + beta)^(1 + p/2)`; the witness
/// objective is positive exactly when this is.
pub fn scale_inflation_bracket(pi_max: f64, beta: f64, p: usize, inflation: f64) -> f64 {
    let pf = p as f64;
    pi_max - beta / (1.0 + beta).powf(1.0 + pf / 2.0) * (1.0 + beta / inflation).powf(pf / 2.0)
}

/// Smallest `c'` with a non-negative bracket:
/// `c' = beta / ((pi_max (1+beta)^((p+2)/2) / beta)^(2/p) - 1)`.
pub fn min_scale_inflation(pi_max: f64, beta: f64, p: usize) -> Result<f64> {
    if !(pi_max > 0.0 && pi_max <= 1.0) {
        return Err(Error::InvalidArgs(format!("pi_max must lie in (0, 1], got {pi_max}")));
    }
    if !(beta > 0.0) || p == 0 {
        return Err(Error::InvalidArgs("beta must be positive and p at least 1".into()));
    }
    let pf = p as f64;
    let ratio = pi_max * (1.0 + beta).powf((pf + 2.0) / 2.0) / beta;
    if ratio <= 1.0 {
        return Err(Error::Infeasible { ratio });
    }
    let denom = ratio.powf(2.0 / pf) - 1.0;
    if !(denom > 0.0) {
        return Err(Error::Infeasible { ratio });
    }
    Ok(beta / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_values() {
        let t = assumption1_threshold(0.5, 1, 1e-15).unwrap();
        assert!((t - 0.272_165_526_975_908_7).abs() < 1e-12);
        let t = assumption1_threshold(0.3, 5, 1e-15).unwrap();
        assert!((t - 0.119_762_132_813_886_5).abs() < 1e-12);
        assert!(assumption1_threshold(1e-12, 2, 0.1).unwrap() < 1e-11);
        assert!(assumption1_threshold(0.0, 1, 0.1).is_err());
        assert!(assumption1_threshold(0.5, 1, 0.0).is_err());
    }

    #[test]
    fn inflation_values() {
        let c = min_scale_inflation(0.442, 0.5, 1).unwrap();
        assert!((c - 0.305_359_548_654_158_3).abs() < 1e-12);
        assert!(scale_inflation_bracket(0.442, 0.5, 1, c).abs() < 1e-12);
    }

    #[test]
    fn boundary_and_below() {
        let boundary = 0.5 / 1.5f64.powf(1.5);
        let just_above = min_scale_inflation(boundary * (1.0 + 1e-9), 0.5, 1).unwrap();
        assert!(just_above > 1e7);
        assert!(matches!(min_scale_inflation(boundary, 0.5, 1), Err(Error::Infeasible { .. })));
        assert!(matches!(min_scale_inflation(0.1, 0.5, 1), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn report_flags_weights() {
        let r = assumption1_report(&[0.6, 0.4], 0.3, 1, 0.1).unwrap();
        assert!(r.satisfied && r.min_scale_inflation.is_some());
        let r = assumption1_report(&[0.2; 5], 2.0, 1, 0.1).unwrap();
        assert!(!r.satisfied);
    }
}
