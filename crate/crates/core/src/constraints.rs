//! Eigenvalue-ratio and non-singularity constraints on the component covariances.
//!
//! With `M` and `m` the largest and smallest eigenvalues over *all* components,
//! the feasible set requires `M / m <= c` and `m >= c1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, EigenDecomp, SymMatrix};

const FEASIBILITY_SLACK: f64 = 1e-10;

/// The pair `(c, c1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    /// Upper bound on the global eigenvalue ratio.
    pub c: f64,
    /// Floor on the global smallest eigenvalue.
    pub c1: f64,
}

impl ConstraintSpec {
    pub fn new(c: f64, c1: f64) -> Result<Self> {
        if !(c >= 1.0) || !c.is_finite() {
            return Err(Error::InvalidArgs(format!("c must be >= 1, got {c}")));
        }
        if !(c1 > 0.0) || !c1.is_finite() {
            return Err(Error::InvalidArgs(format!("c1 must be > 0, got {c1}")));
        }
        Ok(Self { c, c1 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary {
    /// Eigenvalues of each component, descending.
    pub eigenvalues: Vec<Vec<f64>>,
    pub max: f64,
    pub min: f64,
}

impl EigenSummary {
    pub fn ratio(&self) -> f64 {
        self.max / self.min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub summary: EigenSummary,
    pub feasible: bool,
}

fn decompose_all(covs: &[SymMatrix]) -> Result<Vec<EigenDecomp>> {
    covs.iter().map(sym_eigen).collect()
}

fn summarize(decomps: &[EigenDecomp]) -> EigenSummary {
    let eigenvalues: Vec<Vec<f64>> = decomps.iter().map(|d| d.eigenvalues.clone()).collect();
    let max = eigenvalues.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eigenvalues.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    EigenSummary { eigenvalues, max, min }
}

fn is_feasible(summary: &EigenSummary, spec: &ConstraintSpec) -> bool {
    summary.min > 0.0
        && summary.max / summary.min <= spec.c * (1.0 + FEASIBILITY_SLACK)
        && summary.min >= spec.c1 * (1.0 - FEASIBILITY_SLACK)
}

pub fn eigen_summary(covs: &[SymMatrix]) -> Result<EigenSummary> {
    Ok(summarize(&decompose_all(covs)?))
}

/// Reports the global eigenvalue extremes and whether `covs` lies in the feasible set.
pub fn check_constraints(covs: &[SymMatrix], spec: &ConstraintSpec) -> Result<ConstraintCheck> {
    let summary = eigen_summary(covs)?;
    let feasible = is_feasible(&summary, spec);
    Ok(ConstraintCheck { summary, feasible })
}

/// Lifts every eigenvalue into `[t, c t]` with `t = max(c1, m, M / c)` and
/// rebuilds each matrix on its own eigenvectors. Feasible input is returned as is.
pub fn project_eigenvalues(covs: &[SymMatrix], spec: &ConstraintSpec) -> Result<Vec<SymMatrix>> {
    if covs.is_empty() {
        return Ok(Vec::new());
    }
    let decomps = decompose_all(covs)?;
    let summary = summarize(&decomps);
    if is_feasible(&summary, spec) {
        return Ok(covs.to_vec());
    }
    let floor = spec.c1.max(summary.min).max(summary.max / spec.c);
    let ceiling = spec.c * floor;
    Ok(decomps
        .iter()
        .map(|d| {
            let clipped: Vec<f64> = d.eigenvalues.iter().map(|&l| l.clamp(floor, ceiling)).collect();
            d.compose(&clipped)
        })
        .collect())
}

/// Raises eigenvalues of a single matrix to at least `floor`.
pub(crate) fn floor_eigenvalues(sigma: &SymMatrix, floor: f64) -> Result<SymMatrix> {
    let d = sym_eigen(sigma)?;
    if d.min_eigenvalue() >= floor {
        return Ok(sigma.clone());
    }
    let lifted: Vec<f64> = d.eigenvalues.iter().map(|&l| l.max(floor)).collect();
    Ok(d.compose(&lifted))
}
