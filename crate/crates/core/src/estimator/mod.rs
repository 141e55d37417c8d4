//! Fitting: the constrained classification-EM maximiser of the pseudo
//! beta-likelihood, its multi-start driver, an EM maximum-likelihood
//! baseline and anomaly flagging.

mod anomaly;
mod cem;
mod em;
mod init;
pub mod mstep;

use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSpec;
use crate::error::{Error, Result};
use crate::mixture::{Assignment, ModelParams};

pub use anomaly::flag_anomalies;
#[cfg(test)]
pub(crate) use cem::pad_with_empty;
pub use cem::{cem_fit, multi_start_fit};
pub use em::{em_mle_fit, EmConfig, EmVariant};
pub use init::initial_params;
pub use mstep::{
    component_objective, dpd_weights, m_step_component, update_cov, update_mean, update_proportions, ComponentStep,
    InnerOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// `k` distinct random rows as means, pooled diagonal covariance, equal weights.
    #[default]
    RandomRows,
    /// Nearest-seed partition of the rows, then coordinate-wise median and MAD per cell.
    MedianMad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub beta: f64,
    pub k: usize,
    pub constraints: ConstraintSpec,
    pub max_outer_iters: usize,
    /// Stop once the objective moves by less than `outer_tol * max(1, |L|)`.
    pub outer_tol: f64,
    pub inner_fixedpoint_iters: usize,
    pub inner_tol: f64,
    pub n_starts: usize,
    pub seed: u64,
    pub init_mode: InitMode,
    /// Also start from padded fits with fewer components. Off by default: the
    /// global maximiser often empties components that practical fits keep.
    pub nested_starts: bool,
}

impl EstimatorConfig {
    pub fn new(k: usize, beta: f64, constraints: ConstraintSpec) -> Self {
        Self {
            beta,
            k,
            constraints,
            max_outer_iters: 500,
            outer_tol: 1e-9,
            inner_fixedpoint_iters: 50,
            inner_tol: 1e-8,
            n_starts: 20,
            seed: 42,
            init_mode: InitMode::RandomRows,
            nested_starts: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidArgs(format!("beta must be positive, got {}", self.beta)));
        }
        if self.k == 0 {
            return Err(Error::InvalidArgs("k must be at least 1".into()));
        }
        if self.max_outer_iters == 0 || self.inner_fixedpoint_iters == 0 || self.n_starts == 0 {
            return Err(Error::InvalidArgs("iteration caps and start count must be positive".into()));
        }
        if !(self.outer_tol > 0.0) || !(self.inner_tol > 0.0) {
            return Err(Error::InvalidArgs("tolerances must be positive".into()));
        }
        ConstraintSpec::new(self.constraints.c, self.constraints.c1)?;
        Ok(())
    }

    pub(crate) fn inner(&self) -> InnerOptions {
        InnerOptions { max_iters: self.inner_fixedpoint_iters, tol: self.inner_tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: ModelParams,
    pub labels: Assignment,
    /// Objective value at every accepted iterate, starting with the initial point.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub start_index: usize,
    pub iterations: usize,
    pub anomaly_flags: Option<Vec<bool>>,
}

impl FitResult {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds the initial value")
    }
}
