//! Simulation study of estimator error as the sample size grows.
//!
//! The classification objective is maximised in the population by a parameter
//! that need not equal the generating mixture: hard assignment truncates the
//! component tails, and for overlapping components the maximiser can even
//! leave a component with zero weight. Errors are therefore measured against
//! the population maximiser, approximated by the better of a multi-start fit
//! and a truth-started fit on one very large sample, and also reported against the
//! truth itself. Fits use nested starts so emptied components are reachable.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assumption::{assumption1_report, Assumption1Report};
use super::matching::matched_parameter_error;
use crate::error::{Error, Result};
use crate::estimator::{cem_fit, multi_start_fit, EstimatorConfig};
use crate::mixture::ModelParams;
use crate::rng::seeded_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyPlan {
    pub n_grid: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Size of the sample used to approximate the population maximiser;
    /// zero measures errors against the truth only.
    pub reference_n: usize,
    pub reference_seed: u64,
}

impl ConsistencyPlan {
    pub fn new(n_grid: Vec<usize>, seeds: Vec<u64>) -> Self {
        Self { n_grid, seeds, reference_n: 50_000, reference_seed: 0x5eed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub n: usize,
    /// Error against the population maximiser per seed; `None` if the fit failed.
    pub errors: Vec<Option<f64>>,
    pub errors_vs_truth: Vec<Option<f64>>,
    pub median: f64,
    pub lower_quartile: f64,
    pub upper_quartile: f64,
    pub median_vs_truth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyTable {
    pub beta: f64,
    pub truth: ModelParams,
    pub reference: ModelParams,
    pub assumption: Assumption1Report,
    pub rows: Vec<ConsistencyRow>,
}

impl ConsistencyTable {
    pub fn row(&self, n: usize) -> Option<&ConsistencyRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// Linear-interpolation quantile of the finite values; NaN when there are none.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

fn cell_seed(seed: u64, n: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (n as u64)
}

/// Population maximiser approximated on `plan.reference_n` draws.
pub fn population_reference(
    truth: &ModelParams,
    config: &EstimatorConfig,
    plan: &ConsistencyPlan,
) -> Result<ModelParams> {
    if plan.reference_n == 0 {
        return Ok(truth.clone());
    }
    let (sample, _) = truth.sample(plan.reference_n, &mut seeded_rng(plan.reference_seed))?;
    let truth_started = cem_fit(&sample, config, truth)?;
    let mut cfg = config.clone();
    cfg.seed = plan.reference_seed;
    cfg.nested_starts = true;
    let searched = multi_start_fit(&sample, &cfg)?;
    let best = if searched.final_objective() > truth_started.final_objective() { searched } else { truth_started };
    Ok(best.params)
}

pub fn consistency_experiment(
    truth: &ModelParams,
    beta: f64,
    plan: &ConsistencyPlan,
    config: &EstimatorConfig,
) -> Result<ConsistencyTable> {
    truth.validate()?;
    if plan.n_grid.is_empty() || plan.seeds.is_empty() {
        return Err(Error::InvalidArgs("n_grid and seeds must be non-empty".into()));
    }
    let mut config = config.clone();
    config.beta = beta;
    config.k = truth.k();
    // Consistency concerns the global maximiser, so search it fully.
    config.nested_starts = true;
    config.validate()?;

    let assumption = assumption1_report(&truth.weights, beta, truth.p(), 1e-12)?;
    let reference = population_reference(truth, &config, plan)?;

    let cells: Vec<(usize, u64)> = plan.n_grid.iter().flat_map(|&n| plan.seeds.iter().map(move |&s| (n, s))).collect();
    let outcomes: Vec<Option<(f64, f64)>> = cells
        .par_iter()
        .map(|&(n, seed)| {
            let s = cell_seed(seed, n);
            let (data, _) = truth.sample(n, &mut seeded_rng(s)).ok()?;
            let mut cfg = config.clone();
            cfg.seed = s;
            let fit = multi_start_fit(&data, &cfg).ok()?;
            Some((
                matched_parameter_error(&fit.params, &reference).ok()?,
                matched_parameter_error(&fit.params, truth).ok()?,
            ))
        })
        .collect();

    let per_n = plan.seeds.len();
    let rows = plan
        .n_grid
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let chunk = &outcomes[i * per_n..(i + 1) * per_n];
            let errors: Vec<Option<f64>> = chunk.iter().map(|o| o.map(|v| v.0)).collect();
            let errors_vs_truth: Vec<Option<f64>> = chunk.iter().map(|o| o.map(|v| v.1)).collect();
            let finite: Vec<f64> = errors.iter().flatten().copied().collect();
            let finite_truth: Vec<f64> = errors_vs_truth.iter().flatten().copied().collect();
            ConsistencyRow {
                n,
                median: quantile(&finite, 0.5),
                lower_quartile: quantile(&finite, 0.25),
                upper_quartile: quantile(&finite, 0.75),
                median_vs_truth: quantile(&finite_truth, 0.5),
                errors,
                errors_vs_truth,
            }
        })
        .collect();

    Ok(ConsistencyTable { beta, truth: truth.clone(), reference, assumption, rows })
}
