//! Sensitivity of the robust and maximum-likelihood fits to appended outliers.

use serde::{Deserialize, Serialize};

use super::matching::align_by_means;
use crate::dataset::Dataset;
use crate::error::Result;
use crate::estimator::{em_mle_fit, multi_start_fit, EmConfig, EstimatorConfig};
use crate::mixture::ModelParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodShift {
    pub clean: ModelParams,
    /// Fit on the contaminated data, relabelled to match `clean`.
    pub contaminated: ModelParams,
    /// Absolute mean change per component and coordinate.
    pub mean_shifts: Vec<Vec<f64>>,
    /// Frobenius norm of the covariance change per component.
    pub covariance_shifts: Vec<f64>,
}

impl MethodShift {
    fn new(clean: ModelParams, contaminated: &ModelParams) -> Result<Self> {
        let contaminated = align_by_means(contaminated, &clean)?;
        let mean_shifts = clean
            .means
            .iter()
            .zip(&contaminated.means)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect())
            .collect();
        let covariance_shifts =
            clean.covariances.iter().zip(&contaminated.covariances).map(|(a, b)| b.sub(a).frobenius_norm()).collect();
        Ok(Self { clean, contaminated, mean_shifts, covariance_shifts })
    }

    /// Largest coordinate-wise mean shift over all components.
    pub fn max_mean_shift(&self) -> f64 {
        self.mean_shifts.iter().flatten().copied().fold(0.0, f64::max)
    }

    pub fn max_covariance_shift(&self) -> f64 {
        self.covariance_shifts.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub beta: f64,
    pub n_clean: usize,
    pub n_contaminants: usize,
    pub robust: MethodShift,
    pub mle: MethodShift,
}

impl ExperimentReport {
    pub fn robust_is_more_stable(&self) -> bool {
        self.robust.max_mean_shift() < self.mle.max_mean_shift()
    }
}

/// Fits both estimators on `clean` and on `clean` plus `contaminants`, and
/// reports how far each fit moves.
pub fn contamination_experiment<R: AsRef<[f64]>>(
    clean: &Dataset,
    contaminants: &[R],
    beta: f64,
    config: &EstimatorConfig,
    em: &EmConfig,
) -> Result<ExperimentReport> {
    let mut config = config.clone();
    config.beta = beta;
    let dirty = clean.append_rows(contaminants, format!("{}+contaminated", clean.source()))?;

    let robust = MethodShift::new(multi_start_fit(clean, &config)?.params, &multi_start_fit(&dirty, &config)?.params)?;
    let mle = MethodShift::new(em_mle_fit(clean, em)?.params, &em_mle_fit(&dirty, em)?.params)?;
    Ok(ExperimentReport { beta, n_clean: clean.n(), n_contaminants: contaminants.len(), robust, mle })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::ConstraintSpec;
    use crate::linalg::SymMatrix;
    use crate::rng::seeded_rng;

    #[test]
    fn far_outliers_move_mle_more() {
        let truth =
            ModelParams::new(vec![0.5, 0.5], vec![vec![0.0, 0.0], vec![6.0, 0.0]], vec![SymMatrix::identity(2); 2])
                .unwrap();
        let (clean, _) = truth.sample(200, &mut seeded_rng(3)).unwrap();
        let outliers: Vec<Vec<f64>> = (0..8).map(|i| vec![3.0 + 2.0 * i as f64, 12.0 + (i % 3) as f64]).collect();
        let spec = ConstraintSpec::new(50.0, 1e-3).unwrap();
        let mut cfg = EstimatorConfig::new(2, 0.5, spec.clone());
        cfg.n_starts = 4;
        let mut em = EmConfig::new(2, spec);
        em.n_starts = 4;
        let report = contamination_experiment(&clean, &outliers, 0.5, &cfg, &em).unwrap();
        assert_eq!(report.n_contaminants, 8);
        assert!(
            report.robust_is_more_stable(),
            "{} vs {}",
            report.robust.max_mean_shift(),
            report.mle.max_mean_shift()
        );
    }
}
