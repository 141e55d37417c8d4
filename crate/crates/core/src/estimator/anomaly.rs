use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::FitResult;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::cholesky;

/// Flags rows whose squared Mahalanobis distance to their assigned component
/// exceeds the `1 - alpha` chi-square quantile with `p` degrees of freedom.
pub fn flag_anomalies(data: &Dataset, fit: &FitResult, alpha: f64) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgs(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if fit.labels.len() != data.n() {
        return Err(Error::DimensionMismatch { expected: data.n(), found: fit.labels.len() });
    }
    if alpha == 0.0 {
        return Ok(vec![false; data.n()]);
    }
    let chi = ChiSquared::new(data.p() as f64).map_err(|e| Error::InvalidArgs(e.to_string()))?;
    let cutoff = chi.inverse_cdf(1.0 - alpha);
    let factors = fit.params.covariances.iter().map(cholesky).collect::<Result<Vec<_>>>()?;
    Ok(data
        .rows()
        .zip(&fit.labels.labels)
        .map(|(x, &j)| {
            let diff: Vec<f64> = x.iter().zip(&fit.params.means[j]).map(|(a, b)| a - b).collect();
            factors[j].mahalanobis_sq(&diff) > cutoff
        })
        .collect())
}
