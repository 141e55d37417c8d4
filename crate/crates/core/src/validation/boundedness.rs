//! Monitors that fitted parameters stay in a bounded region determined by the data.

use serde::{Deserialize, Serialize};

use crate::constraints::{check_constraints, ConstraintSpec};
use crate::dataset::Dataset;
use crate::error::Result;
use crate::mixture::ModelParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    /// Largest distance of a mean coordinate outside the data bounding box,
    /// in units of that coordinate's range. Zero when every mean is inside.
    pub mean_excess: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Largest eigenvalue over the total variance of the data.
    pub eigenvalue_to_variance: f64,
    pub feasible: bool,
}

impl BoundednessReport {
    /// Means within `margin` ranges of the data box, eigenvalues positive and
    /// at most `variance_factor` times the total data variance.
    pub fn within(&self, margin: f64, variance_factor: f64) -> bool {
        self.feasible
            && self.mean_excess <= margin
            && self.min_eigenvalue > 0.0
            && self.eigenvalue_to_variance <= variance_factor
    }
}

pub fn boundedness_check(data: &Dataset, params: &ModelParams, spec: &ConstraintSpec) -> Result<BoundednessReport> {
    let bounds = data.bounds();
    let mut mean_excess: f64 = 0.0;
    for mu in &params.means {
        for (v, (lo, hi)) in mu.iter().zip(&bounds) {
            let range = (hi - lo).max(f64::MIN_POSITIVE);
            let outside = (lo - v).max(v - hi).max(0.0);
            mean_excess = mean_excess.max(outside / range);
        }
    }
    let check = check_constraints(&params.covariances, spec)?;
    let p = data.p();
    let cov = data.covariance();
    let total_variance: f64 = (0..p).map(|i| cov[i * p + i]).sum::<f64>().max(spec.c1);
    Ok(BoundednessReport {
        mean_excess,
        min_eigenvalue: check.summary.min,
        max_eigenvalue: check.summary.max,
        eigenvalue_to_variance: check.summary.max / total_variance,
        feasible: check.feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;

    #[test]
    fn detects_escaped_mean() {
        let data = Dataset::from_rows(&[[0.0], [1.0], [2.0]], "t").unwrap();
        let spec = ConstraintSpec::new(10.0, 1e-3).unwrap();
        let inside = ModelParams::new(vec![1.0], vec![vec![1.5]], vec![SymMatrix::identity(1)]).unwrap();
        let r = boundedness_check(&data, &inside, &spec).unwrap();
        assert_eq!(r.mean_excess, 0.0);
        assert!(r.within(0.0, 10.0));
        let outside = ModelParams::new(vec![1.0], vec![vec![6.0]], vec![SymMatrix::identity(1)]).unwrap();
        let r = boundedness_check(&data, &outside, &spec).unwrap();
        assert!((r.mean_excess - 2.0).abs() < 1e-12);
        assert!(!r.within(1.0, 10.0));
    }
}
