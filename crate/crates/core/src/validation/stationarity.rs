//! Finite-difference gradient of the objective with the labels held fixed,
//! used to confirm that converged fits are stationary points.

use crate::dataset::Dataset;
use crate::error::Result;
use crate::mixture::{fixed_label_objective, ModelParams};

/// Central-difference gradient with respect to every mean coordinate and every
/// upper-triangular covariance entry (off-diagonal entries move symmetrically).
/// Mean steps are `h * max(1, |mu|)`, covariance steps `h * sqrt(s_rr s_cc)`.
pub fn fixed_label_gradient(
    data: &Dataset,
    theta: &ModelParams,
    labels: &[usize],
    beta: f64,
    h: f64,
) -> Result<Vec<f64>> {
    let f = |t: &ModelParams| fixed_label_objective(data, t, labels, beta);
    let p = theta.p();
    let mut grad = Vec::new();
    for j in 0..theta.k() {
        for d in 0..p {
            let step = h * theta.means[j][d].abs().max(1.0);
            let mut plus = theta.clone();
            plus.means[j][d] += step;
            let mut minus = theta.clone();
            minus.means[j][d] -= step;
            grad.push((f(&plus)? - f(&minus)?) / (2.0 * step));
        }
        for r in 0..p {
            for c in r..p {
                let sigma = &theta.covariances[j];
                let step = h * (sigma.get(r, r) * sigma.get(c, c)).sqrt();
                let mut plus = theta.clone();
                plus.covariances[j] = plus.covariances[j].perturbed(r, c, step);
                let mut minus = theta.clone();
                minus.covariances[j] = minus.covariances[j].perturbed(r, c, -step);
                grad.push((f(&plus)? - f(&minus)?) / (2.0 * step));
            }
        }
    }
    Ok(grad)
}
