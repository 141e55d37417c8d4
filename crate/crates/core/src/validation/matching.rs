//! Label matching between fitted and reference mixtures, by exhaustive search
//! over permutations (k is small in every experiment here).

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::mixture::ModelParams;

/// Permutation `perm` minimising `cost(perm)`, where `perm[j]` is the
/// estimate's component matched to reference component `j`. Ties keep the
/// lexicographically first permutation.
pub fn best_permutation<F: Fn(&[usize]) -> f64>(k: usize, cost: F) -> Vec<usize> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in (0..k).permutations(k) {
        let value = cost(&perm);
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, perm));
        }
    }
    best.map(|(_, p)| p).unwrap_or_default()
}

fn check_shapes(estimate: &ModelParams, reference: &ModelParams) -> Result<()> {
    if estimate.k() != reference.k() {
        return Err(Error::DimensionMismatch { expected: reference.k(), found: estimate.k() });
    }
    if estimate.p() != reference.p() {
        return Err(Error::DimensionMismatch { expected: reference.p(), found: estimate.p() });
    }
    Ok(())
}

/// Largest absolute difference over weights, mean coordinates and covariance
/// entries of matched components. Means and covariances of zero-weight
/// reference components are arbitrary and left out; their weights still count.
pub fn parameter_sup_error(estimate: &ModelParams, reference: &ModelParams, perm: &[usize]) -> f64 {
    let mut worst: f64 = 0.0;
    for (j, &e) in perm.iter().enumerate() {
        worst = worst.max((estimate.weights[e] - reference.weights[j]).abs());
        if reference.weights[j] == 0.0 {
            continue;
        }
        for (a, b) in estimate.means[e].iter().zip(&reference.means[j]) {
            worst = worst.max((a - b).abs());
        }
        for (a, b) in estimate.covariances[e].as_slice().iter().zip(reference.covariances[j].as_slice()) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

/// Parameter error minimised over relabellings of the estimate.
pub fn matched_parameter_error(estimate: &ModelParams, reference: &ModelParams) -> Result<f64> {
    check_shapes(estimate, reference)?;
    let perm = best_permutation(reference.k(), |perm| parameter_sup_error(estimate, reference, perm));
    Ok(parameter_sup_error(estimate, reference, &perm))
}

/// Relabels `estimate` so its means are closest (summed Euclidean distance) to
/// those of `reference`.
pub fn align_by_means(estimate: &ModelParams, reference: &ModelParams) -> Result<ModelParams> {
    check_shapes(estimate, reference)?;
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let perm = best_permutation(reference.k(), |perm| {
        perm.iter().enumerate().map(|(j, &e)| dist(&estimate.means[e], &reference.means[j])).sum()
    });
    Ok(estimate.permuted(&perm))
}
