//! Published reference values: the ten contaminating thyroid observations,
//! and fitted parameters for the SLC and thyroid data used to build
//! synthetic surrogates when the raw files are not available.

use crate::error::Result;
use crate::linalg::SymMatrix;
use crate::mixture::ModelParams;

/// Outliers appended to the five-dimensional thyroid data
/// (RT3U, T4, T3, TSH, DTSH).
pub const THYROID_CONTAMINANTS: [[f64; 5]; 10] = [
    [155.704, 36.535, 17.451, 66.078, 64.804],
    [156.124, 35.039, 20.026, 67.2, 66.104],
    [154.383, 33.625, 20.428, 68.302, 66.031],
    [156.89, 34.951, 20.496, 66.417, 65.875],
    [156.572, 34.154, 17.831, 68.719, 65.724],
    [155.042, 35.24, 18.686, 68.095, 65.878],
    [154.823, 33.75, 20.586, 66.143, 66.802],
    [153.185, 36.636, 19.51, 66.242, 68.082],
    [155.616, 35.583, 19.511, 67.386, 64.267],
    [155.996, 36.244, 20.071, 66.41, 64.583],
];

/// Three-component robust (beta = 0.5) fit of the SLC data: weights, means, variances.
pub const SLC_ROBUST_WEIGHTS: [f64; 3] = [0.422, 0.289, 0.289];
pub const SLC_ROBUST_MEANS: [f64; 3] = [0.185, 0.260, 0.365];
pub const SLC_ROBUST_VARIANCES: [f64; 3] = [0.001, 0.0004, 0.004];

/// Three-component maximum-likelihood fit of the SLC data.
pub const SLC_MLE_WEIGHTS: [f64; 3] = [0.442, 0.137, 0.421];
pub const SLC_MLE_MEANS: [f64; 3] = [0.182, 0.288, 0.450];
pub const SLC_MLE_VARIANCES: [f64; 3] = [0.001, 0.001, 0.005];

/// Thyroid component means, robust fit (beta = 0.3), original then contaminated data.
pub const THYROID_ROBUST_MEANS: [[f64; 5]; 3] = [
    [95.781, 15.993, 3.654, 0.953, -0.049],
    [110.414, 9.006, 1.69, 1.246, 2.388],
    [126.936, 2.925, 0.92, 12.608, 19.173],
];
pub const THYROID_ROBUST_MEANS_CONTAMINATED: [[f64; 5]; 3] = [
    [95.786, 15.993, 3.658, 0.953, -0.044],
    [110.411, 9.007, 1.69, 1.244, 2.383],
    [124.291, 3.833, 1.047, 10.697, 17.727],
];
/// Thyroid component means, maximum likelihood, original then contaminated data.
pub const THYROID_MLE_MEANS: [[f64; 5]; 3] = [
    [93.194, 17.019, 4.161, 0.975, -0.047],
    [110.908, 9.156, 1.725, 1.324, 2.582],
    [124.577, 3.635, 1.031, 14.677, 19.596],
];
pub const THYROID_MLE_MEANS_CONTAMINATED: [[f64; 5]; 3] = [
    [93.19, 17.019, 4.167, 0.982, -0.047],
    [111.0, 9.132, 1.724, 1.327, 2.711],
    [134.039, 12.696, 6.418, 30.864, 33.601],
];

/// Robust-fit covariance estimates on the original thyroid data, row-major.
/// The printed tables are not exactly symmetric; they are averaged on use.
pub const THYROID_ROBUST_COVARIANCES: [[f64; 25]; 3] = [
    [
        155.261, -28.989, -17.165, -0.107, 0.002, //
        -28.989, 24.782, 5.454, -0.233, 0.251, //
        -17.165, 5.454, 3.845, -0.058, 0.082, //
        -0.102, -0.233, -0.058, 0.167, -0.021, //
        0.002, 0.251, 0.082, -0.02, 0.057,
    ],
    [
        66.207, 5.769, 1.48, -0.034, 2.163, //
        5.769, 4.493, 0.393, -0.03, -0.452, //
        1.48, 0.393, 0.22, -0.002, 0.099, //
        -0.034, -0.03, -0.002, 0.202, 0.041, //
        2.163, -0.452, 0.099, 0.041, 3.232,
    ],
    [
        62.309, -3.334, -1.324, -5.678, -109.539, //
        -3.334, 2.852, 0.734, -4.84, 22.356, //
        -1.324, 0.734, 0.311, -1.418, 6.925, //
        -5.678, -4.84, -1.418, 31.978, -10.72, //
        -109.539, 22.356, 6.925, -10.72, 386.56,
    ],
];

/// Class sizes of the thyroid data (hyper-, eu-, hypothyroid) in the
/// component order above.
pub const THYROID_CLASS_SIZES: [usize; 3] = [35, 150, 30];

/// Univariate three-component mixture with the robust SLC estimates.
pub fn slc_robust_truth() -> Result<ModelParams> {
    let total: f64 = SLC_ROBUST_WEIGHTS.iter().sum();
    ModelParams::new(
        SLC_ROBUST_WEIGHTS.iter().map(|w| w / total).collect(),
        SLC_ROBUST_MEANS.iter().map(|m| vec![*m]).collect(),
        SLC_ROBUST_VARIANCES.iter().map(|v| SymMatrix::diagonal(&[*v])).collect(),
    )
}

/// Five-dimensional surrogate of the thyroid data: robust means and
/// covariances with class-size weights.
pub fn thyroid_surrogate_truth() -> Result<ModelParams> {
    let n: usize = THYROID_CLASS_SIZES.iter().sum();
    let covs =
        THYROID_ROBUST_COVARIANCES.iter().map(|c| SymMatrix::symmetrized(5, c.to_vec())).collect::<Result<Vec<_>>>()?;
    ModelParams::new(
        THYROID_CLASS_SIZES.iter().map(|s| *s as f64 / n as f64).collect(),
        THYROID_ROBUST_MEANS.iter().map(|m| m.to_vec()).collect(),
        covs,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contaminant_table_ends() {
        assert_eq!(THYROID_CONTAMINANTS[0], [155.704, 36.535, 17.451, 66.078, 64.804]);
        assert_eq!(THYROID_CONTAMINANTS[9], [155.996, 36.244, 20.071, 66.41, 64.583]);
    }

    #[test]
    fn surrogates_are_valid() {
        slc_robust_truth().unwrap();
        thyroid_surrogate_truth().unwrap();
    }
}
