//! Shared fixtures for the criterion benchmarks.

use betamix::{ModelParams, SymMatrix};

/// Well-separated two-dimensional three-component mixture.
pub fn three_cluster_truth() -> ModelParams {
    ModelParams::new(
        vec![0.3, 0.3, 0.4],
        vec![vec![-4.0, 0.0], vec![4.0, 0.0], vec![0.0, 5.0]],
        vec![
            SymMatrix::identity(2),
            SymMatrix::diagonal(&[0.5, 1.5]),
            SymMatrix::from_rows(&[&[1.0, 0.4], &[0.4, 1.0]]).expect("symmetric"),
        ],
    )
    .expect("valid mixture")
}
