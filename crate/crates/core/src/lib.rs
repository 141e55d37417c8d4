//! Robust estimation for multivariate normal mixtures by maximising a
//! hard-assignment pseudo beta-likelihood under eigenvalue-ratio and
//! eigenvalue-floor constraints on the component covariances.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: Cholesky, Jacobi eigendecomposition and friends for small SPD matrices.
//! - [`mixture`]: parameters, densities, assignments and the objective.
//! - [`constraints`]: feasibility checks and eigenvalue projection.
//! - [`estimator`]: the classification-EM fit, multi-start driver and ML baseline.
//! - [`validation`]: numerical checks of the theory and simulation experiments.

pub mod constraints;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod mixture;
pub mod reference;
pub mod rng;
pub mod validation;

pub use constraints::{check_constraints, project_eigenvalues, ConstraintCheck, ConstraintSpec, EigenSummary};
pub use dataset::{load_csv, parse_csv, Dataset};
pub use error::{Error, ErrorClass, Result};
pub use estimator::{
    cem_fit, em_mle_fit, flag_anomalies, multi_start_fit, EmConfig, EmVariant, EstimatorConfig, FitResult, InitMode,
};
pub use linalg::{EigenDecomp, SymMatrix};
pub use mixture::{
    assign, discriminants, dpd_integral, mixture_pdf, mvn_pdf, power_density, pseudo_beta_likelihood, Assignment,
    ModelParams,
};
