//! Numerical checks of the theory behind the estimator, and the simulation
//! experiments used to assess consistency and robustness.

mod assumption;
mod boundedness;
mod consistency;
mod contamination;
mod inequalities;
mod matching;
mod quadrature;
mod stationarity;

pub use assumption::{
    assumption1_report, assumption1_threshold, min_scale_inflation, scale_inflation_bracket, Assumption1Report,
};
pub use boundedness::{boundedness_check, BoundednessReport};
pub use consistency::{
    consistency_experiment, population_reference, quantile, ConsistencyPlan, ConsistencyRow, ConsistencyTable,
};
pub use contamination::{contamination_experiment, ExperimentReport, MethodShift};
pub use inequalities::{lemma_inequality_suite, random_spd_with_eigenvalues, InequalityReport, INEQUALITY_SLACK};
pub use matching::{align_by_means, best_permutation, matched_parameter_error, parameter_sup_error};
pub use quadrature::{integrate, quadrature_oracle};
pub use stationarity::fixed_label_gradient;
