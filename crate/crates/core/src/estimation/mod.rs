//! Estimation from i.i.d. data: nuisance regressions, influence-function
//! one-step estimators of bound functionals, sample splitting and the bootstrap.

pub mod bootstrap;
pub mod dataset;
pub mod nuisance;
pub mod onestep;
pub mod pipeline;
pub mod regression;

pub use bootstrap::{bootstrap_ci, bootstrap_mean_ci, EstimateWithCI};
pub use dataset::Dataset;
pub use nuisance::{fit_nuisances, FittedNuisance, LawNuisance, Nuisance, NuisanceSpec};
pub use onestep::{
    cross_arm_onestep, cross_arm_values, levis_bound_estimate, levis_bound_values, observed_policy, plugin_bound,
    sign_onestep, superopt_value_onestep, superopt_value_values, BoundTarget, Estimand, IndexedRegime, InferenceOptions,
    Policy, SignReport,
};
pub use pipeline::{crossfit, split_pipeline, term_estimates, TermEstimates, EstimationConfig, LearnedPolicy, PipelineOutput, PolicySpec};
pub use regression::{Design, FeatureMap, IrlsOptions};
