//! Location estimation for heteroscedastic symmetric observations.
//!
//! Observations `Xᵢ = θ + σᵢ Zᵢ` share a location θ but have different
//! scales. The crate provides the empirical median, mean and oracle MLE,
//! closed-form deviation bounds for each, exact oracles for the
//! combinatorial facts behind the median bounds, and a deterministic
//! parallel Monte Carlo harness that measures empirical coverage.

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod oracles;
pub mod rng;
pub mod simulation;
pub mod special;
pub mod stats;
pub mod verification;

pub use bounds::{compare_all, BoundName, BoundReport, VarianceProfile};
pub use error::{Error, Result};
pub use estimators::{empirical_mean, empirical_median, mle_oracle, Dataset};
pub use simulation::{
    constant_c_for, family_bound_reports, materialize_profile, run_coverage,
    run_estimator_comparison, run_experiment, Family, ProfileSpec, SimulationConfig,
};
