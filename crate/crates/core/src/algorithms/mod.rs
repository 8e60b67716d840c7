//! Online threshold policies and the decision engine.

mod engine;
mod policy;
mod randomized;

pub use engine::{outcome, run, run_policy, run_with, Admission, Execution, Outcome};
pub use policy::{Policy, PolicySpec};
pub use randomized::{
    expected_value_randomized, sample_zcl_threshold, trial_seed, zcl_threshold_cdf,
    zcl_threshold_from_uniform, MonteCarloEstimate,
};
