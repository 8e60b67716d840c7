//! Closed-form mathematics: Lambert W, the threshold families and their
//! competitive bounds.

mod bounds;
mod lambert;
mod thresholds;

pub use bounds::{
    bound_baseline_cr, bound_laect_consistency, bound_laect_robustness, bound_lemma_add,
    bound_pareto_beta, bound_zcl, pareto_beta_implicit,
};
pub use lambert::lambert_w0;
pub use thresholds::{
    is_non_decreasing, threshold_baseline, threshold_ect, threshold_laect, threshold_zcl,
    BaselineThreshold, BoundContext, EctThreshold, LaEctThreshold, Threshold, ZclThreshold,
};
