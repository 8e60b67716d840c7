//! Online knapsack with conditional time-independent fairness.
//!
//! Threshold policies (ZCL, ECT, LA-ECT, a stretched-exponential baseline and
//! a one-shot randomized ZCL), exact and greedy offline oracles, instance
//! generators and empirical fairness audits. Everything is generic over the
//! float type; `f64` aliases are provided at the crate root.

// `!(x >= 0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod audit;
pub mod error;
pub mod instances;
pub mod model;
pub mod numerics;
pub mod oracles;
pub mod scalar;
pub mod seeds;

pub use algorithms::{outcome, run, run_policy, Policy, PolicySpec};
pub use error::{Error, Result};
pub use model::{validate_instance, Decision, Instance, Item, KnapsackState, RunTrace, Violation};
pub use numerics::{lambert_w0, BoundContext};
pub use oracles::{apx_greedy, compute_dstar, opt_dp, oracle_star, OracleResult};
pub use scalar::Scalar;

pub type Item64 = model::Item<f64>;
pub type Instance64 = model::Instance<f64>;
pub type PolicySpec64 = algorithms::PolicySpec<f64>;
pub type RunTrace64 = model::RunTrace<f64>;
pub type OracleResult64 = oracles::OracleResult<f64>;
pub type AuditReport64 = audit::AuditReport<f64>;
pub type GeneratorSpec64 = instances::GeneratorSpec<f64>;
pub type BoundContext64 = numerics::BoundContext<f64>;

pub type Instance32 = model::Instance<f32>;
pub type PolicySpec32 = algorithms::PolicySpec<f32>;
