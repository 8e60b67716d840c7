//! Experiment harness for the tfokp policies: empirical competitive ratios,
//! CDFs, bound curves and prediction sweeps, with CSV/JSON output.

pub mod cr;
pub mod curves;
pub mod experiment;
pub mod output;
pub mod stats;
pub mod sweep;

pub use cr::{empirical_cr, Cr};
pub use curves::{pareto_curves, Family, Solved};
pub use experiment::{run_experiment, ExperimentReport, ExperimentSpec};
pub use sweep::{prediction_error_sweep, robustness_sweep};
