//! The uniform online decision loop shared by every policy.

use super::policy::{Policy, PolicySpec};
use crate::error::Result;
use crate::model::{Decision, Instance, KnapsackState, RunTrace};
use crate::numerics::BoundContext;
use crate::scalar::Scalar;

/// An online admission rule. The engine adds the capacity check.
pub trait Admission<T> {
    /// Whether item `index` (0-based) of the given density is wanted at
    /// utilization `z`, plus the threshold consulted, if any.
    fn offer(&mut self, index: usize, density: T, z: T) -> (bool, Option<T>);
}

impl<T: Scalar> Admission<T> for Policy<T> {
    fn offer(&mut self, _index: usize, density: T, z: T) -> (bool, Option<T>) {
        let theta = self.threshold(z);
        (density >= theta, Some(theta))
    }
}

impl<T: Scalar> Admission<T> for &Policy<T> {
    fn offer(&mut self, _index: usize, density: T, z: T) -> (bool, Option<T>) {
        let theta = self.threshold(z);
        (density >= theta, Some(theta))
    }
}

/// Result of a run without an attached policy spec.
#[derive(Clone, Debug, PartialEq)]
pub struct Execution<T> {
    pub decisions: Vec<Decision<T>>,
    pub final_value: T,
    pub final_units: u64,
}

/// Final value and fill of a run, without the per-item trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome<T> {
    pub value: T,
    pub units: u64,
}

/// Processes `inst` in arrival order: item `j` is accepted iff the rule wants
/// it at the pre-arrival utilization and it fits in the remaining capacity.
pub fn run_with<T: Scalar, A: Admission<T>>(rule: &mut A, inst: &Instance<T>) -> Execution<T> {
    let mut state = KnapsackState::empty(inst.granularity);
    let mut decisions = Vec::with_capacity(inst.len());
    for j in 0..inst.len() {
        let z = state.utilization();
        let units = inst.units(j);
        let (wants, threshold) = rule.offer(j, inst.density(j), z);
        let accepted = wants && state.fits(units);
        if accepted {
            state.admit(units, inst.items[j].value);
        }
        decisions.push(Decision {
            index: j + 1,
            accepted,
            utilization_at_arrival: z,
            threshold_at_arrival: threshold,
            post_utilization: state.utilization(),
        });
    }
    Execution {
        decisions,
        final_value: state.accumulated_value(),
        final_units: state.used_units(),
    }
}

pub fn run_policy<T: Scalar>(policy: &Policy<T>, inst: &Instance<T>) -> RunTrace<T> {
    let mut rule = policy;
    let exec = run_with(&mut rule, inst);
    RunTrace {
        policy: policy.spec().clone(),
        decisions: exec.decisions,
        final_value: exec.final_value,
        final_utilization: T::from_count(exec.final_units) / T::from_count(inst.granularity as u64),
        sampled_threshold: policy.sampled_threshold(),
    }
}

/// Runs `spec` on `inst`. Fails only when `spec` is invalid for the
/// instance's density bounds.
pub fn run<T: Scalar>(spec: &PolicySpec<T>, inst: &Instance<T>) -> Result<RunTrace<T>> {
    let policy = Policy::new(spec.clone(), BoundContext::new(inst.lower, inst.upper)?)?;
    Ok(run_policy(&policy, inst))
}

/// Same decisions as [`run_policy`], tracking only the running totals.
pub fn outcome<T: Scalar>(policy: &Policy<T>, inst: &Instance<T>) -> Outcome<T> {
    let mut state = KnapsackState::empty(inst.granularity);
    for j in 0..inst.len() {
        let units = inst.units(j);
        if !state.fits(units) {
            continue;
        }
        if inst.density(j) >= policy.threshold(state.utilization()) {
            state.admit(units, inst.items[j].value);
            if state.used_units() == inst.capacity_units() {
                break;
            }
        }
    }
    Outcome {
        value: state.accumulated_value(),
        units: state.used_units(),
    }
}
