//! Domain types: items, instances, knapsack state and decision traces.
//!
//! Capacity is normalized to one. Weights are stored as floats but every
//! weight must be an integer multiple of `1/m`, where `m` is the instance
//! granularity; utilization is tracked exactly in those integer units.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algorithms::PolicySpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Densities within this relative distance outside `[L, U]` are clamped
/// instead of reported.
pub const DENSITY_CLAMP_RTOL: f64 = 1e-9;

/// Largest weight used by the cloud-trace experiments; heavier items only
/// raise a warning.
pub const SMALL_WEIGHT_LIMIT: f64 = 0.05;

const UNIT_RTOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Item<T> {
    pub value: T,
    pub weight: T,
}

impl<T: Scalar> Item<T> {
    pub fn new(value: T, weight: T) -> Self {
        Item { value, weight }
    }

    /// Item of the given density whose weight is `units / m`.
    pub fn with_density(density: T, units: u64, m: u32) -> Self {
        let weight = T::from_count(units) / T::from_count(m as u64);
        Item {
            value: density * weight,
            weight,
        }
    }

    pub fn density(&self) -> Result<T> {
        density(self)
    }
}

/// Value per unit of weight.
pub fn density<T: Scalar>(item: &Item<T>) -> Result<T> {
    if item.weight == T::zero() {
        return Err(Error::InvalidItem(format!(
            "zero weight (value {})",
            item.value
        )));
    }
    Ok(item.value / item.weight)
}

/// An ordered arrival sequence with declared density bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Instance<T> {
    pub items: Vec<Item<T>>,
    pub lower: T,
    pub upper: T,
    pub granularity: u32,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl<T: Scalar> Instance<T> {
    pub fn new(items: Vec<Item<T>>, lower: T, upper: T, granularity: u32) -> Self {
        Instance {
            items,
            lower,
            upper,
            granularity,
            name: None,
            seed: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ratio(&self) -> T {
        self.upper / self.lower
    }

    /// Weight of item `j` in units of `1/m`.
    pub fn units(&self, j: usize) -> u64 {
        weight_units(self.items[j].weight, self.granularity)
    }

    pub fn capacity_units(&self) -> u64 {
        self.granularity as u64
    }

    /// Density of item `j`, snapped onto `[L, U]` when it misses by float
    /// noise only.
    pub fn density(&self, j: usize) -> T {
        let item = &self.items[j];
        let d = item.value / item.weight;
        let tol = T::lit(DENSITY_CLAMP_RTOL);
        if d < self.lower && d >= self.lower * (T::one() - tol) {
            self.lower
        } else if d > self.upper && d <= self.upper * (T::one() + tol) {
            self.upper
        } else {
            d
        }
    }

    pub fn densities(&self) -> Vec<T> {
        (0..self.len()).map(|j| self.density(j)).collect()
    }

    pub fn max_weight(&self) -> T {
        self.items
            .iter()
            .fold(T::zero(), |acc, it| acc.max(it.weight))
    }

    pub fn max_density(&self) -> Option<T> {
        (0..self.len()).map(|j| self.density(j)).reduce(T::max)
    }

    /// Stable content hash over bounds, granularity and items.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("{}|{}|{}", self.lower, self.upper, self.granularity));
        for it in &self.items {
            hasher.update(format!(";{},{}", it.value, it.weight));
        }
        hasher
            .finalize()
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Copy of this instance with `item` inserted before position `pos`.
    pub fn with_inserted(&self, pos: usize, item: Item<T>) -> Self {
        let mut out = self.clone();
        out.items.insert(pos.min(out.items.len()), item);
        out
    }
}

pub(crate) fn weight_units<T: Scalar>(weight: T, m: u32) -> u64 {
    let scaled = weight * T::from_count(m as u64);
    scaled.round().to_u64().unwrap_or(0)
}

fn is_unit_multiple<T: Scalar>(weight: T, m: u32) -> bool {
    let scaled = weight * T::from_count(m as u64);
    let tol = T::lit(UNIT_RTOL).max(T::epsilon() * T::lit(8.0));
    (scaled - scaled.round()).abs() <= tol * T::one().max(scaled.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    InvalidBounds { lower: f64, upper: f64 },
    ZeroGranularity,
    NegativeValue { index: usize, value: f64 },
    WeightOutOfRange { index: usize, weight: f64 },
    WeightNotMultiple { index: usize, weight: f64, granularity: u32 },
    DensityOutOfRange { index: usize, density: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InvalidBounds { lower, upper } => {
                write!(f, "invalid bounds: need 0 < L <= U, got L={lower}, U={upper}")
            }
            Violation::ZeroGranularity => write!(f, "granularity m must be positive"),
            Violation::NegativeValue { index, value } => {
                write!(f, "item {index}: negative value {value}")
            }
            Violation::WeightOutOfRange { index, weight } => {
                write!(f, "item {index}: weight {weight} outside (0, 1]")
            }
            Violation::WeightNotMultiple {
                index,
                weight,
                granularity,
            } => write!(
                f,
                "item {index}: weight not a multiple of 1/m (weight {weight}, m {granularity})"
            ),
            Violation::DensityOutOfRange { index, density } => {
                write!(f, "item {index}: density out of [L,U] ({density})")
            }
        }
    }
}

/// Every invariant violation of `inst`; empty means valid.
///
/// Items heavier than [`SMALL_WEIGHT_LIMIT`] are logged as a warning only.
pub fn validate_instance<T: Scalar>(inst: &Instance<T>) -> Vec<Violation> {
    let mut out = Vec::new();
    let bounds_ok = inst.lower > T::zero() && inst.upper >= inst.lower && inst.upper.is_finite();
    if !bounds_ok {
        out.push(Violation::InvalidBounds {
            lower: inst.lower.as_f64(),
            upper: inst.upper.as_f64(),
        });
    }
    if inst.granularity == 0 {
        out.push(Violation::ZeroGranularity);
    }
    let mut heavy = Vec::new();
    for (index, item) in inst.items.iter().enumerate() {
        if !(item.value >= T::zero()) {
            out.push(Violation::NegativeValue {
                index,
                value: item.value.as_f64(),
            });
        }
        if !(item.weight > T::zero() && item.weight <= T::one()) {
            out.push(Violation::WeightOutOfRange {
                index,
                weight: item.weight.as_f64(),
            });
            continue;
        }
        if inst.granularity > 0 && !is_unit_multiple(item.weight, inst.granularity) {
            out.push(Violation::WeightNotMultiple {
                index,
                weight: item.weight.as_f64(),
                granularity: inst.granularity,
            });
        }
        if item.weight > T::lit(SMALL_WEIGHT_LIMIT) {
            heavy.push(index);
        }
        if bounds_ok {
            let d = inst.density(index);
            if d < inst.lower || d > inst.upper || d.is_nan() {
                out.push(Violation::DensityOutOfRange {
                    index,
                    density: d.as_f64(),
                });
            }
        }
    }
    if !heavy.is_empty() {
        log::warn!(
            "{} item(s) heavier than {SMALL_WEIGHT_LIMIT}: first indices {:?}",
            heavy.len(),
            &heavy[..heavy.len().min(8)]
        );
    }
    out
}

/// Knapsack fill during a run, in exact units of `1/m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KnapsackState<T> {
    used: u64,
    capacity: u64,
    value: T,
}

impl<T: Scalar> KnapsackState<T> {
    pub fn empty(granularity: u32) -> Self {
        KnapsackState {
            used: 0,
            capacity: granularity as u64,
            value: T::zero(),
        }
    }

    pub fn used_units(&self) -> u64 {
        self.used
    }

    pub fn utilization(&self) -> T {
        T::from_count(self.used) / T::from_count(self.capacity)
    }

    pub fn accumulated_value(&self) -> T {
        self.value
    }

    pub fn fits(&self, units: u64) -> bool {
        self.used + units <= self.capacity
    }

    /// Adds an item; the caller has checked [`fits`](Self::fits).
    pub fn admit(&mut self, units: u64, value: T) {
        debug_assert!(self.fits(units));
        self.used += units;
        self.value = self.value + value;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Decision<T> {
    /// 1-based arrival position.
    pub index: usize,
    pub accepted: bool,
    pub utilization_at_arrival: T,
    pub threshold_at_arrival: Option<T>,
    pub post_utilization: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RunTrace<T> {
    pub policy: PolicySpec<T>,
    pub decisions: Vec<Decision<T>>,
    pub final_value: T,
    pub final_utilization: T,
    /// The one-shot threshold drawn by a randomized policy.
    #[serde(default)]
    pub sampled_threshold: Option<T>,
}

impl<T: Scalar> RunTrace<T> {
    /// 0-based indices of accepted items.
    pub fn accepted(&self) -> Vec<usize> {
        self.decisions
            .iter()
            .filter(|d| d.accepted)
            .map(|d| d.index - 1)
            .collect()
    }

    /// Recomputes `(value, used units)` of the accepted set from `inst`.
    pub fn replay(&self, inst: &Instance<T>) -> (T, u64) {
        self.accepted().into_iter().fold((T::zero(), 0), |(v, u), j| {
            (v + inst.items[j].value, u + inst.units(j))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(value: f64, weight: f64, upper: f64, m: u32) -> Instance<f64> {
        Instance::new(vec![Item::new(value, weight)], 1.0, upper, m)
    }

    #[test]
    fn valid_single_item() {
        assert!(validate_instance(&single(0.03, 0.01, 5.0, 100)).is_empty());
    }

    #[test]
    fn density_above_upper_is_one_violation() {
        let v = validate_instance(&single(0.06, 0.01, 5.0, 100));
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("density out of [L,U]"));
    }

    #[test]
    fn weight_off_grid_is_one_violation() {
        let v = validate_instance(&single(0.015, 0.015, 5.0, 100));
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("weight not a multiple of 1/m"));
    }

    #[test]
    fn float_noise_on_grid_is_accepted() {
        // 0.03 * 100 = 3.0000000000000004
        assert!(validate_instance(&single(0.03, 0.03, 5.0, 100)).is_empty());
    }

    #[test]
    fn marginal_density_is_clamped() {
        let inst = single(5.0 * 0.01 * (1.0 + 1e-12), 0.01, 5.0, 100);
        assert_eq!(inst.density(0), 5.0);
        assert!(validate_instance(&inst).is_empty());
    }

    #[test]
    fn bad_bounds_are_reported() {
        let inst = Instance::<f64>::new(vec![], 0.0, 5.0, 100);
        assert_eq!(validate_instance(&inst).len(), 1);
        let inst = Instance::<f64>::new(vec![], 2.0, 1.0, 0);
        assert_eq!(validate_instance(&inst).len(), 2);
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(&Item::new(2.0, 0.5)).unwrap(), 4.0);
        assert_eq!(density(&Item::new(0.0, 0.1)).unwrap(), 0.0);
        assert_eq!(density(&Item::new(0.03, 0.03)).unwrap(), 1.0);
        assert!(matches!(
            density(&Item::new(1.0, 0.0)),
            Err(Error::InvalidItem(_))
        ));
    }

    #[test]
    fn validation_is_idempotent() {
        let inst = single(0.06, 0.015, 5.0, 100);
        assert_eq!(validate_instance(&inst), validate_instance(&inst));
    }

    #[test]
    fn knapsack_state_tracks_units() {
        let mut s = KnapsackState::<f64>::empty(100);
        assert!(s.fits(100));
        s.admit(30, 1.5);
        assert!(!s.fits(71));
        assert_eq!(s.used_units(), 30);
        assert_eq!(s.utilization(), 0.3);
        assert_eq!(s.accumulated_value(), 1.5);
    }

    #[test]
    fn fingerprint_depends_on_content() {
        let a = single(1.0, 0.01, 5.0, 100);
        let b = single(1.0, 0.02, 5.0, 100);
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 16);
    }
}
