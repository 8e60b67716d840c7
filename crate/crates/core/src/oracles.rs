//! Offline and semi-online benchmarks: the exact DP optimum, the greedy
//! density-order approximation, the optimal constant threshold `d⋆` and the
//! semi-online `ORACLE⋆`.

use serde::{Deserialize, Serialize};

use crate::algorithms::{run, PolicySpec};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::scalar::Scalar;

/// Default DP table budget, in cells (`n · (m + 1)`).
pub const DEFAULT_DP_BUDGET: u128 = 100_000_000;

/// Densities within this relative distance are one density class.
const DENSITY_BUCKET_RTOL: f64 = 1e-12;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct OracleMeta<T> {
    /// Total value of the greedy approximation.
    #[serde(rename = "V")]
    pub total_value: Option<T>,
    /// Lowest density accepted by the greedy approximation.
    pub x: Option<T>,
    /// Smallest instance density above `x`.
    pub x_plus: Option<T>,
    pub d_star: Option<T>,
    /// Largest item weight.
    pub epsilon: T,
    /// Greedy value collected at density `x`.
    pub value_at_x: Option<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct OracleResult<T> {
    pub value: T,
    /// 0-based item indices, ascending.
    pub chosen: Vec<usize>,
    pub meta: OracleMeta<T>,
}

impl<T: Scalar> OracleResult<T> {
    fn from_chosen(inst: &Instance<T>, mut chosen: Vec<usize>, meta: OracleMeta<T>) -> Self {
        chosen.sort_unstable();
        let value = chosen
            .iter()
            .fold(T::zero(), |acc, &j| acc + inst.items[j].value);
        OracleResult { value, chosen, meta }
    }

    pub fn used_units(&self, inst: &Instance<T>) -> u64 {
        self.chosen.iter().map(|&j| inst.units(j)).sum()
    }
}

fn base_meta<T: Scalar>(inst: &Instance<T>) -> OracleMeta<T> {
    OracleMeta {
        epsilon: inst.max_weight(),
        ..OracleMeta::default()
    }
}

/// Exact 0/1 optimum over the weight grid `1/m`, with the default budget.
pub fn opt_dp<T: Scalar>(inst: &Instance<T>) -> Result<OracleResult<T>> {
    opt_dp_with_budget(inst, DEFAULT_DP_BUDGET)
}

/// Exact optimum. Among optimal sets the one with fewer items wins, then the
/// one preferring lower indices.
pub fn opt_dp_with_budget<T: Scalar>(inst: &Instance<T>, budget: u128) -> Result<OracleResult<T>> {
    let n = inst.len();
    let cap = inst.capacity_units() as usize;
    let width = cap + 1;
    let cells = n as u128 * width as u128;
    if cells > budget {
        return Err(Error::Budget { cells, budget });
    }

    // best[c]: optimum of the current suffix within capacity c
    let mut best_value = vec![T::zero(); width];
    let mut best_count = vec![0u32; width];
    let mut take = vec![0u64; (n * width).div_ceil(64)];
    let tol = T::lit(DENSITY_BUCKET_RTOL);

    for j in (0..n).rev() {
        let units = inst.units(j) as usize;
        if units > cap {
            continue;
        }
        let value = inst.items[j].value;
        for c in (units..=cap).rev() {
            let cand_value = best_value[c - units] + value;
            let cand_count = best_count[c - units] + 1;
            let cur = best_value[c];
            let scale = cand_value.abs().max(cur.abs());
            let better = if (cand_value - cur).abs() <= tol * scale {
                cand_count <= best_count[c]
            } else {
                cand_value > cur
            };
            if better {
                best_value[c] = cand_value;
                best_count[c] = cand_count;
                let bit = j * width + c;
                take[bit / 64] |= 1 << (bit % 64);
            }
        }
    }

    let mut chosen = Vec::new();
    let mut c = cap;
    for j in 0..n {
        let bit = j * width + c;
        if take[bit / 64] >> (bit % 64) & 1 == 1 {
            chosen.push(j);
            c -= inst.units(j) as usize;
        }
    }
    Ok(OracleResult::from_chosen(inst, chosen, base_meta(inst)))
}

/// Item indices sorted by non-increasing density, ties by index.
fn density_order<T: Scalar>(inst: &Instance<T>) -> (Vec<T>, Vec<usize>) {
    let d = inst.densities();
    let mut order: Vec<usize> = (0..inst.len()).collect();
    order.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap_or(std::cmp::Ordering::Equal));
    (d, order)
}

/// Density classes in decreasing order as `(max, min)` pairs, and the class
/// of each item.
fn density_classes<T: Scalar>(d: &[T], order: &[usize]) -> (Vec<(T, T)>, Vec<usize>) {
    let tol = T::lit(DENSITY_BUCKET_RTOL);
    let mut classes: Vec<(T, T)> = Vec::new();
    let mut class_of = vec![0; d.len()];
    for &j in order {
        match classes.last_mut() {
            Some((top, low)) if d[j] >= *top * (T::one() - tol) => *low = d[j],
            _ => classes.push((d[j], d[j])),
        }
        class_of[j] = classes.len() - 1;
    }
    (classes, class_of)
}

/// Greedy in density order, stopping at the first item that does not fit.
///
/// Records `V`, the lowest accepted density `x` and the value accepted at
/// density `x` in the result's meta.
pub fn apx_greedy<T: Scalar>(inst: &Instance<T>) -> OracleResult<T> {
    let (d, order) = density_order(inst);
    let (classes, class_of) = density_classes(&d, &order);
    let cap = inst.capacity_units();
    let mut used = 0;
    let mut chosen = Vec::new();
    for &j in &order {
        let u = inst.units(j);
        if used + u > cap {
            break;
        }
        used += u;
        chosen.push(j);
    }

    let mut meta = base_meta(inst);
    if let Some(&last) = chosen.last() {
        let k = class_of[last];
        let value_at_x = chosen
            .iter()
            .filter(|&&j| class_of[j] == k)
            .fold(T::zero(), |acc, &j| acc + inst.items[j].value);
        meta.x = Some(classes[k].1);
        meta.value_at_x = Some(value_at_x);
        meta.x_plus = k.checked_sub(1).map(|p| classes[p].1);
    }
    let mut result = OracleResult::from_chosen(inst, chosen, meta);
    result.meta.total_value = Some(result.value);
    result
}

/// How `d⋆` is realized when the greedy value at density `x` is below `V/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DstarMode {
    /// The smallest instance density above `x`.
    #[default]
    Definition,
    /// A threshold strictly between `x` and the next instance density.
    OpenGap,
}

/// The optimal constant threshold `d⋆` together with the quantities that
/// define it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Dstar<T> {
    pub value: T,
    pub meta: OracleMeta<T>,
}

pub fn compute_dstar<T: Scalar>(inst: &Instance<T>) -> Result<T> {
    Ok(compute_dstar_with(inst, DstarMode::Definition)?.value)
}

pub fn compute_dstar_with<T: Scalar>(inst: &Instance<T>, mode: DstarMode) -> Result<Dstar<T>> {
    if inst.is_empty() {
        return Err(Error::InvalidInstance("d_star of an empty instance".into()));
    }
    let apx = apx_greedy(inst);
    let mut meta = apx.meta;
    let (x, at_x) = match (meta.x, meta.value_at_x) {
        (Some(x), Some(v)) => (x, v),
        _ => return Err(Error::InvalidInstance("greedy accepted no item".into())),
    };
    let half = apx.value / T::lit(2.0);
    let value = if at_x >= half {
        x
    } else {
        match mode {
            DstarMode::Definition => meta.x_plus.unwrap_or(inst.upper),
            DstarMode::OpenGap => {
                let x_top = (0..inst.len())
                    .map(|j| inst.density(j))
                    .filter(|&d| d >= x && d <= x * (T::one() + T::lit(DENSITY_BUCKET_RTOL)))
                    .fold(x, T::max);
                match meta.x_plus {
                    Some(next) => (x_top + next) / T::lit(2.0),
                    None => inst.upper,
                }
            }
        }
    };
    meta.d_star = Some(value);
    Ok(Dstar { value, meta })
}

/// Constant threshold at `d⋆`, run online.
pub fn oracle_star<T: Scalar>(inst: &Instance<T>) -> Result<OracleResult<T>> {
    oracle_star_with(inst, DstarMode::Definition)
}

pub fn oracle_star_with<T: Scalar>(inst: &Instance<T>, mode: DstarMode) -> Result<OracleResult<T>> {
    let dstar = compute_dstar_with(inst, mode)?;
    let trace = run(&PolicySpec::Constant { phi: dstar.value }, inst)?;
    Ok(OracleResult::from_chosen(inst, trace.accepted(), dstar.meta))
}
