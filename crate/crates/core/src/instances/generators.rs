use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Item};
use crate::scalar::Scalar;
use crate::seeds::rng;

/// Weight menu of the cloud-trace experiments.
pub const DEFAULT_WEIGHT_MENU: [f64; 3] = [0.01, 0.03, 0.05];

/// Ratio between the largest and smallest innate job values.
pub const DEFAULT_VALUE_RATIO: f64 = 50.0;

const MAX_GRANULARITY: u32 = 1_000_000;

fn check_bounds<T: Scalar>(lower: T, upper: T) -> Result<()> {
    if !(lower > T::zero() && upper >= lower && upper.is_finite()) {
        return Err(Error::parameter(
            "L",
            lower.as_f64(),
            format!("0 < L <= U < inf (U = {upper})"),
        ));
    }
    Ok(())
}

/// Number of batches `N_x = ⌈(x - L)/δ⌉ + 1` with `δ = (U - L)/N`.
pub fn batch_count<T: Scalar>(x: T, n_batches: u32, lower: T, upper: T) -> usize {
    if upper == lower {
        return 1;
    }
    let delta = (upper - lower) / T::from_count(n_batches as u64);
    let q = (x - lower) / delta;
    let r = q.round();
    // x on the δ-grid must not spill into an extra batch through rounding
    let steps = if (q - r).abs() <= T::lit(1e-9) * T::one().max(q) {
        r
    } else {
        q.ceil()
    };
    steps.to_usize().unwrap_or(0) + 1
}

/// The x-continuously non-decreasing instance `I_x`: `N_x` batches of `m`
/// identical items of weight `1/m`, batch `i` at density `L + (i-1)δ`.
pub fn gen_x_nondecreasing<T: Scalar>(
    x: T,
    m: u32,
    n_batches: u32,
    lower: T,
    upper: T,
) -> Result<Instance<T>> {
    check_bounds(lower, upper)?;
    if m == 0 || n_batches == 0 {
        return Err(Error::parameter("m", m as f64, "m, N >= 1"));
    }
    if !(x >= lower && x <= upper * (T::one() + T::rel_tol())) {
        return Err(Error::parameter(
            "x",
            x.as_f64(),
            format!("[{lower}, {upper}]"),
        ));
    }
    let n_x = batch_count(x, n_batches, lower, upper);
    let step = (upper - lower) / T::from_count(n_batches as u64);
    let mut items = Vec::with_capacity(n_x * m as usize);
    for i in 0..n_x {
        let d = (lower + T::from_count(i as u64) * step).min(upper);
        items.extend(std::iter::repeat_n(Item::with_density(d, 1, m), m as usize));
    }
    Ok(Instance::new(items, lower, upper, m).named(format!("I_x(x={x},m={m},N={n_batches})")))
}

/// Batch-aligned `x` values `L + kδ` for `k = 0..=N`, thinned to `points`
/// evenly spaced entries.
pub fn x_grid<T: Scalar>(points: usize, n_batches: u32, lower: T, upper: T) -> Vec<T> {
    let step = (upper - lower) / T::from_count(n_batches as u64);
    let n = n_batches as usize;
    let points = points.clamp(1, n + 1);
    let mut ks: Vec<usize> = if points == 1 {
        vec![n]
    } else {
        (0..points).map(|i| i * n / (points - 1)).collect()
    };
    ks.dedup();
    ks.into_iter()
        .map(|k| (lower + T::from_count(k as u64) * step).min(upper))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GadgetKind {
    DuplicatedSuffix,
    SmallThenLarge,
    TwoDensity,
}

impl std::str::FromStr for GadgetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "duplicated_suffix" => Ok(GadgetKind::DuplicatedSuffix),
            "small_then_large" => Ok(GadgetKind::SmallThenLarge),
            "two_density" => Ok(GadgetKind::TwoDensity),
            other => Err(Error::UnknownGadget(other.to_string())),
        }
    }
}

/// Parameters shared by the adversarial gadgets. `lower`, `upper` and `m`
/// are required by all of them; `small_weight` by `small_then_large`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GadgetParams<T> {
    #[serde(rename = "L", default)]
    pub lower: Option<T>,
    #[serde(rename = "U", default)]
    pub upper: Option<T>,
    #[serde(default)]
    pub m: Option<u32>,
    /// Weight `w_δ` of the small items.
    #[serde(default)]
    pub small_weight: Option<T>,
    /// Number of small items before the large one (default 10).
    #[serde(default)]
    pub small_count: Option<usize>,
}

impl<T: Scalar> GadgetParams<T> {
    pub fn new(lower: T, upper: T, m: u32) -> Self {
        GadgetParams {
            lower: Some(lower),
            upper: Some(upper),
            m: Some(m),
            ..Default::default()
        }
    }

    fn bounds(&self) -> Result<(T, T)> {
        let lower = self.lower.ok_or(Error::MissingParam("lower"))?;
        let upper = self.upper.ok_or(Error::MissingParam("upper"))?;
        check_bounds(lower, upper)?;
        Ok((lower, upper))
    }

    fn granularity(&self) -> Result<u32> {
        match self.m {
            Some(0) => Err(Error::parameter("m", 0.0, "[1, inf)")),
            Some(m) => Ok(m),
            None => Err(Error::MissingParam("m")),
        }
    }
}

/// Deterministic gadget instance by name.
pub fn gen_gadget<T: Scalar>(name: &str, params: &GadgetParams<T>) -> Result<Instance<T>> {
    let kind: GadgetKind = name.parse()?;
    let (lower, upper) = params.bounds()?;
    let inst = match kind {
        GadgetKind::DuplicatedSuffix => {
            let base = gen_x_nondecreasing(lower, params.granularity()?, 1, lower, upper)?;
            duplicated_suffix(&base)
        }
        GadgetKind::SmallThenLarge => {
            let w = params.small_weight.ok_or(Error::MissingParam("small_weight"))?;
            small_then_large(lower, upper, w, params.small_count.unwrap_or(10))?
        }
        GadgetKind::TwoDensity => two_density(lower, upper, params.granularity()?)?,
    };
    Ok(inst.named(name))
}

/// `base` followed by a copy of itself.
pub fn duplicated_suffix<T: Scalar>(base: &Instance<T>) -> Instance<T> {
    let mut out = base.clone();
    out.items.extend_from_within(..);
    out
}

/// `count` items of weight `w_δ` and density `L`, then a single item of
/// weight `1 - w_δ/2`, also at density `L`.
pub fn small_then_large<T: Scalar>(
    lower: T,
    upper: T,
    small_weight: T,
    count: usize,
) -> Result<Instance<T>> {
    check_bounds(lower, upper)?;
    if !(small_weight > T::zero() && small_weight < T::one()) {
        return Err(Error::parameter(
            "small_weight",
            small_weight.as_f64(),
            "(0, 1)",
        ));
    }
    let m_f = (T::lit(2.0) / small_weight).round();
    let m = m_f
        .to_u32()
        .filter(|&m| m <= MAX_GRANULARITY)
        .ok_or_else(|| Error::parameter("small_weight", small_weight.as_f64(), "w >= 2e-6"))?;
    if ((T::lit(2.0) / small_weight) - m_f).abs() > T::lit(1e-9) * m_f {
        return Err(Error::parameter(
            "small_weight",
            small_weight.as_f64(),
            "2/w must be an integer",
        ));
    }
    let mut items = vec![Item::with_density(lower, 2, m); count];
    items.push(Item::with_density(lower, m as u64 - 1, m));
    Ok(Instance::new(items, lower, upper, m))
}

/// `m` items at density `L` filling the knapsack, then `round(m·L/U)` items
/// at density `U`, all of weight `1/m`.
pub fn two_density<T: Scalar>(lower: T, upper: T, m: u32) -> Result<Instance<T>> {
    check_bounds(lower, upper)?;
    let tail = (T::from_count(m as u64) * lower / upper)
        .round()
        .to_usize()
        .unwrap_or(0);
    let mut items = vec![Item::with_density(lower, 1, m); m as usize];
    items.extend(std::iter::repeat_n(Item::with_density(upper, 1, m), tail));
    Ok(Instance::new(items, lower, upper, m))
}

/// How innate job values are drawn on `[1, value_ratio]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnateDistribution {
    #[default]
    LogUniform,
    Uniform,
}

/// Synthetic stand-in for the cloud job trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TraceConfig<T> {
    pub n: usize,
    /// Upper end of the value multiplier `τ ~ U[1, μ]`.
    pub mu: T,
    pub seed: u64,
    #[serde(default = "default_menu")]
    pub weight_menu: Vec<T>,
    #[serde(default = "default_value_ratio")]
    pub value_ratio: T,
    #[serde(default)]
    pub innate: InnateDistribution,
}

fn default_menu<T: Scalar>() -> Vec<T> {
    DEFAULT_WEIGHT_MENU.iter().map(|&w| T::lit(w)).collect()
}

fn default_value_ratio<T: Scalar>() -> T {
    T::lit(DEFAULT_VALUE_RATIO)
}

impl<T: Scalar> TraceConfig<T> {
    pub fn new(n: usize, mu: T, seed: u64) -> Self {
        TraceConfig {
            n,
            mu,
            seed,
            weight_menu: default_menu(),
            value_ratio: default_value_ratio(),
            innate: InnateDistribution::LogUniform,
        }
    }

    /// Declared density range: `L = 1`, `U = value_ratio · μ`.
    pub fn bounds(&self) -> (T, T) {
        (T::one(), self.value_ratio * self.mu)
    }
}

/// Smallest `m` putting every weight on the `1/m` grid.
pub fn common_granularity<T: Scalar>(weights: &[T]) -> Result<u32> {
    let tol = T::lit(1e-9);
    (1..=MAX_GRANULARITY)
        .find(|&m| {
            weights.iter().all(|&w| {
                let s = w * T::from_count(m as u64);
                (s - s.round()).abs() <= tol * T::one().max(s)
            })
        })
        .ok_or_else(|| Error::InvalidInstance("weight menu has no common grid".into()))
}

/// Jobs with weights drawn uniformly from the menu and values
/// `v = τ · ι · w`, `τ ~ U[1, μ]`, `ι` on `[1, value_ratio]`.
pub fn synth_trace<T: Scalar>(cfg: &TraceConfig<T>) -> Result<Instance<T>> {
    if cfg.n == 0 {
        return Err(Error::parameter("n", 0.0, "[1, inf)"));
    }
    if !(cfg.mu >= T::one()) {
        return Err(Error::parameter("mu", cfg.mu.as_f64(), "[1, inf)"));
    }
    if !(cfg.value_ratio >= T::one()) {
        return Err(Error::parameter(
            "value_ratio",
            cfg.value_ratio.as_f64(),
            "[1, inf)",
        ));
    }
    if cfg.weight_menu.is_empty()
        || cfg
            .weight_menu
            .iter()
            .any(|&w| !(w > T::zero() && w <= T::one()))
    {
        return Err(Error::parameter("weight_menu", f64::NAN, "weights in (0, 1]"));
    }
    let m = common_granularity(&cfg.weight_menu)?;
    let (lower, upper) = cfg.bounds();
    let mu = cfg.mu.as_f64();
    let ratio = cfg.value_ratio.as_f64();
    let mut r = rng(cfg.seed);
    let mut items = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let w = cfg.weight_menu[r.random_range(0..cfg.weight_menu.len())];
        let tau = 1.0 + (mu - 1.0) * r.random::<f64>();
        let iota = match cfg.innate {
            InnateDistribution::LogUniform => ratio.powf(r.random::<f64>()),
            InnateDistribution::Uniform => 1.0 + (ratio - 1.0) * r.random::<f64>(),
        };
        let units = (w * T::from_count(m as u64)).round().to_u64().unwrap_or(1);
        let d = T::lit(tau * iota).max(lower).min(upper);
        items.push(Item::with_density(d, units, m));
    }
    Ok(Instance::new(items, lower, upper, m)
        .named(format!("trace(n={},mu={})", cfg.n, cfg.mu))
        .with_seed(cfg.seed))
}

/// Multiplicative noise `η ~ N(0, σ)`.
pub fn sample_prediction_noise(sigma: f64, seed: u64) -> Result<f64> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::parameter("sigma", sigma, "[0, inf)"));
    }
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(normal.sample(&mut rng(seed)))
}

/// `d̂ = d⋆(1 + η)` clamped to `[L, U]`.
pub fn simulate_prediction<T: Scalar>(
    d_star: T,
    sigma: f64,
    seed: u64,
    lower: T,
    upper: T,
) -> Result<T> {
    let eta = sample_prediction_noise(sigma, seed)?;
    if eta == 0.0 {
        return Ok(d_star.max(lower).min(upper));
    }
    Ok((d_star * (T::one() + T::lit(eta))).max(lower).min(upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_instance;

    #[test]
    fn i_l_is_one_batch() {
        let i = gen_x_nondecreasing(1.0, 100, 50, 1.0, 5.0).unwrap();
        assert_eq!(i.len(), 100);
        assert!((0..100).all(|j| i.density(j) == 1.0 && i.units(j) == 1));
    }

    #[test]
    fn i_u_ends_at_upper() {
        let i = gen_x_nondecreasing(5.0, 10, 8, 1.0, 5.0).unwrap();
        assert_eq!(i.len(), 90);
        assert_eq!(i.density(89), 5.0);
        assert!(validate_instance(&i).is_empty());
    }

    #[test]
    fn batch_count_off_grid_rounds_up() {
        assert_eq!(batch_count(1.05, 50, 1.0, 5.0), 2);
        assert_eq!(batch_count(1.08, 50, 1.0, 5.0), 2);
        assert_eq!(batch_count(1.0, 50, 1.0, 5.0), 1);
        assert_eq!(batch_count(3.0, 1, 3.0, 3.0), 1);
    }

    #[test]
    fn x_grid_is_batch_aligned() {
        let g = x_grid(5, 8, 1.0, 5.0);
        assert_eq!(g, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(x_grid(100, 4, 1.0, 5.0).len(), 5);
    }

    #[test]
    fn gadgets() {
        let p = GadgetParams::<f64>::new(1.0, 5.0, 100);
        let two = gen_gadget("two_density", &p).unwrap();
        assert_eq!(two.len(), 120);
        assert!((0..100).all(|j| two.density(j) == 1.0 && two.items[j].weight == 0.01));
        assert!((100..120).all(|j| two.density(j) == 5.0 && two.items[j].weight == 0.01));

        let dup = gen_gadget("duplicated_suffix", &p).unwrap();
        assert_eq!(dup.len(), 200);
        assert_eq!(dup.items[..100], dup.items[100..]);

        let mut p = p;
        p.small_weight = Some(0.001);
        let stl = gen_gadget("small_then_large", &p).unwrap();
        assert_eq!(stl.granularity, 2000);
        assert_eq!(stl.units(0), 2);
        assert_eq!(*stl.items.last().unwrap(), Item::with_density(1.0, 1999, 2000));
        assert!((stl.items.last().unwrap().weight - 0.9995).abs() < 1e-15);
        assert!(validate_instance(&stl).is_empty());
    }

    #[test]
    fn gadget_errors() {
        let empty = GadgetParams::<f64>::default();
        assert!(matches!(gen_gadget("two_density", &empty), Err(Error::MissingParam(_))));
        let p = GadgetParams::new(1.0, 5.0, 100);
        assert!(matches!(gen_gadget("nope", &p), Err(Error::UnknownGadget(_))));
        assert!(matches!(
            gen_gadget("small_then_large", &p),
            Err(Error::MissingParam("small_weight"))
        ));
    }

    #[test]
    fn trace_ratios_follow_mu() {
        for (mu, ratio) in [(10.0, 500.0), (25.0, 1250.0), (50.0, 2500.0)] {
            let i = synth_trace(&TraceConfig::new(300, mu, 9)).unwrap();
            assert_eq!(i.ratio(), ratio);
            assert_eq!(i.granularity, 100);
            assert!(validate_instance(&i).is_empty());
        }
    }

    #[test]
    fn trace_is_seeded() {
        let a = synth_trace(&TraceConfig::new(50, 10.0, 1)).unwrap();
        let b = synth_trace(&TraceConfig::new(50, 10.0, 1)).unwrap();
        let c = synth_trace(&TraceConfig::new(50, 10.0, 2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let mut cfg = TraceConfig::new(50, 10.0, 1);
        cfg.innate = InnateDistribution::Uniform;
        assert!(validate_instance(&synth_trace(&cfg).unwrap()).is_empty());
    }

    #[test]
    fn common_grid() {
        assert_eq!(common_granularity(&[0.01, 0.03, 0.05]).unwrap(), 100);
        assert_eq!(common_granularity(&[0.5, 0.25]).unwrap(), 4);
    }

    #[test]
    fn prediction_noise() {
        assert_eq!(simulate_prediction(3.0, 0.0, 4, 1.0, 5.0).unwrap(), 3.0);
        for s in 0..200 {
            let d = simulate_prediction(3.0, 2.0, s, 1.0, 5.0).unwrap();
            assert!((1.0..=5.0).contains(&d));
        }
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|s| sample_prediction_noise(1.0, s).unwrap())
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var.sqrt() - 1.0).abs() < 0.02);
        assert!(sample_prediction_noise(-1.0, 0).is_err());
    }
}
