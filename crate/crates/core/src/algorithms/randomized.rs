//! ZCL-Randomized: one constant threshold drawn before the sequence starts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::engine::outcome;
use super::policy::{Policy, PolicySpec};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::numerics::BoundContext;
use crate::scalar::Scalar;
use crate::seeds::{derive_seed, rng};

/// Inverse CDF of the threshold distribution: density `c/L` on `[0, L]` and
/// `c/x` on `[L, U]`, with `c = 1/(ln(U/L) + 1)`.
pub fn zcl_threshold_from_uniform<T: Scalar>(u: T, ctx: &BoundContext<T>) -> T {
    let c = ctx.alpha_min();
    if u <= c {
        u * ctx.lower / c
    } else {
        (ctx.lower * ((u - c) / c).exp()).min(ctx.upper)
    }
}

/// `Pr[φ <= x]` under the same distribution.
pub fn zcl_threshold_cdf<T: Scalar>(x: T, ctx: &BoundContext<T>) -> T {
    let c = ctx.alpha_min();
    if x <= T::zero() {
        T::zero()
    } else if x <= ctx.lower {
        c * x / ctx.lower
    } else if x < ctx.upper {
        c * (T::one() + (x / ctx.lower).ln())
    } else {
        T::one()
    }
}

/// Draws the one-shot threshold; deterministic in `seed`.
pub fn sample_zcl_threshold<T: Scalar>(seed: u64, ctx: &BoundContext<T>) -> T {
    let u: f64 = rng(seed).random();
    zcl_threshold_from_uniform(T::lit(u), ctx)
}

/// Sample mean of a Monte Carlo estimate with a normal-approximation 95% CI.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MonteCarloEstimate<T> {
    pub trials: usize,
    pub mean: T,
    pub ci_low: T,
    pub ci_high: T,
    pub std_dev: T,
}

impl<T: Scalar> MonteCarloEstimate<T> {
    pub fn from_samples(samples: &[T]) -> Self {
        let n = samples.len();
        let nf = T::from_count(n as u64);
        let mean = samples.iter().fold(T::zero(), |a, &b| a + b) / nf;
        let std_dev = if n > 1 {
            let ss = samples
                .iter()
                .fold(T::zero(), |a, &b| a + (b - mean) * (b - mean));
            (ss / T::from_count(n as u64 - 1)).sqrt()
        } else {
            T::zero()
        };
        let half = T::lit(1.959_963_984_540_054) * std_dev / nf.sqrt();
        MonteCarloEstimate {
            trials: n,
            mean,
            ci_low: mean - half,
            ci_high: mean + half,
            std_dev,
        }
    }
}

/// Per-trial seed for trial `i` of a Monte Carlo batch.
pub fn trial_seed(seed: u64, i: usize) -> u64 {
    derive_seed(seed, i as u64)
}

/// Expected value of ZCL-Randomized on `inst` over `n_trials` independent
/// threshold draws.
pub fn expected_value_randomized<T: Scalar>(
    inst: &Instance<T>,
    n_trials: usize,
    seed: u64,
) -> Result<MonteCarloEstimate<T>> {
    if n_trials == 0 {
        return Err(Error::parameter("n_trials", 0.0, "[1, inf)"));
    }
    let ctx = BoundContext::new(inst.lower, inst.upper)?;
    let samples: Vec<T> = (0..n_trials)
        .map(|i| {
            let spec = PolicySpec::ZclRandomized {
                seed: trial_seed(seed, i),
            };
            let policy = Policy::new(spec, ctx).expect("randomized spec always valid");
            outcome(&policy, inst).value
        })
        .collect();
    Ok(MonteCarloEstimate::from_samples(&samples))
}
