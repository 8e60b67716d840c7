use std::fmt;

use serde::{Deserialize, Serialize};

use super::randomized::sample_zcl_threshold;
use crate::error::{Error, Result};
use crate::numerics::{
    BaselineThreshold, BoundContext, EctThreshold, LaEctThreshold, Threshold, ZclThreshold,
};
use crate::scalar::Scalar;

/// Algorithm identifier plus parameters; together with an instance this fully
/// determines a run.
///
/// Serialized as `{"kind": "ect", "alpha": 0.5}` and so on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum PolicySpec<T> {
    /// Fixed threshold `φ`.
    Constant { phi: T },
    /// Exponential threshold `Φ(z)`.
    Zcl,
    /// Stretched exponential `Φ^α(z)`.
    Baseline { alpha: T },
    /// Extended constant threshold `Ψ^α(z)`.
    Ect { alpha: T },
    /// One constant threshold drawn from the `c/x` density before the first item.
    ZclRandomized { seed: u64 },
    /// Learning-augmented ECT with trust `γ` and predicted density `d̂`.
    LaEct { gamma: T, prediction: T },
}

fn short(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

impl<T: Scalar> PolicySpec<T> {
    /// Display name used to key reports, e.g. `ECT[0.5]`.
    pub fn name(&self) -> String {
        match self {
            PolicySpec::Constant { phi } => format!("Constant[{}]", short(phi.as_f64())),
            PolicySpec::Zcl => "ZCL".to_string(),
            PolicySpec::Baseline { alpha } => format!("Baseline[{}]", short(alpha.as_f64())),
            PolicySpec::Ect { alpha } => format!("ECT[{}]", short(alpha.as_f64())),
            PolicySpec::ZclRandomized { .. } => "ZCL-Randomized".to_string(),
            PolicySpec::LaEct { gamma, .. } => format!("LA-ECT[{}]", short(gamma.as_f64())),
        }
    }

    pub fn is_randomized(&self) -> bool {
        matches!(self, PolicySpec::ZclRandomized { .. })
    }

    /// Checks parameter ranges against the instance bounds.
    pub fn validate(&self, ctx: &BoundContext<T>) -> Result<()> {
        match *self {
            PolicySpec::Constant { phi } => {
                if !(phi >= T::zero() && phi <= ctx.upper) {
                    return Err(Error::parameter(
                        "phi",
                        phi.as_f64(),
                        format!("[0, {}]", ctx.upper),
                    ));
                }
            }
            PolicySpec::Zcl | PolicySpec::ZclRandomized { .. } => {}
            PolicySpec::Baseline { alpha } | PolicySpec::Ect { alpha } => ctx.check_alpha(alpha)?,
            PolicySpec::LaEct { gamma, prediction } => {
                ctx.check_gamma(gamma)?;
                let tol = T::one() + T::rel_tol();
                if !(prediction >= ctx.lower / tol && prediction <= ctx.upper * tol) {
                    return Err(Error::parameter(
                        "prediction",
                        prediction.as_f64(),
                        format!("[{}, {}]", ctx.lower, ctx.upper),
                    ));
                }
            }
        }
        Ok(())
    }
}

impl<T: Scalar> fmt::Display for PolicySpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Copy, Debug)]
enum Rule<T> {
    Constant(T),
    Zcl(ZclThreshold<T>),
    Baseline(BaselineThreshold<T>),
    Ect(EctThreshold<T>),
    LaEct(LaEctThreshold<T>),
}

/// A validated policy bound to a density range, ready to evaluate thresholds.
#[derive(Clone, Debug)]
pub struct Policy<T> {
    spec: PolicySpec<T>,
    rule: Rule<T>,
    sampled: Option<T>,
}

impl<T: Scalar> Policy<T> {
    pub fn new(spec: PolicySpec<T>, ctx: BoundContext<T>) -> Result<Self> {
        spec.validate(&ctx)?;
        let (rule, sampled) = match spec {
            PolicySpec::Constant { phi } => (Rule::Constant(phi), None),
            PolicySpec::Zcl => (Rule::Zcl(ZclThreshold::new(ctx)), None),
            PolicySpec::Baseline { alpha } => {
                (Rule::Baseline(BaselineThreshold::new(ctx, alpha)?), None)
            }
            PolicySpec::Ect { alpha } => (Rule::Ect(EctThreshold::new(ctx, alpha)?), None),
            PolicySpec::ZclRandomized { seed } => {
                let phi = sample_zcl_threshold(seed, &ctx);
                (Rule::Constant(phi), Some(phi))
            }
            PolicySpec::LaEct { gamma, prediction } => (
                Rule::LaEct(LaEctThreshold::new(ctx, gamma, prediction)?),
                None,
            ),
        };
        Ok(Policy {
            spec,
            rule,
            sampled,
        })
    }

    pub fn spec(&self) -> &PolicySpec<T> {
        &self.spec
    }

    /// Threshold drawn by a randomized policy.
    pub fn sampled_threshold(&self) -> Option<T> {
        self.sampled
    }

    /// Minimum admitted density at utilization `z`.
    pub fn threshold(&self, z: T) -> T {
        match &self.rule {
            Rule::Constant(phi) => *phi,
            Rule::Zcl(f) => f.at(z),
            Rule::Baseline(f) => f.at(z),
            Rule::Ect(f) => f.at(z),
            Rule::LaEct(f) => f.at(z),
        }
    }

    /// `[κ, κ+γ]` for LA-ECT.
    pub fn flat_segment(&self) -> Option<(T, T)> {
        match &self.rule {
            Rule::LaEct(f) => Some((f.kappa(), f.kappa() + f.gamma())),
            _ => None,
        }
    }
}
