//! Threshold functions mapping utilization `z` to the minimum admitted density.

use serde::{Deserialize, Serialize};

use super::lambert::lambert_w0;
use crate::error::{Error, Result};
use crate::scalar::{approx_eq, Scalar};

/// Density bounds `[L, U]` and the quantities derived from them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BoundContext<T> {
    pub lower: T,
    pub upper: T,
}

impl<T: Scalar> BoundContext<T> {
    pub fn new(lower: T, upper: T) -> Result<Self> {
        if !(lower > T::zero() && upper >= lower && upper.is_finite()) {
            return Err(Error::parameter(
                "L",
                lower.as_f64(),
                format!("0 < L <= U < inf (U = {upper})"),
            ));
        }
        Ok(BoundContext { lower, upper })
    }

    pub fn ratio(&self) -> T {
        self.upper / self.lower
    }

    /// `ln(U/L)`.
    pub fn log_ratio(&self) -> T {
        self.ratio().ln()
    }

    /// `ln(U/L) + 1` = `ln(Ue/L)`, the optimal competitive ratio.
    pub fn log_ratio_e(&self) -> T {
        self.log_ratio() + T::one()
    }

    /// `c = 1/(ln(U/L) + 1)`: the smallest admissible fairness parameter and
    /// the utilization below which the ZCL threshold stays under `L`.
    pub fn alpha_min(&self) -> T {
        T::one() / self.log_ratio_e()
    }

    pub fn check_alpha(&self, alpha: T) -> Result<()> {
        let lo = self.alpha_min();
        if alpha.is_nan() || alpha < lo * (T::one() - T::rel_tol()) || alpha > T::one() {
            return Err(Error::parameter(
                "alpha",
                alpha.as_f64(),
                format!("[{}, 1]", lo),
            ));
        }
        Ok(())
    }

    pub fn check_gamma(&self, gamma: T) -> Result<()> {
        if !(gamma >= T::zero() && gamma <= T::one()) {
            return Err(Error::parameter("gamma", gamma.as_f64(), "[0, 1]"));
        }
        Ok(())
    }

    /// `ℓ = α + (α - 1)/ln(U/L)`; undefined when `U = L`.
    pub fn ell(&self, alpha: T) -> T {
        alpha + (alpha - T::one()) / self.log_ratio()
    }

    /// `β = W(U(1-α)/(Lα)) / (1-α)`, with the `α → 1` limit `U/L`.
    pub fn beta(&self, alpha: T) -> Result<T> {
        self.check_alpha(alpha)?;
        if alpha == T::one() {
            return Ok(self.ratio());
        }
        let one_minus = T::one() - alpha;
        let arg = self.ratio() * one_minus / alpha;
        Ok(lambert_w0(arg)? / one_minus)
    }

    /// Utilization `κ` where the compressed exponential reaches `d̂`:
    /// `κ = (1-γ) ln(d̂e/L) / ln(Ue/L)`.
    pub fn kappa(&self, gamma: T, prediction: T) -> T {
        let d = self.clamp_prediction(prediction);
        (T::one() - gamma) * ((d / self.lower).ln() + T::one()) / self.log_ratio_e()
    }

    pub fn clamp_prediction(&self, prediction: T) -> T {
        prediction.max(self.lower).min(self.upper)
    }

    /// `(Ue/L)^s (L/e)`, written as `L·exp(s·ln(Ue/L) - 1)`.
    fn exponential(&self, s: T) -> T {
        self.lower * (s * self.log_ratio_e() - T::one()).exp()
    }
}

/// A utilization-indexed admission threshold.
pub trait Threshold<T> {
    fn at(&self, z: T) -> T;
}

/// `Φ(z) = (Ue/L)^z (L/e)`.
#[derive(Clone, Copy, Debug)]
pub struct ZclThreshold<T> {
    ctx: BoundContext<T>,
}

impl<T: Scalar> ZclThreshold<T> {
    pub fn new(ctx: BoundContext<T>) -> Self {
        ZclThreshold { ctx }
    }
}

impl<T: Scalar> Threshold<T> for ZclThreshold<T> {
    fn at(&self, z: T) -> T {
        self.ctx.exponential(z)
    }
}

/// `Φ^α(z) = (Ue/L)^{(z-ℓ)/(1-ℓ)} (L/e)`: ZCL stretched so it stays below
/// `L` on `[0, α]`. At `α = 1` this is the constant threshold `L`.
#[derive(Clone, Copy, Debug)]
pub struct BaselineThreshold<T> {
    ctx: BoundContext<T>,
    ell: Option<T>,
}

impl<T: Scalar> BaselineThreshold<T> {
    pub fn new(ctx: BoundContext<T>, alpha: T) -> Result<Self> {
        ctx.check_alpha(alpha)?;
        let ell = if alpha >= T::one() || ctx.log_ratio() == T::zero() {
            None
        } else {
            Some(ctx.ell(alpha))
        };
        Ok(BaselineThreshold { ctx, ell })
    }
}

impl<T: Scalar> Threshold<T> for BaselineThreshold<T> {
    fn at(&self, z: T) -> T {
        match self.ell {
            Some(ell) => self.ctx.exponential((z - ell) / (T::one() - ell)),
            None => self.ctx.lower,
        }
    }
}

/// `Ψ^α`: flat at `L` on `[0, α]`, then `U e^{β(z-1)}`.
#[derive(Clone, Copy, Debug)]
pub struct EctThreshold<T> {
    ctx: BoundContext<T>,
    alpha: T,
    beta: T,
}

impl<T: Scalar> EctThreshold<T> {
    pub fn new(ctx: BoundContext<T>, alpha: T) -> Result<Self> {
        let beta = ctx.beta(alpha)?;
        Ok(EctThreshold { ctx, alpha, beta })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }
}

impl<T: Scalar> Threshold<T> for EctThreshold<T> {
    fn at(&self, z: T) -> T {
        if z <= self.alpha || self.alpha >= T::one() {
            self.ctx.lower
        } else {
            self.ctx.upper * (self.beta * (z - T::one())).exp()
        }
    }
}

/// `Ψ^{γ,d̂}`: ZCL compressed into `1-γ` of the capacity with a flat segment
/// of width `γ` at the predicted density `d̂`, starting at `κ`.
#[derive(Clone, Copy, Debug)]
pub struct LaEctThreshold<T> {
    ctx: BoundContext<T>,
    gamma: T,
    prediction: T,
    kappa: T,
}

impl<T: Scalar> LaEctThreshold<T> {
    pub fn new(ctx: BoundContext<T>, gamma: T, prediction: T) -> Result<Self> {
        ctx.check_gamma(gamma)?;
        let clamped = ctx.clamp_prediction(prediction);
        if clamped != prediction {
            log::warn!(
                "prediction {prediction} outside [{}, {}], clamped to {clamped}",
                ctx.lower,
                ctx.upper
            );
        }
        Ok(LaEctThreshold {
            ctx,
            gamma,
            prediction: clamped,
            kappa: ctx.kappa(gamma, clamped),
        })
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn prediction(&self) -> T {
        self.prediction
    }
}

impl<T: Scalar> Threshold<T> for LaEctThreshold<T> {
    fn at(&self, z: T) -> T {
        if self.gamma >= T::one() {
            return self.prediction;
        }
        let scale = T::one() - self.gamma;
        if z < self.kappa {
            self.ctx.exponential(z / scale)
        } else if z < self.kappa + self.gamma {
            // the first piece reaches d̂ exactly at κ
            self.prediction
        } else {
            self.ctx.exponential((z - self.gamma) / scale)
        }
    }
}

pub fn threshold_zcl<T: Scalar>(z: T, ctx: &BoundContext<T>) -> T {
    ZclThreshold::new(*ctx).at(z)
}

pub fn threshold_baseline<T: Scalar>(z: T, ctx: &BoundContext<T>, alpha: T) -> Result<T> {
    Ok(BaselineThreshold::new(*ctx, alpha)?.at(z))
}

pub fn threshold_ect<T: Scalar>(z: T, ctx: &BoundContext<T>, alpha: T) -> Result<T> {
    Ok(EctThreshold::new(*ctx, alpha)?.at(z))
}

pub fn threshold_laect<T: Scalar>(
    z: T,
    ctx: &BoundContext<T>,
    gamma: T,
    prediction: T,
) -> Result<T> {
    Ok(LaEctThreshold::new(*ctx, gamma, prediction)?.at(z))
}

/// True when `ψ(z)` is non-decreasing on an `n`-point grid of `[0, 1]`.
pub fn is_non_decreasing<T: Scalar>(f: &impl Threshold<T>, n: usize) -> bool {
    let mut prev = f.at(T::zero());
    for i in 1..=n {
        let z = T::from_count(i as u64) / T::from_count(n as u64);
        let cur = f.at(z);
        if cur < prev && !approx_eq(cur, prev, T::rel_tol()) {
            return false;
        }
        prev = cur;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const E: f64 = std::f64::consts::E;

    fn ctx5() -> BoundContext<f64> {
        BoundContext::new(1.0, 5.0).unwrap()
    }

    #[test]
    fn zcl_anchors() {
        let c = ctx5();
        assert!((threshold_zcl(0.0, &c) - 1.0 / E).abs() < 1e-15);
        assert!((threshold_zcl(1.0, &c) - 5.0).abs() < 1e-12);
        let z = 1.0 / (5f64.ln() + 1.0);
        assert!((threshold_zcl(z, &c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn baseline_anchors() {
        let c = ctx5();
        for &alpha in &[c.alpha_min(), 0.5, 0.66, 0.9] {
            assert!((threshold_baseline(alpha, &c, alpha).unwrap() - 1.0).abs() < 1e-12);
            assert!((threshold_baseline(1.0, &c, alpha).unwrap() - 5.0).abs() < 1e-12);
        }
        assert!(threshold_baseline(0.0, &c, 0.5).unwrap() < 1.0);
        assert!(threshold_baseline(0.3, &c, 0.2).is_err());
        assert!(threshold_baseline(0.3, &c, 1.1).is_err());
        assert_eq!(threshold_baseline(0.7, &c, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn baseline_stays_below_lower_on_fair_region() {
        let c = ctx5();
        let f = BaselineThreshold::new(c, 0.6).unwrap();
        for i in 0..=600 {
            let z = i as f64 / 1000.0;
            assert!(f.at(z) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn ect_pieces() {
        let c = ctx5();
        let f = EctThreshold::new(c, 0.5).unwrap();
        assert!((f.at(1.0) - 5.0).abs() < 1e-12);
        assert_eq!(f.at(0.5), 1.0);
        assert_eq!(f.at(0.1), 1.0);
        let right = c.upper * (f.beta() * (0.5 - 1.0)).exp();
        assert!((right - 0.5 * f.beta() * 1.0).abs() < 1e-9);
        assert!(f.at(0.5 + 1e-9) > 1.0);
        let whole = EctThreshold::new(c, 1.0).unwrap();
        assert_eq!(whole.at(1.0), 1.0);
    }

    #[test]
    fn laect_kappa_at_lower_prediction() {
        let c = ctx5();
        for &gamma in &[0.0, 0.25, 0.5] {
            let kappa = c.kappa(gamma, 1.0);
            assert!((kappa - (1.0 - gamma) / (5f64.ln() + 1.0)).abs() < 1e-12);
            // the defining equation, solved by bisection
            let g = |z: f64| (5.0 * E).powf(z / (1.0 - gamma)) / E - 1.0;
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid) < 0.0 {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            assert!((kappa - lo).abs() < 1e-12);
        }
    }

    #[test]
    fn laect_degenerate_cases() {
        let c = ctx5();
        let zcl = ZclThreshold::new(c);
        let f = LaEctThreshold::new(c, 0.0, 2.7).unwrap();
        for i in 0..=1000 {
            let z = i as f64 / 1000.0;
            assert_eq!(f.at(z), zcl.at(z));
        }
        let full = LaEctThreshold::new(c, 1.0, 2.0).unwrap();
        assert_eq!(full.at(0.0), 2.0);
        assert_eq!(full.at(1.0), 2.0);
        let half = LaEctThreshold::new(c, 0.5, 3.0).unwrap();
        assert!((half.at(1.0) - 5.0).abs() < 1e-12);
        assert_eq!(half.at(half.kappa()), 3.0);
        assert_eq!(half.at(half.kappa() + 0.49), 3.0);
        assert!(LaEctThreshold::new(c, 1.5, 3.0).is_err());
        assert_eq!(LaEctThreshold::new(c, 0.5, 9.0).unwrap().prediction(), 5.0);
    }

    proptest! {
        #[test]
        fn all_thresholds_non_decreasing(
            lower in 0.1f64..10.0,
            spread in 1.0f64..3000.0,
            a in 0.0f64..1.0,
            gamma in 0.0f64..1.0,
            p in 0.0f64..1.0,
        ) {
            let c = BoundContext::new(lower, lower * spread).unwrap();
            let alpha = c.alpha_min() + a * (1.0 - c.alpha_min());
            let pred = lower + p * (c.upper - lower);
            let n = 10_000;
            prop_assert!(is_non_decreasing(&ZclThreshold::new(c), n));
            prop_assert!(is_non_decreasing(&BaselineThreshold::new(c, alpha).unwrap(), n));
            prop_assert!(is_non_decreasing(&EctThreshold::new(c, alpha).unwrap(), n));
            prop_assert!(is_non_decreasing(&LaEctThreshold::new(c, gamma, pred).unwrap(), n));
        }

        #[test]
        fn ect_and_laect_stay_in_band(
            spread in 1.0f64..3000.0,
            a in 0.0f64..1.0,
            gamma in 0.0f64..1.0,
            p in 0.0f64..1.0,
            z in 0.0f64..=1.0,
        ) {
            let c = BoundContext::new(1.0, spread).unwrap();
            let alpha = c.alpha_min() + a * (1.0 - c.alpha_min());
            let slack = 1.0 + 1e-12;
            let ect = EctThreshold::new(c, alpha).unwrap().at(z);
            prop_assert!(ect >= 1.0 && ect <= c.upper * slack);
            let la = LaEctThreshold::new(c, gamma, 1.0 + p * (spread - 1.0)).unwrap().at(z);
            prop_assert!(la >= 1.0 / E / slack && la <= c.upper * slack);
            let zcl = threshold_zcl(z, &c);
            prop_assert!(zcl >= 1.0 / E / slack && zcl <= c.upper * slack);
        }
    }
}
