//! Competitive-ratio, consistency and robustness bounds in closed form.

use super::lambert::lambert_w0;
use super::thresholds::BoundContext;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `ln(U/L) + 1`: optimal ratio of ZCL and of ZCL-Randomized in expectation.
pub fn bound_zcl<T: Scalar>(ctx: &BoundContext<T>) -> T {
    ctx.log_ratio_e()
}

/// Pareto-optimal ratio of any deterministic α-CTIF algorithm,
/// `W(U(1-α)/(Lα)) / (1-α)`; equals `U/L` at `α = 1`.
pub fn bound_pareto_beta<T: Scalar>(ctx: &BoundContext<T>, alpha: T) -> Result<T> {
    ctx.beta(alpha)
}

/// The same bound as the root of `ln(U/(αβL))/β = 1 - α`, by bisection on
/// `[1, U/(αL)]` where the left side is strictly decreasing.
pub fn pareto_beta_implicit<T: Scalar>(ctx: &BoundContext<T>, alpha: T) -> Result<T> {
    ctx.check_alpha(alpha)?;
    if alpha == T::one() {
        return Ok(ctx.ratio());
    }
    let target = T::one() - alpha;
    let a = ctx.upper / (alpha * ctx.lower);
    let g = |b: T| (a / b).ln() / b - target;
    let (mut lo, mut hi) = (T::one(), a);
    for _ in 0..400 {
        let mid = (lo + hi) / T::lit(2.0);
        if g(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() * hi {
            break;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

/// Ratio of the stretched-ZCL baseline,
/// `U[ln(U/L)+1] / (Lα[ln(U/L)+1] - L(1-ℓ) + U(1-ℓ))`.
pub fn bound_baseline_cr<T: Scalar>(ctx: &BoundContext<T>, alpha: T) -> Result<T> {
    ctx.check_alpha(alpha)?;
    if alpha == T::one() || ctx.log_ratio() == T::zero() {
        return Ok(ctx.ratio());
    }
    let k = ctx.log_ratio_e();
    let rest = T::one() - ctx.ell(alpha);
    let (l, u) = (ctx.lower, ctx.upper);
    Ok(u * k / (l * alpha * k - l * rest + u * rest))
}

/// `(ϱ + 2)/γ` consistency of LA-ECT under accurate predictions; infinite at
/// `γ = 0`.
pub fn bound_laect_consistency<T: Scalar>(rho: T, gamma: T) -> Result<T> {
    if !(rho >= T::one()) {
        return Err(Error::parameter("rho", rho.as_f64(), "[1, inf)"));
    }
    if !(gamma >= T::zero() && gamma <= T::one()) {
        return Err(Error::parameter("gamma", gamma.as_f64(), "(0, 1]"));
    }
    if gamma == T::zero() {
        return Ok(T::infinity());
    }
    Ok((rho + T::lit(2.0)) / gamma)
}

/// `(ln(U/L) + 1)/(1 - γ)` robustness of LA-ECT; infinite at `γ = 1`.
pub fn bound_laect_robustness<T: Scalar>(ctx: &BoundContext<T>, gamma: T) -> Result<T> {
    ctx.check_gamma(gamma)?;
    if gamma == T::one() {
        return Ok(T::infinity());
    }
    Ok(ctx.log_ratio_e() / (T::one() - gamma))
}

/// Lower bound for α-CTIF algorithms whose fair region starts above `L`:
/// `W(U(1-α)/(Lα) e^{1/α})/(1-α) - 1/α`.
pub fn bound_lemma_add<T: Scalar>(ctx: &BoundContext<T>, alpha: T) -> Result<T> {
    ctx.check_alpha(alpha)?;
    if alpha >= T::one() {
        return Err(Error::parameter("alpha", alpha.as_f64(), "[alpha_min, 1)"));
    }
    let one_minus = T::one() - alpha;
    let arg = ctx.ratio() * one_minus / alpha * (T::one() / alpha).exp();
    Ok(lambert_w0(arg)? / one_minus - T::one() / alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(ratio: f64) -> BoundContext<f64> {
        BoundContext::new(1.0, ratio).unwrap()
    }

    fn grid(c: &BoundContext<f64>, n: usize, top: f64) -> Vec<f64> {
        let a0 = c.alpha_min();
        (0..n)
            .map(|i| a0 + (top - a0) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn pareto_at_alpha_min_is_zcl_ratio() {
        for &r in &[5.0, 500.0, 1250.0, 2500.0] {
            let c = ctx(r);
            let b = bound_pareto_beta(&c, c.alpha_min()).unwrap();
            assert!((b - (r.ln() + 1.0)).abs() < 1e-9, "U/L = {r}: {b}");
        }
    }

    #[test]
    fn pareto_limit_at_one() {
        let c = ctx(5.0);
        assert_eq!(bound_pareto_beta(&c, 1.0).unwrap(), 5.0);
        let near = bound_pareto_beta(&c, 1.0 - 1e-6).unwrap();
        assert!((near - 5.0).abs() / 5.0 < 1e-3);
    }

    #[test]
    fn explicit_and_implicit_pareto_agree() {
        for &r in &[5.0, 500.0, 2500.0] {
            let c = ctx(r);
            for a in grid(&c, 40, 0.999) {
                let explicit = bound_pareto_beta(&c, a).unwrap();
                let implicit = pareto_beta_implicit(&c, a).unwrap();
                assert!(
                    (explicit - implicit).abs() <= 1e-9 * explicit,
                    "r={r} a={a}: {explicit} vs {implicit}"
                );
            }
        }
        let c = ctx(5.0);
        let b = bound_pareto_beta(&c, 0.6).unwrap();
        assert!((((5.0 / (0.6 * b)).ln() / b) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn baseline_spellings_agree_and_limit() {
        let c = ctx(5.0);
        assert!((bound_baseline_cr(&c, 1.0).unwrap() - 5.0).abs() < 1e-12);
        let k = 5f64.ln() + 1.0;
        for a in grid(&c, 50, 1.0) {
            let rest = 1.0 - c.ell(a);
            let statement = 5.0 * k / (a * k + 4.0 * rest);
            let proof = bound_baseline_cr(&c, a).unwrap();
            assert!((statement - proof).abs() < 1e-12 * proof);
        }
        let at_min = bound_baseline_cr(&c, c.alpha_min()).unwrap();
        assert!(at_min.is_finite() && at_min >= k - 1e-12);
    }

    #[test]
    fn pareto_below_baseline_and_raised_floor_bound() {
        for &r in &[5.0, 500.0, 2500.0] {
            let c = ctx(r);
            for a in grid(&c, 60, 1.0 - 1e-3) {
                let p = bound_pareto_beta(&c, a).unwrap();
                assert!(p <= bound_baseline_cr(&c, a).unwrap() * (1.0 + 1e-12));
                assert!(p <= bound_lemma_add(&c, a).unwrap());
            }
        }
    }

    #[test]
    fn raised_floor_bound_matches_its_implicit_form() {
        // β' = (1 + ln(U/(L(1+αβ'))))/(1-α); the right side decreases in β'
        let c = ctx(5.0);
        for &a in &[c.alpha_min(), 0.5, 0.8] {
            let closed = bound_lemma_add(&c, a).unwrap();
            let h = |b: f64| (1.0 + (5.0 / (1.0 + a * b)).ln()) / (1.0 - a) - b;
            let (mut lo, mut hi) = (0.0, 100.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if h(mid) > 0.0 {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            assert!((closed - lo).abs() < 1e-9, "a={a}: {closed} vs {lo}");
        }
        let v = bound_lemma_add(&c, 0.5).unwrap();
        assert!(v.is_finite() && v > 0.0);
        let near = bound_lemma_add(&c, 1.0 - 1e-6).unwrap();
        assert!((near - (5.0 * std::f64::consts::E - 1.0)).abs() < 1e-3 * near);
        assert!(bound_lemma_add(&c, 1.0).is_err());
    }

    #[test]
    fn pareto_increases_in_alpha() {
        let c = ctx(5.0);
        let vals: Vec<f64> = grid(&c, 50, 1.0)
            .into_iter()
            .map(|a| bound_pareto_beta(&c, a).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn laect_bounds() {
        assert_eq!(bound_laect_consistency(1.0, 1.0).unwrap(), 3.0);
        assert!(bound_laect_consistency(1.0f64, 0.0).unwrap().is_infinite());
        assert!(bound_laect_consistency(0.5f64, 0.5).is_err());
        let c = ctx(2500.0);
        assert_eq!(bound_laect_robustness(&c, 0.0).unwrap(), 2500f64.ln() + 1.0);
        let half = bound_laect_robustness(&c, 0.5).unwrap();
        assert!((half - 2.0 * (2500f64.ln() + 1.0)).abs() < 1e-12);
        assert!(bound_laect_robustness(&c, 1.0).unwrap().is_infinite());
    }

    #[test]
    fn out_of_range_alpha_rejected() {
        let c = ctx(5.0);
        assert!(bound_pareto_beta(&c, 0.2).is_err());
        assert!(bound_baseline_cr(&c, 1.2).is_err());
    }
}
