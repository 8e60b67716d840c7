//! Principal branch of the Lambert W function.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_ITERATIONS: usize = 50;

/// Residual tolerance relative to `max(1, |x|)`.
fn residual_tol<T: Scalar>() -> T {
    T::lit(1e-14).max(T::epsilon() * T::lit(4.0))
}

/// `W0(x)`: the `w >= -1` solving `w * e^w = x`, for `x >= -1/e`.
///
/// Halley iteration from `ln(1 + x)` on the positive axis and from the
/// branch-point series on `[-1/e, 0)`.
pub fn lambert_w0<T: Scalar>(x: T) -> Result<T> {
    let inv_e = T::one() / T::E();
    if x.is_nan() {
        return Err(Error::Domain("lambert_w0 of NaN".into()));
    }
    if x < -inv_e {
        // -1/e itself is not representable; accept arguments that miss it by rounding
        if x >= -inv_e * (T::one() + T::epsilon() * T::lit(4.0)) {
            return Ok(-T::one());
        }
        return Err(Error::Domain(format!("lambert_w0({x}) below -1/e")));
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    if x.is_infinite() {
        return Ok(x);
    }

    let mut w = if x < T::zero() {
        let p = (T::lit(2.0) * (T::E() * x + T::one())).max(T::zero()).sqrt();
        -T::one() + p - p * p / T::lit(3.0) + T::lit(11.0 / 72.0) * p * p * p
    } else {
        x.ln_1p()
    };

    let tol = residual_tol::<T>() * T::one().max(x.abs());
    let two = T::lit(2.0);
    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= tol {
            break;
        }
        let wp1 = w + T::one();
        if wp1 == T::zero() {
            break;
        }
        let step = f / (ew * wp1 - (w + two) * f / (two * wp1));
        w = w - step;
        if step.abs() <= T::epsilon() * (T::one() + w.abs()) {
            break;
        }
    }
    Ok(w.max(-T::one()))
}
