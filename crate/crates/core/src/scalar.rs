//! The floating-point scalar abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point: `f32` or `f64`.
///
/// Everything that touches item values, densities and threshold functions is
/// written against this trait. Utilization is tracked separately in integer
/// units of `1/m`, so the scalar never enters feasibility checks.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + FromStr
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion from a count.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance used where two analytically equal quantities are
    /// computed along different float paths.
    fn rel_tol() -> Self;
}

impl Scalar for f32 {
    fn rel_tol() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    fn rel_tol() -> Self {
        1e-12
    }
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub(crate) fn approx_eq<T: Scalar>(a: T, b: T, tol: T) -> bool {
    let scale = T::one().max(a.abs()).max(b.abs());
    (a - b).abs() <= tol * scale
}
