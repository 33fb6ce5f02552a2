//! Floating-point scalar abstraction.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};

/// Floating point scalar used by roofs, Birkhoff sums and the special flow.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`.
    fn of(v: f64) -> Self;

    /// Lossy conversion to `f64`.
    fn to64(self) -> f64;

    /// Machine epsilon scaled for tolerance arithmetic.
    fn eps() -> Self {
        Self::epsilon()
    }
}

impl Scalar for f32 {
    #[inline]
    fn of(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn to64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn of(v: f64) -> Self {
        v
    }
    #[inline]
    fn to64(self) -> f64 {
        self
    }
}

/// Distance from `x` to the nearest integer, in `[0, 1/2]`.
#[inline]
pub fn circle_norm<F: Scalar>(x: F) -> F {
    let r = x - x.floor();
    r.min(F::one() - r)
}

/// Reduce `x` into `[0, 1)`.
#[inline]
pub fn frac<F: Scalar>(x: F) -> F {
    let r = x - x.floor();
    if r >= F::one() {
        F::zero()
    } else {
        r
    }
}
