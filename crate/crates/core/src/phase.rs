//! Points of the circle `R/Z` in 128-bit fixed point.
//!
//! A [`Phase`] stores `floor(x * 2^128) mod 2^128`. Addition and integer
//! multiplication wrap, which is exactly reduction mod 1, so rotation orbits
//! `x + i*alpha` accumulate no drift beyond the `2^-128` quantisation of alpha.

use crate::scalar::Scalar;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

const TWO64: f64 = 18_446_744_073_709_551_616.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Phase(pub u128);

impl Phase {
    pub const ZERO: Phase = Phase(0);
    pub const HALF: Phase = Phase(1u128 << 127);

    /// Exact conversion of `frac(x)` for finite `x`.
    pub fn from_f64(x: f64) -> Phase {
        debug_assert!(x.is_finite());
        if x < 0.0 {
            return -Phase::from_f64(-x);
        }
        let mut r = x - x.floor();
        if r >= 1.0 {
            r = 0.0;
        }
        let scaled = r * TWO64;
        let hi = scaled.floor();
        let lo = (scaled - hi) * TWO64;
        Phase(((hi as u64 as u128) << 64) | (lo.floor() as u64 as u128))
    }

    pub fn from_scalar<F: Scalar>(x: F) -> Phase {
        Phase::from_f64(x.to64())
    }

    /// Representative in `[0, 1)`. Values that round up to 1 map to 0.
    pub fn to_f64(self) -> f64 {
        let v = (self.0 >> 64) as f64 / TWO64 + (self.0 as u64) as f64 / (TWO64 * TWO64);
        if v >= 1.0 {
            0.0
        } else {
            v
        }
    }

    /// Representative in `[-1/2, 1/2)`; keeps full relative precision near 0.
    pub fn to_signed_f64(self) -> f64 {
        if self.0 >= Self::HALF.0 {
            -Phase(self.0.wrapping_neg()).to_f64()
        } else {
            self.to_f64()
        }
    }

    pub fn to_scalar<F: Scalar>(self) -> F {
        F::of(self.to_f64())
    }

    pub fn to_signed_scalar<F: Scalar>(self) -> F {
        F::of(self.to_signed_f64())
    }

    /// Distance to the nearest integer, in `[0, 1/2]`.
    pub fn norm(self) -> f64 {
        self.to_signed_f64().abs()
    }

    #[inline]
    pub fn mul_u128(self, k: u128) -> Phase {
        Phase(self.0.wrapping_mul(k))
    }

    #[inline]
    pub fn mul_i128(self, k: i128) -> Phase {
        if k >= 0 {
            self.mul_u128(k as u128)
        } else {
            -self.mul_u128(k.unsigned_abs())
        }
    }

    /// `t x mod 1` for real `t`: the integer part of `t` acts exactly.
    pub fn mul_f64(self, t: f64) -> Phase {
        let whole = t.floor();
        let int_part = if whole.abs() < 1e38 { self.mul_i128(whole as i128) } else { Phase::ZERO };
        int_part + Phase::from_f64((t - whole) * self.to_f64())
    }

    /// Whether `self` lies in the half-open arc `[start, start + len)`; `len` in `[0, 1]`.
    pub fn in_arc(self, start: Phase, len: f64) -> bool {
        if len >= 1.0 {
            return true;
        }
        if len <= 0.0 {
            return false;
        }
        let off = (self - start).0;
        off < Phase::from_f64(len).0
    }
}

impl Add for Phase {
    type Output = Phase;
    #[inline]
    fn add(self, o: Phase) -> Phase {
        Phase(self.0.wrapping_add(o.0))
    }
}

impl AddAssign for Phase {
    #[inline]
    fn add_assign(&mut self, o: Phase) {
        self.0 = self.0.wrapping_add(o.0);
    }
}

impl Sub for Phase {
    type Output = Phase;
    #[inline]
    fn sub(self, o: Phase) -> Phase {
        Phase(self.0.wrapping_sub(o.0))
    }
}

impl SubAssign for Phase {
    #[inline]
    fn sub_assign(&mut self, o: Phase) {
        self.0 = self.0.wrapping_sub(o.0);
    }
}

impl Neg for Phase {
    type Output = Phase;
    #[inline]
    fn neg(self) -> Phase {
        Phase(self.0.wrapping_neg())
    }
}

/// Half-open arc `[start, end)` of the circle; `full` marks the whole circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    start: Phase,
    end: Phase,
    full: bool,
}

impl Arc {
    pub fn new(start: f64, len: f64) -> Arc {
        if len >= 1.0 {
            return Arc::full();
        }
        let s = Phase::from_f64(start);
        let e = if len <= 0.0 { s } else { Phase::from_f64(start + len) };
        Arc { start: s, end: e, full: false }
    }

    pub fn from_phases(start: Phase, end: Phase) -> Arc {
        Arc { start, end, full: false }
    }

    pub fn full() -> Arc {
        Arc { start: Phase::ZERO, end: Phase::ZERO, full: true }
    }

    pub fn empty() -> Arc {
        Arc { start: Phase::ZERO, end: Phase::ZERO, full: false }
    }

    #[inline]
    pub fn contains(&self, x: Phase) -> bool {
        self.full || (x - self.start).0 < (self.end - self.start).0
    }

    pub fn start(&self) -> f64 {
        self.start.to_f64()
    }

    pub fn start_phase(&self) -> Phase {
        self.start
    }

    pub fn end_phase(&self) -> Phase {
        self.end
    }

    pub fn len(&self) -> f64 {
        if self.full {
            1.0
        } else {
            (self.end - self.start).to_f64()
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.full && self.start == self.end
    }
}
