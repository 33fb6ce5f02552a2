//! Bounded test functions on the circle.

use super::CircleFn;
use crate::error::Result;
use crate::phase::{Arc, Phase};
use crate::scalar::Scalar;

/// `x - 1/2` on `[0, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sawtooth;

impl<F: Scalar> CircleFn<F> for Sawtooth {
    fn value(&self, x: Phase) -> Result<F> {
        Ok(F::of(x.to_f64() - 0.5))
    }
    fn integral(&self) -> F {
        F::zero()
    }
    fn variation(&self) -> Option<F> {
        Some(F::of(2.0))
    }
}

/// Indicator of a half-open arc.
#[derive(Debug, Clone, Copy)]
pub struct ArcIndicator(pub Arc);

impl<F: Scalar> CircleFn<F> for ArcIndicator {
    fn value(&self, x: Phase) -> Result<F> {
        Ok(if self.0.contains(x) { F::one() } else { F::zero() })
    }
    fn integral(&self) -> F {
        F::of(self.0.len())
    }
    fn variation(&self) -> Option<F> {
        let l = self.0.len();
        Some(if l <= 0.0 || l >= 1.0 { F::zero() } else { F::of(2.0) })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantFn<F>(pub F);

impl<F: Scalar> CircleFn<F> for ConstantFn<F> {
    fn value(&self, _x: Phase) -> Result<F> {
        Ok(self.0)
    }
    fn integral(&self) -> F {
        self.0
    }
    fn variation(&self) -> Option<F> {
        Some(F::zero())
    }
    fn birkhoff_closed(&self, _x: Phase, n: u128, _alpha: Phase) -> Option<F> {
        Some(self.0 * F::of(n as f64))
    }
}

/// A closure on `[0, 1)` with a known integral.
pub struct FnCircle<G> {
    pub f: G,
    pub integral: f64,
    pub variation: Option<f64>,
}

impl<F: Scalar, G: Fn(f64) -> f64 + Send + Sync> CircleFn<F> for FnCircle<G> {
    fn value(&self, x: Phase) -> Result<F> {
        Ok(F::of((self.f)(x.to_f64())))
    }
    fn integral(&self) -> F {
        F::of(self.integral)
    }
    fn variation(&self) -> Option<F> {
        self.variation.map(F::of)
    }
}
