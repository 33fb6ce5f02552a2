//! Roof functions over the circle and their Birkhoff sums.

mod analysis;
mod fourier;
mod power;
mod simple;

pub use analysis::{
    derivative_zero_locator, quadratic_expansion_check, small_derivative_set, QuadExpansion, SmallDerivativeSet,
    ZeroInterval,
};
pub use fourier::{roof_from_timechange, FourierRoof, TimeChange};
pub use power::{MaskedRoof, PowerRoof};
pub use simple::{ArcIndicator, ConstantFn, FnCircle, Sawtooth};

use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::rotation::RotationNumber;
use crate::scalar::Scalar;
use crate::summation::Compensated;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// A real function on the circle `R/Z`.
pub trait CircleFn<F: Scalar>: Send + Sync {
    /// Value at `x`; fails at a singular point.
    fn value(&self, x: Phase) -> Result<F>;

    fn integral(&self) -> F;

    /// Total variation, when finite.
    fn variation(&self) -> Option<F> {
        None
    }

    /// Closed form of `S_n(g)(x)` for `n >= 0`, when one exists.
    fn birkhoff_closed(&self, _x: Phase, _n: u128, _alpha: Phase) -> Option<F> {
        None
    }
}

/// A positive roof with two derivatives away from its singular points.
pub trait Roof<F: Scalar>: CircleFn<F> {
    /// `f`, `f'` or `f''` at `x` for `order` 0, 1, 2.
    fn derivative(&self, x: Phase, order: u8) -> Result<F>;

    /// A lower bound for `f`, exact where the minimum is known.
    fn infimum(&self) -> F;

    /// `f`, `f'` or `f''` at the circle coordinate `x`.
    fn eval(&self, x: F, order: u8) -> Result<F> {
        self.derivative(Phase::from_scalar(x), order)
    }
}

/// `f^{(order)}` viewed as a circle function.
pub struct Derivative<'a, R: ?Sized> {
    pub roof: &'a R,
    pub order: u8,
}

impl<F: Scalar, R: Roof<F> + ?Sized> CircleFn<F> for Derivative<'_, R> {
    fn value(&self, x: Phase) -> Result<F> {
        self.roof.derivative(x, self.order)
    }
    fn integral(&self) -> F {
        if self.order == 0 {
            self.roof.integral()
        } else {
            F::zero()
        }
    }
}

/// Largest `|n|` summed term by term.
pub const NAIVE_LIMIT: u128 = 1 << 40;

fn reindex(e: Error, offset: i64) -> Error {
    match e {
        Error::Singularity { index, x } => Error::Singularity { index: index + offset, x },
        other => other,
    }
}

/// `sum_{0 <= i < n} g(x + i alpha)` term by term.
pub fn birkhoff_forward_naive<F: Scalar, G: CircleFn<F> + ?Sized>(g: &G, n: u128, x: Phase, alpha: Phase) -> Result<F> {
    if n > NAIVE_LIMIT {
        return Err(Error::Resource(format!("Birkhoff sum of length {n} without a closed form")));
    }
    let mut acc = Compensated::<F>::new();
    let mut y = x;
    for i in 0..n {
        acc.add(g.value(y).map_err(|e| reindex(e, i as i64))?);
        y += alpha;
    }
    Ok(acc.value())
}

/// `S_n(g)(x)` with the convention `S_{-m}(g)(x) = -S_m(g)(x - m alpha)`.
/// Uses the closed form when `g` has one.
pub fn birkhoff_sum<F: Scalar, G: CircleFn<F> + ?Sized>(g: &G, n: i128, x: Phase, alpha: &RotationNumber) -> Result<F> {
    birkhoff_sum_phase(g, n, x, alpha.phase())
}

pub fn birkhoff_sum_phase<F: Scalar, G: CircleFn<F> + ?Sized>(g: &G, n: i128, x: Phase, alpha: Phase) -> Result<F> {
    let forward = |m: u128, y: Phase| -> Result<F> {
        match g.birkhoff_closed(y, m, alpha) {
            Some(v) => Ok(v),
            None => birkhoff_forward_naive(g, m, y, alpha),
        }
    };
    if n >= 0 {
        forward(n as u128, x)
    } else {
        let m = n.unsigned_abs();
        forward(m, x - alpha.mul_u128(m)).map(|v| -v).map_err(|e| reindex(e, -(m as i64)))
    }
}

/// Term-by-term `S_n(g)(x)` for any sign of `n`.
pub fn birkhoff_sum_naive<F: Scalar, G: CircleFn<F> + ?Sized>(g: &G, n: i128, x: Phase, alpha: Phase) -> Result<F> {
    if n >= 0 {
        birkhoff_forward_naive(g, n as u128, x, alpha)
    } else {
        let m = n.unsigned_abs();
        birkhoff_forward_naive(g, m, x - alpha.mul_u128(m), alpha).map(|v| -v)
    }
}

/// `int_0^1 f`.
pub fn roof_integral<F: Scalar, G: CircleFn<F> + ?Sized>(g: &G) -> F {
    g.integral()
}

/// Any supported roof, serialised with a `kind` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "F: Scalar + Serialize + DeserializeOwned")]
pub enum RoofFunction<F: Scalar> {
    Power(PowerRoof<F>),
    Fourier(FourierRoof<F>),
    Constant { value: F },
}

impl<F: Scalar> CircleFn<F> for RoofFunction<F> {
    fn value(&self, x: Phase) -> Result<F> {
        match self {
            RoofFunction::Power(r) => r.value(x),
            RoofFunction::Fourier(r) => r.value(x),
            RoofFunction::Constant { value } => Ok(*value),
        }
    }

    fn integral(&self) -> F {
        match self {
            RoofFunction::Power(r) => r.integral(),
            RoofFunction::Fourier(r) => r.integral(),
            RoofFunction::Constant { value } => *value,
        }
    }

    fn variation(&self) -> Option<F> {
        match self {
            RoofFunction::Power(r) => r.variation(),
            RoofFunction::Fourier(r) => r.variation(),
            RoofFunction::Constant { .. } => Some(F::zero()),
        }
    }

    fn birkhoff_closed(&self, x: Phase, n: u128, alpha: Phase) -> Option<F> {
        match self {
            RoofFunction::Power(r) => r.birkhoff_closed(x, n, alpha),
            RoofFunction::Fourier(r) => r.birkhoff_closed(x, n, alpha),
            RoofFunction::Constant { value } => Some(*value * F::of(n as f64)),
        }
    }
}

impl<F: Scalar> Roof<F> for RoofFunction<F> {
    fn derivative(&self, x: Phase, order: u8) -> Result<F> {
        match self {
            RoofFunction::Power(r) => r.derivative(x, order),
            RoofFunction::Fourier(r) => r.derivative(x, order),
            RoofFunction::Constant { value } => Ok(if order == 0 { *value } else { F::zero() }),
        }
    }

    fn infimum(&self) -> F {
        match self {
            RoofFunction::Power(r) => r.infimum(),
            RoofFunction::Fourier(r) => r.infimum(),
            RoofFunction::Constant { value } => *value,
        }
    }
}

impl<F: Scalar> RoofFunction<F> {
    pub fn constant(value: F) -> Result<Self> {
        if !(value > F::zero()) {
            return Err(Error::InvalidInput(format!("constant roof {value} must be positive")));
        }
        Ok(RoofFunction::Constant { value })
    }

    /// Base point where the roof blows up, if any.
    pub fn singular_point(&self) -> Option<Phase> {
        match self {
            RoofFunction::Power(_) => Some(Phase::ZERO),
            _ => None,
        }
    }
}
