use super::{CircleFn, Roof};
use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::scalar::Scalar;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// `f(x) = kappa (x^gamma + (1 - x)^gamma) + c0` on `(0, 1)`, singular at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "PowerSpec<F>",
    into = "PowerSpec<F>",
    bound = "F: Scalar + Serialize + DeserializeOwned"
)]
pub struct PowerRoof<F: Scalar> {
    gamma: F,
    kappa: F,
    c0: F,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerSpec<F> {
    gamma: F,
    kappa: F,
    c0: F,
}

impl<F: Scalar> TryFrom<PowerSpec<F>> for PowerRoof<F> {
    type Error = Error;
    fn try_from(s: PowerSpec<F>) -> Result<Self> {
        PowerRoof::new(s.gamma, s.kappa, s.c0)
    }
}

impl<F: Scalar> From<PowerRoof<F>> for PowerSpec<F> {
    fn from(r: PowerRoof<F>) -> Self {
        PowerSpec { gamma: r.gamma, kappa: r.kappa, c0: r.c0 }
    }
}

impl<F: Scalar> Default for PowerRoof<F> {
    /// `gamma = -1/2`, `c0 = 0.2`, `kappa` chosen so that the integral is 1.
    fn default() -> Self {
        PowerRoof::normalized(F::of(-0.5), F::of(0.2)).expect("valid defaults")
    }
}

impl<F: Scalar> PowerRoof<F> {
    pub fn new(gamma: F, kappa: F, c0: F) -> Result<Self> {
        if !(gamma > -F::one() && gamma < F::zero()) {
            return Err(Error::InvalidInput(format!("exponent {gamma} outside (-1, 0)")));
        }
        if !(kappa > F::zero()) || !(c0 > F::zero()) {
            return Err(Error::InvalidInput(format!("kappa = {kappa}, c0 = {c0} must be positive")));
        }
        Ok(PowerRoof { gamma, kappa, c0 })
    }

    /// Unit-integral roof with the given exponent and floor.
    pub fn normalized(gamma: F, c0: F) -> Result<Self> {
        let two = F::of(2.0);
        PowerRoof::new(gamma, (F::one() - c0) * (gamma + F::one()) / two, c0)
    }

    pub fn gamma(&self) -> F {
        self.gamma
    }
    pub fn kappa(&self) -> F {
        self.kappa
    }
    pub fn c0(&self) -> F {
        self.c0
    }

    /// Distances `(x, 1 - x)` to the singularity from either side, each
    /// computed without cancellation.
    #[inline]
    fn sides(x: Phase) -> Result<(F, F)> {
        if x == Phase::ZERO {
            return Err(Error::Singularity { index: 0, x: 0.0 });
        }
        let d = x.to_signed_f64();
        let (l, r) = if d >= 0.0 { (d, 1.0 - d) } else { (1.0 + d, -d) };
        if l == 0.0 || r == 0.0 {
            return Err(Error::Singularity { index: 0, x: d });
        }
        Ok((F::of(l), F::of(r)))
    }

    /// Limits `A_i` of `f^{(i)}(x) / x^{gamma - i}` as `x -> 0+`.
    pub fn left_constants(&self) -> [F; 3] {
        let g = self.gamma;
        [self.kappa, self.kappa * g, self.kappa * g * (g - F::one())]
    }

    /// Limits `B_i` of `f^{(i)}(x) / (1 - x)^{gamma - i}` as `x -> 1-`.
    pub fn right_constants(&self) -> [F; 3] {
        let g = self.gamma;
        [self.kappa, -self.kappa * g, self.kappa * g * (g - F::one())]
    }

    /// `int_r^{1-r} f`.
    pub fn integral_outside(&self, r: F) -> F {
        let g1 = self.gamma + F::one();
        let two = F::of(2.0);
        two * self.kappa * ((F::one() - r).powf(g1) - r.powf(g1)) / g1 + self.c0 * (F::one() - two * r)
    }
}

impl<F: Scalar> CircleFn<F> for PowerRoof<F> {
    #[inline]
    fn value(&self, x: Phase) -> Result<F> {
        let (l, r) = Self::sides(x)?;
        Ok(self.kappa * (l.powf(self.gamma) + r.powf(self.gamma)) + self.c0)
    }

    fn integral(&self) -> F {
        F::of(2.0) * self.kappa / (self.gamma + F::one()) + self.c0
    }
}

impl<F: Scalar> Roof<F> for PowerRoof<F> {
    fn derivative(&self, x: Phase, order: u8) -> Result<F> {
        let (l, r) = Self::sides(x)?;
        let g = self.gamma;
        Ok(match order {
            0 => self.kappa * (l.powf(g) + r.powf(g)) + self.c0,
            1 => self.kappa * g * (l.powf(g - F::one()) - r.powf(g - F::one())),
            2 => {
                let g2 = g - F::of(2.0);
                self.kappa * g * (g - F::one()) * (l.powf(g2) + r.powf(g2))
            }
            _ => return Err(Error::InvalidInput(format!("derivative order {order}"))),
        })
    }

    fn infimum(&self) -> F {
        self.value(Phase::HALF).expect("1/2 is regular")
    }
}

/// `f` with the arc `||x|| < radius` around the singularity set to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskedRoof<F: Scalar> {
    pub roof: PowerRoof<F>,
    pub radius: F,
}

impl<F: Scalar> CircleFn<F> for MaskedRoof<F> {
    fn value(&self, x: Phase) -> Result<F> {
        if F::of(x.norm()) < self.radius {
            Ok(F::zero())
        } else {
            self.roof.value(x)
        }
    }

    fn integral(&self) -> F {
        self.roof.integral_outside(self.radius)
    }
}
