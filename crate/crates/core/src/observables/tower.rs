use super::TorusObservable;
use crate::error::{Error, Result};
use crate::flow::TowerFn;
use crate::phase::Phase;
use crate::quadrature;
use crate::roof::Roof;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `psi(y, s) = psi_inf + A e^{-s/sigma} u(y) sin^2(pi s / f(y))`.
///
/// The vertical factor vanishes at both ends of every fibre, so the value
/// at the roof and at the base above `y + alpha` both equal `psi_inf`, and
/// the `e^{-s/sigma}` decay pushes the observable to `psi_inf` up the
/// cusp. Only the `x1` modes of `u` are used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerObservable {
    pub psi_inf: f64,
    pub amplitude: f64,
    pub sigma: f64,
    pub u: TorusObservable,
}

impl TowerObservable {
    pub fn new(psi_inf: f64, amplitude: f64, sigma: f64, u: TorusObservable) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidInput(format!("decay scale {sigma} must be positive")));
        }
        if u.modes.iter().any(|m| m.1 != 0) {
            return Err(Error::InvalidInput("horizontal shape depends on x2".into()));
        }
        let o = TowerObservable { psi_inf, amplitude, sigma, u };
        // the shape w(r) = sin^2(pi r) must vanish at the fibre ends
        let w1 = (PI).sin().powi(2);
        let bound = o.amplitude.abs() * o.u.sup_bound();
        if bound * w1 > 1e-12 {
            return Err(Error::Consistency(format!("roof matching residual {}", bound * w1)));
        }
        for r in [10.0, 100.0, 1000.0] {
            if o.tail_bound(r) > bound * (-r / sigma).exp() * (1.0 + 1e-12) {
                return Err(Error::Consistency(format!("decay bound fails at height {r}")));
            }
        }
        Ok(o)
    }

    /// `psi_inf = 0.5`, `sigma = 5`, `u = cos 2 pi y`.
    pub fn default_bank() -> Vec<TowerObservable> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        vec![
            TowerObservable::new(0.5, 1.0, 5.0, TorusObservable::cos_x1()).unwrap(),
            TowerObservable::new(0.0, 1.0, 2.0, TorusObservable::new(0.2, vec![(1, 0, c(0.0, 1.0)), (2, 0, c(0.5, 0.0))])).unwrap(),
            TowerObservable::new(-0.3, 0.8, 10.0, TorusObservable::new(1.0, vec![(3, 0, c(0.3, 0.3))])).unwrap(),
        ]
    }

    pub fn constant(c: f64) -> Self {
        TowerObservable::new(c, 0.0, 1.0, TorusObservable::zero()).unwrap()
    }

    pub fn rho(&self, s: f64) -> f64 {
        self.amplitude * (-s / self.sigma).exp()
    }

    /// `sup_y |psi(y, r) - psi_inf|` bound `|rho(r)| sup|u| sup|w|`.
    pub fn tail_bound(&self, r: f64) -> f64 {
        self.rho(r).abs() * self.u.sup_bound()
    }

    fn u_at(&self, y: Phase) -> f64 {
        self.u.value(y.to_f64(), 0.0)
    }

    /// `int_a^b e^{-s/sigma} sin^2(pi s / h) ds`.
    fn profile_integral(&self, a: f64, b: f64, h: f64) -> f64 {
        let sg = self.sigma;
        let j0 = sg * ((-a / sg).exp() - (-b / sg).exp());
        let c = Complex64::new(-1.0 / sg, 2.0 * PI / h);
        let jc = (((c * b).exp() - (c * a).exp()) / c).re;
        0.5 * (j0 - jc)
    }

    /// `int_T int_0^{f(y)} psi ds dy`, divided by `int f` when `normalized`.
    /// The `y` integral is taken in `t` with `y = t^2` on both sides of 0.
    pub fn space_average<R: Roof<f64> + ?Sized>(&self, roof: &R, normalized: bool) -> Result<f64> {
        let mean_f = roof.integral();
        let mut total = self.psi_inf * mean_f;
        if self.amplitude != 0.0 {
            let side = |y: Phase| -> f64 {
                let h = roof.value(y).unwrap_or(f64::INFINITY);
                if h.is_infinite() {
                    return self.amplitude * self.u_at(y) * 0.5 * self.sigma;
                }
                self.amplitude * self.u_at(y) * self.profile_integral(0.0, h, h)
            };
            let g = |t: f64| {
                let y = t * t;
                2.0 * t * (side(Phase::from_f64(y)) + side(-Phase::from_f64(y)))
            };
            total += quadrature::integrate(g, 0.0, 0.5f64.sqrt(), 1e-13, 1e-10)?;
        }
        Ok(if normalized { total / mean_f } else { total })
    }
}

impl TowerFn for TowerObservable {
    fn value(&self, y: Phase, s: f64, height: f64) -> f64 {
        if self.amplitude == 0.0 {
            return self.psi_inf;
        }
        let w = (PI * s / height).sin();
        self.psi_inf + self.rho(s) * self.u_at(y) * w * w
    }

    fn fibre_integral(&self, y: Phase, a: f64, b: f64, height: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let rest = if self.amplitude == 0.0 { 0.0 } else { self.amplitude * self.u_at(y) * self.profile_integral(a, b, height) };
        Ok(self.psi_inf * (b - a) + rest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roof::{PowerRoof, RoofFunction};

    #[test]
    fn default_values() {
        let o = &TowerObservable::default_bank()[0];
        let y = Phase::from_f64(0.3);
        assert_eq!(o.value(y, 0.0, 2.0), 0.5);
        assert!((o.value(y, 2.0, 2.0) - 0.5).abs() < 1e-12);
        assert!((o.tail_bound(50.0) - (-10f64).exp()).abs() < 1e-18);
        let flat = TowerObservable::new(0.7, 0.0, 5.0, TorusObservable::cos_x1()).unwrap();
        assert_eq!(flat.value(y, 1.0, 2.0), 0.7);
        let no_u = TowerObservable::new(0.7, 1.0, 5.0, TorusObservable::zero()).unwrap();
        assert_eq!(no_u.value(y, 1.0, 2.0), 0.7);
    }

    #[test]
    fn closed_fibre_integral() {
        for o in TowerObservable::default_bank() {
            let y = Phase::from_f64(0.17);
            let closed = o.fibre_integral(y, 0.3, 2.9, 3.5).unwrap();
            let quad = quadrature::integrate(|s| o.value(y, s, 3.5), 0.3, 2.9, 1e-14, 1e-12).unwrap();
            assert!((closed - quad).abs() < 1e-11);
        }
    }

    #[test]
    fn constant_space_average() {
        let roof = RoofFunction::Power(PowerRoof::<f64>::default());
        let c = TowerObservable::constant(2.5);
        assert!((c.space_average(&roof, true).unwrap() - 2.5).abs() < 1e-14);
        let v = TowerObservable::default_bank()[0].space_average(&roof, true).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(TowerObservable::new(0.0, 1.0, 0.0, TorusObservable::cos_x1()).is_err());
        assert!(TowerObservable::new(0.0, 1.0, 1.0, TorusObservable::new(0.0, vec![(0, 1, Complex64::new(1.0, 0.0))])).is_err());
    }
}
