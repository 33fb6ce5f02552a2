use crate::roof::TimeChange;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// `c + Re sum c_{k,l} e(k x1 + l x2)` on the 2-torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "TorusSpec", into = "TorusSpec")]
pub struct TorusObservable {
    pub constant: f64,
    pub modes: Vec<(i64, i64, Complex64)>,
}

/// JSON `{constant, modes: [[k, l, re, im]]}`.
#[derive(Serialize, Deserialize)]
struct TorusSpec {
    constant: f64,
    modes: Vec<(i64, i64, f64, f64)>,
}

impl From<TorusSpec> for TorusObservable {
    fn from(s: TorusSpec) -> Self {
        TorusObservable::new(s.constant, s.modes.into_iter().map(|(k, l, re, im)| (k, l, Complex64::new(re, im))).collect())
    }
}

impl From<TorusObservable> for TorusSpec {
    fn from(o: TorusObservable) -> Self {
        TorusSpec { constant: o.constant, modes: o.modes.into_iter().map(|(k, l, c)| (k, l, c.re, c.im)).collect() }
    }
}

impl TorusObservable {
    pub fn new(constant: f64, modes: Vec<(i64, i64, Complex64)>) -> Self {
        TorusObservable { constant, modes }
    }

    pub fn zero() -> Self {
        Self::new(0.0, Vec::new())
    }

    /// `cos(2 pi x1)`.
    pub fn cos_x1() -> Self {
        Self::new(0.0, vec![(1, 0, Complex64::new(1.0, 0.0))])
    }

    pub fn value(&self, x1: f64, x2: f64) -> f64 {
        let mut s = self.constant;
        for &(k, l, c) in &self.modes {
            let th = TAU * (k as f64 * x1 + l as f64 * x2);
            s += c.re * th.cos() - c.im * th.sin();
        }
        s
    }

    pub fn sup_bound(&self) -> f64 {
        self.constant.abs() + self.modes.iter().map(|m| m.2.norm()).sum::<f64>()
    }

    pub fn mean_leb(&self) -> f64 {
        self.constant
    }

    /// Mean against `v dLeb`, exact from the coefficients.
    pub fn mean_mu(&self, v: &TimeChange<f64>) -> f64 {
        let mut s = self.constant;
        for &(k, l, c) in &self.modes {
            for &(q, m, a) in v.modes() {
                let (q, m) = (q as i64, m);
                if (k, l) == (q, m) {
                    s += 0.5 * (c * a.conj()).re;
                }
                if (k, l) == (-q, -m) {
                    s += 0.5 * (c * a).re;
                }
            }
            if (k, l) == (0, 0) {
                s += c.re;
            }
        }
        s
    }

    /// Shift the constant so the `v dLeb` mean vanishes.
    pub fn centred(mut self, v: &TimeChange<f64>) -> Self {
        self.constant -= self.mean_mu(v);
        self
    }

    pub fn scaled(&self, a: f64) -> Self {
        TorusObservable { constant: a * self.constant, modes: self.modes.iter().map(|&(k, l, c)| (k, l, c * a)).collect() }
    }
}
