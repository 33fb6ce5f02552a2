//! Time changes `T_t^{alpha,v}` of the linear flow
//! `L_t(x1, x2) = (x1 + t alpha, x2 + t)` on the 2-torus.

mod coboundary;

pub use coboundary::Coboundary;

use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::roof::{roof_from_timechange, FourierRoof, TimeChange};
use crate::rotation::RotationNumber;
use num_bigint::BigUint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub x1: f64,
    pub x2: f64,
}

fn reduce(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

fn signed(v: f64) -> f64 {
    let r = reduce(v);
    if r >= 0.5 {
        r - 1.0
    } else {
        r
    }
}

impl TorusPoint {
    pub fn new(x1: f64, x2: f64) -> Self {
        TorusPoint { x1: reduce(x1), x2: reduce(x2) }
    }

    /// Euclidean distance on `R^2 / Z^2`.
    pub fn distance(&self, o: &TorusPoint) -> f64 {
        signed(self.x1 - o.x1).hypot(signed(self.x2 - o.x2))
    }
}

/// `e(phi/2) sin(pi phi) / (pi lambda) = (e(phi) - 1) / (2 pi i lambda)`.
fn em1_over(phi: f64, lambda: f64) -> Complex64 {
    let h = PI * phi;
    Complex64::new(h.cos(), h.sin()) * (h.sin() / (PI * lambda))
}

fn expi(theta: f64) -> Complex64 {
    let t = TAU * theta;
    Complex64::new(t.cos(), t.sin())
}

#[derive(Debug, Clone, Copy)]
struct Mode {
    q: u64,
    m: i64,
    a: Complex64,
    lambda: f64,
}

/// Time change of the linear flow by a positive trigonometric polynomial
/// `v = 1 + Re sum a_{q,m} e(q x1 + m x2)`.
#[derive(Debug, Clone)]
pub struct ReparamFlow {
    alpha: RotationNumber,
    v: TimeChange<f64>,
    modes: Vec<Mode>,
    inf: f64,
    sup: f64,
}

pub const NEWTON_CAP: usize = 80;

impl ReparamFlow {
    pub fn new(alpha: RotationNumber, v: TimeChange<f64>) -> Self {
        let a = alpha.value();
        let modes = v
            .modes()
            .iter()
            .map(|&(q, m, c)| Mode { q, m, a: c, lambda: q as f64 * a + m as f64 })
            .collect();
        let (inf, sup) = (v.infimum(), v.supremum());
        ReparamFlow { alpha, v, modes, inf, sup }
    }

    /// Default time change on the flagged levels of `alpha`.
    pub fn default_for(alpha: RotationNumber) -> Result<Self> {
        let levels = alpha.flags().to_vec();
        let v = TimeChange::default_for(&alpha, &levels, 0.6)?;
        Ok(Self::new(alpha, v))
    }

    pub fn alpha(&self) -> &RotationNumber {
        &self.alpha
    }

    pub fn time_change(&self) -> &TimeChange<f64> {
        &self.v
    }

    fn theta0(&self, md: &Mode, x: &TorusPoint) -> f64 {
        (Phase::from_f64(x.x1).mul_u128(md.q as u128) + Phase::from_f64(x.x2).mul_i128(md.m as i128)).to_signed_f64()
    }

    pub fn linear(&self, x: &TorusPoint, u: f64) -> TorusPoint {
        let a = Phase::from_f64(x.x1) + self.alpha.phase().mul_f64(u);
        TorusPoint::new(a.to_f64(), x.x2 + u)
    }

    /// `v(L_u x)`.
    pub fn speed(&self, x: &TorusPoint, u: f64) -> f64 {
        let mut s = 1.0;
        for md in &self.modes {
            s += (md.a * expi(self.theta0(md, x) + md.lambda * u)).re;
        }
        s
    }

    /// Density of the invariant measure, `v` itself.
    pub fn density(&self, x: &TorusPoint) -> f64 {
        self.speed(x, 0.0)
    }

    /// `int_0^t v(L_s x) ds`, closed form.
    pub fn cocycle_integral(&self, t: f64, x: &TorusPoint) -> f64 {
        let mut s = t;
        for md in &self.modes {
            s += (md.a * expi(self.theta0(md, x)) * em1_over(md.lambda * t, md.lambda)).re;
        }
        s
    }

    /// The `u` with `int_0^u v(L_s x) ds = t`: Newton inside a shrinking
    /// bracket, bisecting whenever a step leaves it.
    pub fn time_inverse(&self, t: f64, x: &TorusPoint) -> f64 {
        if t == 0.0 || self.modes.is_empty() {
            return t;
        }
        let (mut lo, mut hi) = if t > 0.0 { (t / self.sup, t / self.inf) } else { (t / self.inf, t / self.sup) };
        let tol = 1e-12 * (1.0 + t.abs());
        let mut u = t.clamp(lo, hi);
        for _ in 0..NEWTON_CAP {
            let r = self.cocycle_integral(u, x) - t;
            if r.abs() <= tol {
                return u;
            }
            if r > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let next = u - r / self.speed(x, u);
            u = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo <= f64::EPSILON * u.abs() {
                return u;
            }
        }
        u
    }

    /// `T_t^{alpha,v}(x) = L_{u(t,x)}(x)`.
    pub fn evaluate(&self, t: f64, x: &TorusPoint) -> TorusPoint {
        self.linear(x, self.time_inverse(t, x))
    }

    /// `d(T_N x, x)` for integer `N`, with `N q alpha mod 1` reduced exactly
    /// so that displacements far below `2^-53 N` stay resolved.
    pub fn rigidity_distance(&self, x: &TorusPoint, n: &BigUint) -> f64 {
        // T_N x = L_{N + delta} x, where D(delta) = 0
        let phases: Vec<(Complex64, f64)> = self
            .modes
            .iter()
            .map(|md| {
                let pn = self.alpha.multiple_signed(&(n * BigUint::from(md.q)));
                (md.a * expi(self.theta0(md, x)), pn)
            })
            .collect();
        let d = |delta: f64| -> (f64, f64) {
            let mut val = delta;
            let mut der = 1.0;
            for (md, &(c, pn)) in self.modes.iter().zip(&phases) {
                let phi = pn + md.lambda * delta;
                val += (c * em1_over(phi, md.lambda)).re;
                der += (c * expi(phi)).re;
            }
            (val, der)
        };
        let mut delta = 0.0;
        for _ in 0..NEWTON_CAP {
            let (val, der) = d(delta);
            let step = val / der;
            delta -= step;
            if step.abs() <= 1e-17 * (1.0 + delta.abs()) || step == 0.0 {
                break;
            }
        }
        let dx = self.alpha.multiple_signed(n) + delta * self.alpha.value();
        dx.hypot(delta)
    }

    /// Fibre average `x -> int_0^1 v(x, s) ds`, the `m = 0` part of `v`.
    pub fn averaged_roof(&self) -> Result<FourierRoof<f64>> {
        roof_from_timechange(&self.v)
    }

    /// First-return time to `{x2 = 0}`, `x -> int_0^1 v(x + s alpha, s) ds`.
    pub fn return_roof(&self) -> Result<FourierRoof<f64>> {
        let pairs = self
            .modes
            .iter()
            .map(|md| {
                let phi = self.alpha.multiple_signed(&BigUint::from(md.q));
                (md.q, md.a * em1_over(phi, md.lambda))
            })
            .collect();
        FourierRoof::new(pairs)
    }

    /// Katok ratios at every flagged level, on the averaged roof with
    /// `fhat(q) = b_q / 2`.
    pub fn katok_ratios(&self) -> Result<Vec<KatokLevel>> {
        if self.v.is_unit() {
            return Ok(Vec::new());
        }
        let roof = self.averaged_roof()?;
        let mut out = Vec::new();
        for &n in self.alpha.flags() {
            let q = self.alpha.q(n).clone();
            let Some(q) = num_traits::ToPrimitive::to_u64(&q) else {
                return Err(Error::Overflow(format!("q_{n} exceeds 64 bits")));
            };
            let fq = roof.fhat(q).norm();
            let mut all = 0.0;
            for &(p, b) in roof.pairs() {
                if p % q == 0 {
                    all += 0.5 * b.norm();
                }
            }
            let tail = all - fq;
            let norm = self.alpha.norm_q(n);
            out.push(KatokLevel {
                n,
                q,
                norm_q: norm,
                fhat: fq,
                ratio1: (fq > 0.0).then(|| norm / fq),
                ratio2: (all > 0.0).then(|| fq / all),
                ratio2_tail: (tail > 0.0).then(|| fq / tail),
                zero_coefficient: fq == 0.0,
            });
        }
        Ok(out)
    }

    pub fn manifest(&self) -> FlowManifest {
        FlowManifest {
            alpha: self.alpha.clone(),
            coefficients: self.v.modes().iter().map(|&(q, m, a)| (q, m, a.re, a.im)).collect(),
            truncation: self.alpha.depth(),
        }
    }

    pub fn from_manifest(m: FlowManifest) -> Result<Self> {
        let v = TimeChange::new(m.coefficients.iter().map(|&(q, k, re, im)| (q, k, Complex64::new(re, im))).collect())?;
        Ok(Self::new(m.alpha, v))
    }
}

/// Per-level Katok weak-mixing ratios.
#[derive(Debug, Clone, Serialize)]
pub struct KatokLevel {
    pub n: usize,
    pub q: u64,
    pub norm_q: f64,
    pub fhat: f64,
    /// `||q_n alpha|| / |fhat(q_n)|`.
    pub ratio1: Option<f64>,
    /// `|fhat(q_n)| / sum_{k >= 1} |fhat(k q_n)|`.
    pub ratio2: Option<f64>,
    /// Same with the sum from `k = 2`; `None` when that tail vanishes.
    pub ratio2_tail: Option<f64>,
    pub zero_coefficient: bool,
}

/// JSON `{alpha, coefficients: [[q, m, re, im]], truncation}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowManifest {
    pub alpha: RotationNumber,
    pub coefficients: Vec<(u64, i64, f64, f64)>,
    pub truncation: usize,
}
