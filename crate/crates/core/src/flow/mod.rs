//! Special flow `T_t(x, s) = (x + N alpha, s + t - S_N(f)(x))` under a roof.

mod integral;
mod structure;

pub use integral::{orbit_trace, write_trace_csv, FiberWalker, TowerFn, TraceRow};
pub use structure::{AbReport, Direction, Interval, IntervalSet, VisitSet, WindowReport};

use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::roof::{birkhoff_sum_phase, Roof};
use crate::rotation::RotationNumber;
use crate::scalar::Scalar;
use crate::summation::Compensated;
use serde::Serialize;

/// A point `(x, s)` of the tower, `0 <= s < f(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowPoint<F> {
    pub x: Phase,
    pub s: F,
}

impl<F: Scalar> FlowPoint<F> {
    pub fn new<R: Roof<F> + ?Sized>(roof: &R, x: Phase, s: F) -> Result<Self> {
        let fx = roof.value(x)?;
        if !(s >= F::zero() && s < fx) {
            return Err(Error::InvalidInput(format!("height {s} outside [0, f(x) = {fx})")));
        }
        Ok(FlowPoint { x, s })
    }

    /// `d(x, y) + |s - s'|`.
    pub fn tower_metric(&self, other: &FlowPoint<F>) -> F {
        F::of((self.x - other.x).norm()) + (self.s - other.s).abs()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlowStepRecord {
    pub x: f64,
    pub s: f64,
    pub n: i64,
    pub consumed: f64,
}

/// Result of flowing for time `t`: endpoint, hit count `N` and `S_N(f)(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowStep<F> {
    pub point: FlowPoint<F>,
    pub n: i64,
    pub consumed: F,
}

impl<F: Scalar> FlowStep<F> {
    pub fn record(&self) -> FlowStepRecord {
        FlowStepRecord { x: self.point.x.to_f64(), s: self.point.s.to64(), n: self.n, consumed: self.consumed.to64() }
    }
}

/// Tolerance on the defining inclusion `s + t - S_N(f)(x) in [0, f(x + N alpha))`.
pub const INCLUSION_TOL: f64 = 1e-7;

/// The special flow over rotation by `alpha` under `roof`.
#[derive(Debug, Clone)]
pub struct SpecialFlow<F: Scalar, R: Roof<F>> {
    roof: R,
    alpha: RotationNumber,
    phase: Phase,
    block: usize,
    _f: std::marker::PhantomData<F>,
}

impl<F: Scalar, R: Roof<F>> SpecialFlow<F, R> {
    pub fn new(roof: R, alpha: RotationNumber) -> Self {
        let phase = alpha.phase();
        SpecialFlow { roof, alpha, phase, block: 256, _f: std::marker::PhantomData }
    }

    pub fn roof(&self) -> &R {
        &self.roof
    }

    pub fn alpha(&self) -> &RotationNumber {
        &self.alpha
    }

    pub fn alpha_phase(&self) -> Phase {
        self.phase
    }

    pub fn point(&self, x: f64, s: F) -> Result<FlowPoint<F>> {
        FlowPoint::new(&self.roof, Phase::from_f64(x), s)
    }

    fn has_closed_form(&self) -> bool {
        self.roof.birkhoff_closed(Phase::ZERO, 0, self.phase).is_some()
    }

    fn finish(&self, p: &FlowPoint<F>, t: F, n: i64, consumed: F) -> Result<FlowStep<F>> {
        let y = p.x + self.phase.mul_i128(n as i128);
        let rem = (p.s + t) - consumed;
        let fy = self.roof.value(y).map_err(|e| shift(e, n))?;
        let tol = F::of(INCLUSION_TOL);
        if rem < -tol || rem >= fy + tol {
            return Err(Error::Precision(format!(
                "inclusion residual {rem} outside [0, {fy}) after {n} roof crossings"
            )));
        }
        let s = rem.max(F::zero()).min(fy * (F::one() - F::eps()));
        Ok(FlowStep { point: FlowPoint { x: y, s }, n, consumed })
    }

    /// Fibre-by-fibre stepping with a compensated running sum.
    pub fn evaluate_naive(&self, p: &FlowPoint<F>, t: F) -> Result<FlowStep<F>> {
        let target = p.s + t;
        let mut acc = Compensated::<F>::new();
        let mut n: i64 = 0;
        let mut y = p.x;
        if target >= F::zero() {
            loop {
                let fy = self.roof.value(y).map_err(|e| shift(e, n))?;
                let mut next = acc;
                next.add(fy);
                if target - next.value() < F::zero() {
                    break;
                }
                acc = next;
                n += 1;
                y += self.phase;
            }
        } else {
            while target + acc.value() < F::zero() {
                n -= 1;
                y -= self.phase;
                acc.add(self.roof.value(y).map_err(|e| shift(e, n))?);
            }
            return self.finish(p, t, n, -acc.value());
        }
        self.finish(p, t, n, acc.value())
    }

    /// Hit count and endpoint using closed-form Birkhoff sums where the roof
    /// has them (bisection on `N`), and 256-term blocks otherwise.
    pub fn evaluate(&self, p: &FlowPoint<F>, t: F) -> Result<FlowStep<F>> {
        if self.has_closed_form() {
            self.evaluate_closed(p, t)
        } else {
            self.evaluate_blocked(p, t)
        }
    }

    fn evaluate_closed(&self, p: &FlowPoint<F>, t: F) -> Result<FlowStep<F>> {
        let target = p.s + t;
        let inf = self.roof.infimum();
        let sum = |m: u128, y: Phase| self.roof.birkhoff_closed(y, m, self.phase).expect("closed form");
        if target >= F::zero() {
            // largest n with S_n(x) <= target
            let mut hi = (target / inf).to_u128().unwrap_or(u128::MAX / 2) + 2;
            let mut lo = 0u128;
            while sum(hi, p.x) <= target {
                lo = hi;
                hi *= 2;
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if sum(mid, p.x) <= target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            self.finish(p, t, lo as i64, sum(lo, p.x))
        } else {
            // smallest m >= 1 with target + S_m(x - m alpha) >= 0
            let need = -target;
            let back = |m: u128| sum(m, p.x - self.phase.mul_u128(m));
            let mut lo = 0u128;
            let mut hi = (need / inf).to_u128().unwrap_or(u128::MAX / 2) + 2;
            while back(hi) < need {
                lo = hi;
                hi *= 2;
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if back(mid) < need {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            self.finish(p, t, -(hi as i64), -back(hi))
        }
    }

    fn evaluate_blocked(&self, p: &FlowPoint<F>, t: F) -> Result<FlowStep<F>> {
        let target = p.s + t;
        let forward = target >= F::zero();
        let need = if forward { target } else { -target };
        let mut acc = Compensated::<F>::new();
        let mut done: i64 = 0;
        let mut buf = vec![F::zero(); self.block];
        loop {
            // fill the next block
            let mut y = if forward {
                p.x + self.phase.mul_u128(done as u128)
            } else {
                p.x - self.phase.mul_u128(done as u128 + 1)
            };
            for (i, b) in buf.iter_mut().enumerate() {
                let idx = if forward { done + i as i64 } else { -(done + i as i64 + 1) };
                *b = self.roof.value(y).map_err(|e| shift(e, idx))?;
                if forward {
                    y += self.phase;
                } else {
                    y -= self.phase;
                }
            }
            let block_sum = pairwise(&buf);
            let mut trial = acc;
            trial.add(block_sum);
            let fits = if forward { need - trial.value() >= F::zero() } else { need - trial.value() > F::zero() };
            if fits {
                acc = trial;
                done += self.block as i64;
                continue;
            }
            for &v in &buf {
                let mut next = acc;
                next.add(v);
                if forward {
                    if need - next.value() < F::zero() {
                        return self.finish(p, t, done, acc.value());
                    }
                } else if need - next.value() <= F::zero() {
                    return self.finish(p, t, -(done + 1), -next.value());
                }
                acc = next;
                done += 1;
            }
        }
    }

    /// `N(x, s, t)`.
    pub fn hits(&self, p: &FlowPoint<F>, t: F) -> Result<i64> {
        Ok(self.evaluate(p, t)?.n)
    }

    /// `S_n(f)(x)` with the reflection convention for `n < 0`.
    pub fn roof_sum(&self, x: Phase, n: i64) -> Result<F> {
        birkhoff_sum_phase(&self.roof, n as i128, x, self.phase)
    }
}

fn pairwise<F: Scalar>(v: &[F]) -> F {
    if v.len() <= 8 {
        return v.iter().fold(F::zero(), |a, &b| a + b);
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise(a) + pairwise(b)
}

fn shift(e: Error, index: i64) -> Error {
    match e {
        Error::Singularity { x, .. } => Error::Singularity { index, x },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roof::{FourierRoof, PowerRoof, RoofFunction};
    use num_complex::Complex;

    fn golden() -> RotationNumber {
        RotationNumber::golden()
    }

    #[test]
    fn unit_roof_is_suspension() {
        let a = golden();
        let flow = SpecialFlow::new(RoofFunction::<f64>::constant(1.0).unwrap(), a.clone());
        let p = flow.point(0.1, 0.0).unwrap();
        for step in [flow.evaluate(&p, 2.5).unwrap(), flow.evaluate_naive(&p, 2.5).unwrap()] {
            assert_eq!(step.n, 2);
            assert!((step.point.s - 0.5).abs() < 1e-15);
            assert!((step.point.x - (Phase::from_f64(0.1) + a.phase().mul_u128(2))).norm() < 1e-15);
        }
        let q = flow.point(0.3, 0.5).unwrap();
        let back = flow.evaluate(&q, -0.3).unwrap();
        assert_eq!(back.n, 0);
        assert!((back.point.s - 0.2).abs() < 1e-15);
        let within = flow.evaluate(&q, 0.25).unwrap();
        assert_eq!(within.n, 0);
        assert!((within.point.s - 0.75).abs() < 1e-15);
    }

    #[test]
    fn metric_examples() {
        let p = FlowPoint { x: Phase::from_f64(0.9), s: 0.3f64 };
        let q = FlowPoint { x: Phase::from_f64(0.1), s: 0.3 };
        assert!((p.tower_metric(&q) - 0.2).abs() < 1e-12);
        assert_eq!(p.tower_metric(&p), 0.0);
        let r = FlowPoint { x: Phase::from_f64(0.9), s: 0.6 };
        assert!((p.tower_metric(&r) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn accelerated_matches_naive() {
        let a = RotationNumber::from_partial_quotients(&[2, 3, 1, 5]).unwrap();
        let fr = RoofFunction::Fourier(FourierRoof::new(vec![(2, Complex::new(0.2, 0.1)), (7, Complex::new(0.1, 0.0))]).unwrap());
        let pr = RoofFunction::Power(PowerRoof::default());
        for roof in [fr, pr] {
            let flow = SpecialFlow::new(roof, a.clone());
            for &(x, t) in &[(0.3, 17.25), (0.71, 1234.5), (0.05, -40.0), (0.5, -999.9), (0.2, 0.01)] {
                let p = flow.point(x, 0.1).unwrap();
                let fast = flow.evaluate(&p, t).unwrap();
                let slow = flow.evaluate_naive(&p, t).unwrap();
                assert_eq!(fast.n, slow.n, "x={x} t={t}");
                assert!(fast.point.tower_metric(&slow.point) < 1e-9);
            }
        }
    }

    #[test]
    fn flow_property_and_reversal() {
        let a = golden();
        let flow = SpecialFlow::new(RoofFunction::Power(PowerRoof::<f64>::default()), a);
        let p = flow.point(0.4, 0.3).unwrap();
        let one = flow.evaluate(&p, 123.4).unwrap();
        let two = flow.evaluate(&one.point, 56.7).unwrap();
        let direct = flow.evaluate(&p, 180.1).unwrap();
        assert!(two.point.tower_metric(&direct.point) < 1e-7);
        let back = flow.evaluate(&direct.point, -180.1).unwrap();
        assert!(back.point.tower_metric(&p) < 1e-7);
    }
}
