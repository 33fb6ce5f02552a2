//! Time integrals along flow orbits, an incremental fibre walker and orbit
//! trace export.

use super::structure::Direction;
use super::{FlowPoint, SpecialFlow};
use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::quadrature;
use crate::roof::Roof;
use crate::scalar::Scalar;
use crate::summation::Compensated;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A function on the tower, evaluated at base `y`, height `s` in a fibre of
/// height `height = f(y)`.
pub trait TowerFn: Sync {
    fn value(&self, y: Phase, s: f64, height: f64) -> f64;

    /// `int_a^b value(y, u, height) du`, adaptive quadrature unless overridden.
    fn fibre_integral(&self, y: Phase, a: f64, b: f64, height: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        quadrature::integrate(|u| self.value(y, u, height), a, b, 1e-13, 1e-11)
    }
}

impl<F: Fn(Phase, f64, f64) -> f64 + Sync> TowerFn for F {
    fn value(&self, y: Phase, s: f64, height: f64) -> f64 {
        self(y, s, height)
    }
}

/// Heights swept while the flow spends times `[a, b]` in a fibre entered at
/// time `entry`.
fn heights(dir: Direction, entry: f64, height: f64, a: f64, b: f64) -> (f64, f64) {
    match dir {
        Direction::Forward => (a - entry, b - entry),
        Direction::Backward => (height - (b - entry), height - (a - entry)),
    }
}

impl<F: Scalar, R: Roof<F>> SpecialFlow<F, R> {
    /// `int_0^t psi(T_{z u}(p)) du` by summing fibre integrals.
    pub fn time_integral<P: TowerFn + ?Sized>(&self, psi: &P, p: &FlowPoint<F>, t: f64, z: Direction) -> Result<f64> {
        let mut acc = Compensated::<f64>::new();
        self.for_each_fibre(p, t, z, |fb| {
            if fb.end > fb.start {
                let (a, b) = heights(z, fb.entry, fb.height, fb.start, fb.end);
                acc.add(psi.fibre_integral(fb.base, a.max(0.0), b.min(fb.height), fb.height)?);
            }
            Ok(())
        })?;
        Ok(acc.value())
    }

    pub fn walker<'a>(&'a self, p: &FlowPoint<F>, dir: Direction) -> Result<FiberWalker<'a, F, R>> {
        FiberWalker::new(self, p, dir)
    }
}

/// Position state of `t -> T_{z t}(p)` advanced monotonically in `t`,
/// optionally accumulating `int_0^t psi`.
pub struct FiberWalker<'a, F: Scalar, R: Roof<F>> {
    flow: &'a SpecialFlow<F, R>,
    dir: Direction,
    base: Phase,
    index: i64,
    entry: f64,
    height: f64,
    now: f64,
    psi: Option<&'a dyn TowerFn>,
    /// integral over `[0, max(entry, 0)]`
    done: Compensated<f64>,
}

impl<'a, F: Scalar, R: Roof<F>> FiberWalker<'a, F, R> {
    pub fn new(flow: &'a SpecialFlow<F, R>, p: &FlowPoint<F>, dir: Direction) -> Result<Self> {
        let height = flow.roof().value(p.x)?.to64();
        let s = p.s.to64();
        let entry = match dir {
            Direction::Forward => -s,
            Direction::Backward => s - height,
        };
        Ok(FiberWalker { flow, dir, base: p.x, index: 0, entry, height, now: 0.0, psi: None, done: Compensated::new() })
    }

    /// Accumulate `int psi` from time 0 on; must be set before advancing.
    pub fn with_integrand(mut self, psi: &'a dyn TowerFn) -> Self {
        self.psi = Some(psi);
        self
    }

    fn partial(&self, a: f64, b: f64) -> Result<f64> {
        match self.psi {
            Some(psi) if b > a => {
                let (lo, hi) = heights(self.dir, self.entry, self.height, a, b);
                psi.fibre_integral(self.base, lo.max(0.0), hi.min(self.height), self.height)
            }
            _ => Ok(0.0),
        }
    }

    /// Move to time `t >= now`; returns base, height and orbit index.
    pub fn advance_to(&mut self, t: f64) -> Result<(Phase, f64, i64)> {
        if t < self.now {
            return Err(Error::InvalidInput(format!("walker cannot go back from {} to {t}", self.now)));
        }
        let alpha = self.flow.alpha_phase();
        while t >= self.entry + self.height {
            let exit = self.entry + self.height;
            let seg = self.partial(self.entry.max(0.0), exit)?;
            self.done.add(seg);
            self.entry = exit;
            match self.dir {
                Direction::Forward => {
                    self.index += 1;
                    self.base += alpha;
                }
                Direction::Backward => {
                    self.index -= 1;
                    self.base -= alpha;
                }
            }
            let index = self.index;
            self.height = self
                .flow
                .roof()
                .value(self.base)
                .map_err(|e| match e {
                    Error::Singularity { x, .. } => Error::Singularity { index, x },
                    o => o,
                })?
                .to64();
        }
        self.now = t;
        let s = match self.dir {
            Direction::Forward => t - self.entry,
            Direction::Backward => self.height - (t - self.entry),
        };
        Ok((self.base, s.clamp(0.0, self.height), self.index))
    }

    /// `int_0^{now} psi`.
    pub fn integral(&self) -> Result<f64> {
        Ok(self.done.value() + self.partial(self.entry.max(0.0), self.now)?)
    }

    /// Height `f(y)` of the current fibre.
    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn now(&self) -> f64 {
        self.now
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub s: f64,
    #[serde(rename = "N")]
    pub n: i64,
}

/// Samples of `T_t(p)` at `samples` evenly spaced times in `[0, t_max]`.
pub fn orbit_trace<F: Scalar, R: Roof<F>>(
    flow: &SpecialFlow<F, R>,
    p: &FlowPoint<F>,
    t_max: f64,
    samples: usize,
) -> Result<Vec<TraceRow>> {
    let dir = Direction::from_sign(t_max);
    let mut w = flow.walker(p, dir)?;
    let span = t_max.abs();
    let mut rows = Vec::with_capacity(samples);
    for k in 0..samples {
        let u = if samples > 1 { span * k as f64 / (samples - 1) as f64 } else { 0.0 };
        let (y, s, n) = w.advance_to(u)?;
        rows.push(TraceRow { t: dir.sign() * u, x: y.to_f64(), s, n });
    }
    Ok(rows)
}

pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roof::{PowerRoof, RoofFunction};
    use crate::rotation::RotationNumber;

    #[test]
    fn integral_of_one_is_time() {
        let flow = SpecialFlow::new(RoofFunction::Power(PowerRoof::<f64>::default()), RotationNumber::golden());
        let p = flow.point(0.6, 0.1).unwrap();
        let one = |_: Phase, _: f64, _: f64| 1.0;
        for z in [Direction::Forward, Direction::Backward] {
            let v = flow.time_integral(&one, &p, 37.5, z).unwrap();
            assert!((v - 37.5).abs() < 1e-9);
        }
    }

    #[test]
    fn walker_matches_evaluate() {
        let flow = SpecialFlow::new(RoofFunction::Power(PowerRoof::<f64>::default()), RotationNumber::golden());
        let p = flow.point(0.15, 0.05).unwrap();
        let height = |_: Phase, s: f64, _: f64| s;
        for z in [Direction::Forward, Direction::Backward] {
            let mut w = flow.walker(&p, z).unwrap().with_integrand(&height);
            for &t in &[0.0, 0.3, 2.0, 10.5, 77.7] {
                let (y, s, n) = w.advance_to(t).unwrap();
                let e = flow.evaluate_naive(&p, z.sign() * t).unwrap();
                assert_eq!(n, e.n);
                assert!((y - e.point.x).norm() < 1e-15);
                assert!((s - e.point.s).abs() < 1e-9);
                let direct = flow.time_integral(&height, &p, t, z).unwrap();
                assert!((w.integral().unwrap() - direct).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn trace_csv_round_trip() {
        let flow = SpecialFlow::new(RoofFunction::<f64>::constant(1.0).unwrap(), RotationNumber::golden());
        let p = flow.point(0.0, 0.0).unwrap();
        let rows = orbit_trace(&flow, &p, 3.0, 7).unwrap();
        assert_eq!(rows.last().unwrap().n, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,x,s,N"));
        let back: Vec<TraceRow> = csv::Reader::from_path(&path).unwrap().deserialize().collect::<std::result::Result<_, _>>().unwrap();
        assert_eq!(back, rows);
    }
}
