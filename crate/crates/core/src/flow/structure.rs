//! Orbit-segment geometry: section avoidance, the `A`/`B` split of a long
//! orbit, window decompositions and visit sets near the singular fibre.

use super::{FlowPoint, SpecialFlow};
use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::roof::Roof;
use crate::scalar::Scalar;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn from_sign(z: f64) -> Direction {
        if z < 0.0 {
            Direction::Backward
        } else {
            Direction::Forward
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }
}

/// Finite union of intervals kept sorted and merged.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

/// Gap below which adjacent pieces are glued.
const GLUE: f64 = 1e-9;

impl IntervalSet {
    pub fn new() -> Self {
        IntervalSet { parts: Vec::new() }
    }

    pub fn from_parts(mut parts: Vec<Interval>) -> Self {
        parts.retain(|i| i.hi > i.lo);
        parts.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut out = IntervalSet::new();
        for p in parts {
            out.push(p.lo, p.hi);
        }
        out
    }

    /// Append; `lo` must not precede the current last piece's start.
    pub fn push(&mut self, lo: f64, hi: f64) {
        if hi <= lo {
            return;
        }
        if let Some(last) = self.parts.last_mut() {
            if lo <= last.hi + GLUE {
                last.hi = last.hi.max(hi);
                return;
            }
        }
        self.parts.push(Interval { lo, hi });
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn components(&self) -> usize {
        self.parts.len()
    }

    pub fn measure(&self) -> f64 {
        self.parts.iter().map(Interval::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn hull(&self) -> Option<Interval> {
        Some(Interval { lo: self.parts.first()?.lo, hi: self.parts.last()?.hi })
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = IntervalSet::new();
        for a in &self.parts {
            let mut lo = a.lo;
            for b in &other.parts {
                if b.hi <= lo || b.lo >= a.hi {
                    continue;
                }
                out.push(lo, b.lo.min(a.hi));
                lo = lo.max(b.hi);
            }
            out.push(lo, a.hi);
        }
        out
    }

    /// Every piece of `other` inside some piece of `self`, up to the glue gap.
    pub fn contains_set(&self, other: &IntervalSet) -> bool {
        other
            .parts
            .iter()
            .all(|b| self.parts.iter().any(|a| a.lo <= b.lo + GLUE && b.hi <= a.hi + GLUE))
    }

    pub fn complement_in(&self, lo: f64, hi: f64) -> IntervalSet {
        IntervalSet::from_parts(vec![Interval { lo, hi }]).difference(self)
    }
}

/// One fibre crossed by an orbit segment: orbit index, base point, height,
/// and the flow-time span `[start, end)` spent in it (time measured along
/// the chosen direction from 0).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Fibre {
    #[allow(dead_code)]
    pub index: i64,
    pub base: Phase,
    pub height: f64,
    pub start: f64,
    pub end: f64,
    /// Unclipped time at which the fibre is entered.
    pub entry: f64,
}

impl<F: Scalar, R: Roof<F>> SpecialFlow<F, R> {
    /// Visit the fibres met by `t -> T_{z t}(p)`, `t in [0, horizon]`.
    pub(crate) fn for_each_fibre(
        &self,
        p: &FlowPoint<F>,
        horizon: f64,
        dir: Direction,
        mut visit: impl FnMut(&Fibre) -> Result<()>,
    ) -> Result<()> {
        let alpha = self.alpha_phase();
        let s = p.s.to64();
        let mut y = p.x;
        let mut index = 0i64;
        let h0 = self.roof().value(y)?.to64();
        // time at which the fibre's bottom (forward) or top (backward) is crossed
        let mut start = match dir {
            Direction::Forward => -s,
            Direction::Backward => s - h0,
        };
        let mut height = h0;
        loop {
            let end = start + height;
            visit(&Fibre { index, base: y, height, start: start.max(0.0), end: end.min(horizon), entry: start })?;
            if end > horizon {
                return Ok(());
            }
            start = end;
            match dir {
                Direction::Forward => {
                    index += 1;
                    y += alpha;
                }
                Direction::Backward => {
                    index -= 1;
                    y -= alpha;
                }
            }
            height = self.roof().value(y).map_err(|e| match e {
                Error::Singularity { x, .. } => Error::Singularity { index, x },
                o => o,
            })?.to64();
        }
    }

    /// True when the base orbit met by `T_{z u}(p)`, `0 <= u <= t`, stays at
    /// distance at least `rho` from 0.
    pub fn section_avoidance(&self, p: &FlowPoint<F>, t: f64, z: Direction, rho: f64) -> Result<bool> {
        let mut ok = true;
        self.for_each_fibre(p, t, z, |fb| {
            if fb.base.norm() < rho {
                ok = false;
            }
            Ok(())
        })?;
        Ok(ok)
    }

    /// Split of the orbit segment `T_t(p)`, `t in [0, horizon]`, into the
    /// time set `A` spent over `I = U_{i < q_n} ([-r, r] - i alpha)` with
    /// `r = q_n^{-1-delta}`, its complement `B`, and the part `A0` of `A`
    /// spent within `1/(4 q_{n+1})` of 0 at height at least `height_min`.
    pub fn ab_decomposition(
        &self,
        p: &FlowPoint<F>,
        horizon: f64,
        n: usize,
        delta: f64,
        height_min: f64,
    ) -> Result<AbReport> {
        let qn = self
            .alpha()
            .q_u128(n)
            .filter(|&q| q <= 1 << 26)
            .ok_or_else(|| Error::Resource(format!("q_{n} too large for the centre table")))?;
        let r = self.alpha().q_f64(n).powf(-1.0 - delta);
        let near = 0.25 / self.alpha().q_f64(n + 1);
        let alpha = self.alpha_phase();
        let mut centres: Vec<u128> = (0..qn).map(|i| (-alpha.mul_u128(i)).0).collect();
        centres.sort_unstable();
        let in_i = |y: Phase| -> bool {
            let k = centres.partition_point(|&c| c <= y.0);
            let below = centres[(k + centres.len() - 1) % centres.len()];
            let above = centres[k % centres.len()];
            (y - Phase(below)).norm() <= r || (Phase(above) - y).norm() <= r
        };
        let mut a = IntervalSet::new();
        let mut a0 = IntervalSet::new();
        let mut fibres = 0usize;
        self.for_each_fibre(p, horizon, Direction::Forward, |fb| {
            fibres += 1;
            if in_i(fb.base) {
                a.push(fb.start, fb.end);
                if fb.base.norm() <= near {
                    a0.push((fb.entry + height_min).max(fb.start), fb.end);
                }
            }
            Ok(())
        })?;
        let rest = a.difference(&a0);
        let b = a.complement_in(0.0, horizon);
        let p1 = a.components() <= 1 && b.components() <= 2;
        let p2 = a0.components() <= 1;
        let p3 = a.contains_set(&a0) && rest.components() <= 2;
        let hull = a.hull();
        Ok(AbReport {
            horizon,
            n,
            delta,
            radius: r,
            near_radius: near,
            height_min,
            fibres,
            t0: hull.map(|h| h.lo),
            t1: hull.map(|h| h.hi),
            a_measure: a.measure(),
            a0_measure: a0.measure(),
            rest_ratio: rest.measure() / horizon,
            a,
            a0,
            b_components: b.components(),
            p1,
            p2,
            p3,
        })
    }

    /// Windows `W_u = [t1 + S_{u L q_n}(f)(x), t1 + S_{(u+1) L q_n}(f)(x)]`,
    /// `u < count`. Lengths are checked against `inf f * L q_n` and
    /// `L q_n int f + c_prime * L * q_n^{-gamma (1 + delta)}`; blocks whose
    /// base orbit enters `[-q_n^{-1-delta}, q_n^{-1-delta}]` are listed as
    /// violations.
    #[allow(clippy::too_many_arguments)]
    pub fn window_decomposition(
        &self,
        x: Phase,
        t1: f64,
        l: u64,
        n: usize,
        count: usize,
        gamma: f64,
        delta: f64,
        c_prime: f64,
    ) -> Result<WindowReport> {
        let qn = self
            .alpha()
            .q_u128(n)
            .ok_or_else(|| Error::Overflow(format!("q_{n} does not fit u128")))?;
        let block = (l as u128) * qn;
        let r = self.alpha().q_f64(n).powf(-1.0 - delta);
        let inf = self.roof().infimum().to64();
        let lower = inf * block as f64;
        let upper = block as f64 * self.roof().integral().to64()
            + c_prime * l as f64 * self.alpha().q_f64(n).powf(-gamma * (1.0 + delta));
        let alpha = self.alpha_phase();
        let mut windows = Vec::with_capacity(count);
        let mut violations = Vec::new();
        let mut below = Vec::new();
        let mut above = Vec::new();
        let mut t = t1;
        for u in 0..count {
            let y = x + alpha.mul_u128(u as u128 * block);
            let closest = self.alpha().orbit_min_distance_phase(y, block as u64);
            if closest.norm() < r {
                violations.push(u);
            }
            let len = self.roof_sum(y, block as i64)?.to64();
            if len < lower * (1.0 - 1e-12) {
                below.push(u);
            }
            if len > upper {
                above.push(u);
            }
            windows.push(Interval { lo: t, hi: t + len });
            t += len;
        }
        Ok(WindowReport { block: block as u64, lower, upper, windows, violations, below_lower: below, above_upper: above })
    }

    /// Times `w in [-width, width]` at which `T_w(p)` sits over
    /// `[-radius, radius]`, and whether they all lie on one side of 0.
    pub fn visit_set(&self, p: &FlowPoint<F>, width: f64, radius: f64) -> Result<VisitSet> {
        let mut parts = Vec::new();
        for dir in [Direction::Forward, Direction::Backward] {
            let sign = dir.sign();
            self.for_each_fibre(p, width, dir, |fb| {
                if fb.base.norm() <= radius && fb.end > fb.start {
                    let (lo, hi) = if sign > 0.0 { (fb.start, fb.end) } else { (-fb.end, -fb.start) };
                    parts.push(Interval { lo, hi });
                }
                Ok(())
            })?;
        }
        let set = IntervalSet::from_parts(parts);
        let one_sided = set.parts().iter().all(|i| i.lo >= -GLUE) || set.parts().iter().all(|i| i.hi <= GLUE);
        Ok(VisitSet { width, radius, set, one_sided })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AbReport {
    pub horizon: f64,
    pub n: usize,
    pub delta: f64,
    pub radius: f64,
    pub near_radius: f64,
    pub height_min: f64,
    pub fibres: usize,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub a_measure: f64,
    pub a0_measure: f64,
    /// `|A \ A0| / horizon`.
    pub rest_ratio: f64,
    pub a: IntervalSet,
    pub a0: IntervalSet,
    pub b_components: usize,
    pub p1: bool,
    pub p2: bool,
    pub p3: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowReport {
    pub block: u64,
    pub lower: f64,
    pub upper: f64,
    pub windows: Vec<Interval>,
    pub violations: Vec<usize>,
    pub below_lower: Vec<usize>,
    pub above_upper: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VisitSet {
    pub width: f64,
    pub radius: f64,
    pub set: IntervalSet,
    pub one_sided: bool,
}
