//! Exponential and indicator sums over primes with polynomial phases.
//!
//! Phases `gamma_1 m + gamma_2 m^2` with `m = p - N` are reduced mod 1 in
//! 128-bit fixed point, so the reduction itself is exact.

use super::PrimeTable;
use crate::error::{Error, Result};
use crate::phase::{Arc, Phase};
use crate::summation::Compensated;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// `g(n) = gamma_1 (n - N) + gamma_2 (n - N)^2` over `n` in `(N, N + H]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCoefficients {
    pub gamma1: f64,
    pub gamma2: f64,
    pub n: u64,
    pub h: u64,
}

impl PhaseCoefficients {
    pub fn new(gamma1: f64, gamma2: f64, n: u64, h: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma1) || !(0.0..1.0).contains(&gamma2) {
            return Err(Error::InvalidInput(format!("phases ({gamma1}, {gamma2}) must lie in [0, 1)")));
        }
        Ok(PhaseCoefficients { gamma1, gamma2, n, h })
    }

    /// `(gamma_1 m, gamma_2 m^2) mod 1`.
    #[inline]
    pub fn phases(&self, m: u64) -> (Phase, Phase) {
        let m = m as u128;
        (Phase::from_f64(self.gamma1).mul_u128(m), Phase::from_f64(self.gamma2).mul_u128(m * m))
    }
}

impl PrimeTable {
    fn phase_range(&self, c: &PhaseCoefficients) -> Result<impl Iterator<Item = u64> + '_> {
        self.check_range(c.n.saturating_add(c.h))?;
        Ok(self.primes_in(c.n + 1, c.n + c.h))
    }

    /// `sum_{N < p <= N+H} e(g(p)) log p`.
    pub fn quad_phase_sum(&self, c: &PhaseCoefficients) -> Result<Complex64> {
        let mut re = Compensated::<f64>::new();
        let mut im = Compensated::<f64>::new();
        for p in self.phase_range(c)? {
            let (a, b) = c.phases(p - c.n);
            let th = TAU * (a + b).to_signed_f64();
            let w = (p as f64).ln();
            re.add(w * th.cos());
            im.add(w * th.sin());
        }
        Ok(Complex64::new(re.value(), im.value()))
    }

    /// Log-weighted count of primes whose phase pair lies in `I x J`.
    pub fn box_indicator_sum(&self, c: &PhaseCoefficients, i: &Arc, j: &Arc) -> Result<f64> {
        let mut acc = Compensated::<f64>::new();
        for p in self.phase_range(c)? {
            let (a, b) = c.phases(p - c.n);
            if i.contains(a) && j.contains(b) {
                acc.add((p as f64).ln());
            }
        }
        Ok(acc.value())
    }

    /// Log-weighted sums over a grid of boxes `I_r x J_s` in one pass.
    /// `locate_i`/`locate_j` map a phase to its cell index.
    pub fn box_grid_sums<FI, FJ>(&self, c: &PhaseCoefficients, ni: usize, nj: usize, locate_i: FI, locate_j: FJ) -> Result<Vec<Vec<f64>>>
    where
        FI: Fn(Phase) -> Option<usize>,
        FJ: Fn(Phase) -> Option<usize>,
    {
        let mut acc = vec![vec![Compensated::<f64>::new(); nj]; ni];
        for p in self.phase_range(c)? {
            let (a, b) = c.phases(p - c.n);
            if let (Some(r), Some(s)) = (locate_i(a), locate_j(b)) {
                acc[r][s].add((p as f64).ln());
            }
        }
        Ok(acc.into_iter().map(|row| row.into_iter().map(|v| v.value()).collect()).collect())
    }

    /// Partition of the circle into `q^2` arcs of length `1/q^2` whose
    /// endpoints `j/q^2 + (2l_0 + 1) q^{-9}` avoid the phases `gamma_1 m`:
    /// among the `floor(q^7/2)` offset families of width `2 q^{-9}`, `l_0` is
    /// the first of least log-weighted hit count.
    pub fn build_interval_partition(&self, q: u64, gamma1: f64, n: u64, h: u64) -> Result<IntervalPartition> {
        if q < 2 {
            return Err(Error::InvalidInput(format!("partition modulus {q} < 2")));
        }
        let c = PhaseCoefficients::new(gamma1, 0.0, n, h)?;
        let q2 = q * q;
        let families = ((q as f64).powi(7) / 2.0).floor() as u64;
        let mut hits: BTreeMap<u64, f64> = BTreeMap::new();
        for p in self.phase_range(&c)? {
            let (a, _) = c.phases(p - n);
            let cell = a.mul_u128(q2 as u128).to_f64() * (q as f64).powi(7) / 2.0;
            let l = cell.floor() as u64;
            if l < families {
                *hits.entry(l).or_default() += (p as f64).ln();
            }
        }
        let l0 = (0..families).find(|l| !hits.contains_key(l)).unwrap_or_else(|| {
            let mut best = (f64::INFINITY, 0);
            for (&l, &w) in &hits {
                if w < best.0 {
                    best = (w, l);
                }
            }
            best.1
        });
        let shift = (2 * l0 + 1) as f64 * (q as f64).powi(-9);
        let ends: Vec<Phase> = (0..q2).map(|j| Phase::from_f64(j as f64 / q2 as f64 + shift)).collect();
        let arcs = (0..q2 as usize).map(|j| Arc::from_phases(ends[j], ends[(j + 1) % q2 as usize])).collect();
        Ok(IntervalPartition { q, offset_family: l0, hit_weight: hits.get(&l0).copied().unwrap_or(0.0), arcs })
    }
}

/// Result of [`PrimeTable::build_interval_partition`].
#[derive(Debug, Clone)]
pub struct IntervalPartition {
    pub q: u64,
    pub offset_family: u64,
    pub hit_weight: f64,
    pub arcs: Vec<Arc>,
}

impl IntervalPartition {
    /// Index of the arc containing `x`.
    pub fn locate(&self, x: Phase) -> usize {
        let first = self.arcs[0].start_phase();
        let k = ((x - first).to_f64() * self.arcs.len() as f64).floor() as usize;
        let k = k.min(self.arcs.len() - 1);
        // at most one step of correction near an endpoint
        for d in [0usize, self.arcs.len() - 1, 1] {
            let idx = (k + d) % self.arcs.len();
            if self.arcs[idx].contains(x) {
                return idx;
            }
        }
        unreachable!("arcs cover the circle")
    }
}

/// `||r gamma_2|| >= (log N)^B / H^2` for every `0 < r <= (log N)^B`.
pub fn diophantine_gamma2_check(gamma2: f64, n: u64, h: u64, b: f64) -> bool {
    let lb = (n as f64).ln().powf(b);
    let thr = lb / (h as f64 * h as f64);
    let g = Phase::from_f64(gamma2);
    (1..=lb.floor() as u64).all(|r| g.mul_u128(r as u128).norm() >= thr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_sum_examples() {
        let t = PrimeTable::build(1000).unwrap();
        let zero = PhaseCoefficients::new(0.0, 0.0, 10, 10).unwrap();
        let s = t.quad_phase_sum(&zero).unwrap();
        assert!((s.re - t.theta_interval(10, 10).unwrap()).abs() < 1e-12 && s.im == 0.0);
        let half1 = PhaseCoefficients::new(0.5, 0.0, 10, 10).unwrap();
        let s = t.quad_phase_sum(&half1).unwrap();
        assert!((s.re + 46189f64.ln()).abs() < 1e-9, "{s}");
        let half2 = PhaseCoefficients::new(0.0, 0.5, 10, 10).unwrap();
        assert!((t.quad_phase_sum(&half2).unwrap() - s).norm() < 1e-12);
    }

    #[test]
    fn box_examples() {
        let t = PrimeTable::build(1000).unwrap();
        let c = PhaseCoefficients::new(0.3, 0.7, 100, 200).unwrap();
        let th = t.theta_interval(100, 200).unwrap();
        assert!((t.box_indicator_sum(&c, &Arc::full(), &Arc::full()).unwrap() - th).abs() < 1e-12);
        assert_eq!(t.box_indicator_sum(&c, &Arc::empty(), &Arc::full()).unwrap(), 0.0);
        let z = PhaseCoefficients::new(0.0, 0.0, 100, 200).unwrap();
        let i = Arc::new(0.95, 0.1);
        assert!((t.box_indicator_sum(&z, &i, &i).unwrap() - th).abs() < 1e-12);
    }

    #[test]
    fn diophantine_examples() {
        assert!(!diophantine_gamma2_check(0.0, 1_000_000, 10_000, 2.0));
        assert!(!diophantine_gamma2_check(0.5, 1_000_000, 10_000, 2.0));
        let g = std::f64::consts::FRAC_1_SQRT_2;
        assert!(diophantine_gamma2_check(g, 1_000_000, 10_000, 2.0));
    }

    #[test]
    fn partition_properties() {
        let t = PrimeTable::build(20_000).unwrap();
        let p = t.build_interval_partition(2, 0.3, 1000, 1000).unwrap();
        assert_eq!(p.arcs.len(), 4);
        for a in &p.arcs {
            assert!((a.len() - 0.25).abs() < 1e-12);
        }
        let p = t.build_interval_partition(3, 0.0, 10_000, 5000).unwrap();
        assert!(p.offset_family >= 1);
        let qm9 = 3f64.powi(-9);
        for a in &p.arcs {
            assert!(a.start_phase().norm() >= qm9 * 0.999);
        }
        for k in 0..1000 {
            let x = Phase::from_f64(k as f64 / 1000.0 + 1e-4);
            let hits = p.arcs.iter().filter(|a| a.contains(x)).count();
            assert_eq!(hits, 1);
            assert!(p.arcs[p.locate(x)].contains(x));
        }
        assert!(t.build_interval_partition(1, 0.3, 10, 10).is_err());
    }
}
