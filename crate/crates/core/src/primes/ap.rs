//! Residue-class errors: `E(x, q)`, the set `S(q, r)` and short-interval averages.

use super::PrimeTable;
use crate::error::{Error, Result};
use num_integer::Integer;
use serde::Serialize;

pub fn euler_phi(mut q: u64) -> u64 {
    let mut out = q;
    let mut d = 2;
    while d * d <= q {
        if q % d == 0 {
            while q % d == 0 {
                q /= d;
            }
            out -= out / d;
        }
        d += 1;
    }
    if q > 1 {
        out -= out / q;
    }
    out
}

/// Outcome of [`PrimeTable::select_s_qr`].
#[derive(Debug, Clone, Serialize)]
pub struct SqrSelection {
    /// Primes in the window satisfying the congruence.
    pub candidates: Vec<u64>,
    /// Candidates that also pass every dyadic error test.
    pub members: Vec<u64>,
    /// The dyadic test points `x_n`.
    pub xs: Vec<u64>,
    /// `C x_n / (N log^{2A} x_n)` for each `x_n`.
    pub thresholds: Vec<f64>,
    /// Smallest `E(x_1, l)` over the candidates, with its `l`.
    pub best_first_error: Option<(u64, f64)>,
    /// `log` of the asymptotic scale `exp(q^{A-3})` the window stands in for.
    pub implied_log_scale: f64,
}

/// Outcome of [`PrimeTable::short_interval_ap_average`].
#[derive(Debug, Clone, Serialize)]
pub struct ShortIntervalAverage {
    pub average_error: f64,
    pub offset: u64,
    pub windows: u64,
    /// Average for `z = 0`, for comparison with the optimised offset.
    pub average_at_zero: f64,
}

impl PrimeTable {
    /// `E(x, q) = max_{(a,q)=1} sup_{y<x} |theta(y; q, a) - y/phi(q)|`.
    pub fn ap_error(&self, x: u64, q: u64) -> Result<f64> {
        Ok(self.ap_error_at(&[x], q)?[0])
    }

    /// `E(x, q)` at each of the ascending points `xs` from one pass.
    pub fn ap_error_at(&self, xs: &[u64], q: u64) -> Result<Vec<f64>> {
        if q == 0 {
            return Err(Error::InvalidInput("modulus 0".into()));
        }
        if xs.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput("evaluation points must ascend".into()));
        }
        let x_max = *xs.last().ok_or_else(|| Error::InvalidInput("no evaluation points".into()))?;
        self.check_range(x_max)?;
        let phi = euler_phi(q) as f64;
        let coprime: Vec<bool> = (0..q).map(|a| a.gcd(&q) == 1).collect();
        let mut theta = vec![0.0f64; q as usize];
        let mut best = 0.0f64;
        let mut out = Vec::with_capacity(xs.len());
        let mut next = 0;
        let close = |theta: &[f64], best: f64, x: u64| {
            let mut m = best;
            for (a, t) in theta.iter().enumerate() {
                if coprime[a] {
                    m = m.max((t - x as f64 / phi).abs());
                }
            }
            m
        };
        for p in self.primes_in(2, x_max) {
            while next < xs.len() && xs[next] <= p {
                out.push(close(&theta, best, xs[next]));
                next += 1;
            }
            let a = (p % q) as usize;
            if !coprime[a] {
                continue;
            }
            let left = theta[a] - p as f64 / phi;
            let lp = (p as f64).ln();
            best = best.max(left.abs()).max((left + lp).abs());
            theta[a] += lp;
        }
        while next < xs.len() {
            out.push(close(&theta, best, xs[next]));
            next += 1;
        }
        Ok(out)
    }

    /// Primes `l` in `[N/2, N]` with `l = r mod q` whose errors satisfy
    /// `E(x_n, l) <= C x_n / (N log^{2A} x_n)` along `x_1 = N^{0.51}`,
    /// `x_{n+1} = 2 x_n` up to the sieve limit.
    pub fn select_s_qr(&self, q: u64, r: u64, n: u64, c: f64, a: f64) -> Result<SqrSelection> {
        if q == 0 || n < 2 {
            return Err(Error::InvalidInput(format!("q = {q}, N = {n}")));
        }
        if n > self.limit {
            return Err(Error::InsufficientSieveRange(format!("window end {n} beyond sieve limit {}", self.limit)));
        }
        let x1 = (n as f64).powf(0.51).floor().max(2.0) as u64;
        if x1 > self.limit {
            return Err(Error::InsufficientSieveRange(format!(
                "first test point {x1} beyond sieve limit {}",
                self.limit
            )));
        }
        let mut xs = vec![x1];
        while let Some(&last) = xs.last() {
            if last * 2 > self.limit {
                break;
            }
            xs.push(last * 2);
        }
        let thresholds: Vec<f64> =
            xs.iter().map(|&x| c * x as f64 / (n as f64 * (x as f64).ln().powf(2.0 * a))).collect();
        let candidates: Vec<u64> = self.primes_in(n.div_ceil(2), n).filter(|l| l % q == r % q).collect();
        let mut members = Vec::new();
        let mut best_first: Option<(u64, f64)> = None;
        for &l in &candidates {
            let errs = self.ap_error_at(&xs, l)?;
            if best_first.map_or(true, |(_, e)| errs[0] < e) {
                best_first = Some((l, errs[0]));
            }
            if errs.iter().zip(&thresholds).all(|(e, t)| e <= t) {
                members.push(l);
            }
        }
        Ok(SqrSelection {
            candidates,
            members,
            xs,
            thresholds,
            best_first_error: best_first,
            implied_log_scale: (q as f64).powf(a - 3.0),
        })
    }

    /// Windows `(z + jH, z + (j+1)H]`, `j < max(1, N/H)`; per window the
    /// largest coprime-class deviation from `H/phi(v)`. Returns the average
    /// for the offset `z < H` that minimises it.
    pub fn short_interval_ap_average(&self, n: u64, h: u64, v: u64) -> Result<ShortIntervalAverage> {
        if h < 2 || v < 1 {
            return Err(Error::InvalidInput(format!("H = {h}, v = {v}")));
        }
        let windows = (n / h).max(1);
        let end = windows * h + h - 1;
        self.check_range(end)?;
        let classes: Vec<u64> = (0..v).filter(|a| a.gcd(&v) == 1).collect();
        let expected = h as f64 / euler_phi(v) as f64;
        let mut prefix = vec![vec![0.0f64; end as usize + 1]; classes.len()];
        let mut slot = vec![usize::MAX; v as usize];
        for (i, &a) in classes.iter().enumerate() {
            slot[a as usize] = i;
        }
        for i in 1..=end as usize {
            for pre in prefix.iter_mut() {
                pre[i] = pre[i - 1];
            }
            if self.is_prime(i as u64) {
                let s = slot[i % v as usize];
                if s != usize::MAX {
                    prefix[s][i] += (i as f64).ln();
                }
            }
        }
        let average = |z: u64| -> f64 {
            let mut total = 0.0;
            for j in 0..windows {
                let lo = (z + j * h) as usize;
                let hi = lo + h as usize;
                let mut worst = 0.0f64;
                for pre in &prefix {
                    worst = worst.max((pre[hi] - pre[lo] - expected).abs());
                }
                total += worst;
            }
            total / windows as f64
        };
        let mut best = (f64::INFINITY, 0);
        for z in 0..h {
            let a = average(z);
            if a < best.0 {
                best = (a, z);
            }
        }
        Ok(ShortIntervalAverage { average_error: best.0, offset: best.1, windows, average_at_zero: average(0) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// E(x, q) by scanning y on a fine grid plus one-sided limits at integers.
    fn scan_oracle(t: &PrimeTable, x: u64, q: u64) -> f64 {
        let phi = euler_phi(q) as f64;
        let mut best = 0.0f64;
        for a in (0..q).filter(|a| a.gcd(&q) == 1) {
            let mut th = 0.0;
            for y in 1..x {
                let before = th;
                if t.is_prime(y) && y % q == a {
                    th += (y as f64).ln();
                }
                best = best.max((before - y as f64 / phi).abs()).max((th - y as f64 / phi).abs());
            }
            best = best.max((th - x as f64 / phi).abs());
        }
        best
    }

    #[test]
    fn error_functional_matches_scan() {
        let t = PrimeTable::build(5000).unwrap();
        assert!((t.ap_error(3, 2).unwrap() - 3.0).abs() < 1e-12);
        for q in [1u64, 2, 3, 4, 7, 30] {
            for x in [3u64, 10, 97, 500, 4999] {
                let e = t.ap_error(x, q).unwrap();
                assert!((e - scan_oracle(&t, x, q)).abs() < 1e-9, "q={q} x={x}");
            }
        }
        // q = x: at most one prime per class
        let e = t.ap_error(30, 30).unwrap();
        assert!((e - scan_oracle(&t, 30, 30)).abs() < 1e-12);
    }

    #[test]
    fn multi_point_matches_single() {
        let t = PrimeTable::build(20_000).unwrap();
        let xs = [50u64, 100, 1000, 19_999];
        let multi = t.ap_error_at(&xs, 11).unwrap();
        for (x, m) in xs.iter().zip(multi) {
            assert_eq!(m, t.ap_error(*x, 11).unwrap());
        }
    }

    #[test]
    fn s_qr_examples() {
        let t = PrimeTable::build(1000).unwrap();
        let s = t.select_s_qr(3, 2, 100, 1e300, 2.0).unwrap();
        assert_eq!(s.members, vec![53, 59, 71, 83, 89]);
        assert!(t.select_s_qr(3, 2, 100, 0.0, 2.0).unwrap().members.is_empty());
        assert!(t.select_s_qr(2, 2, 100, 1e300, 2.0).unwrap().members.is_empty());
        let small = PrimeTable::build(50).unwrap();
        assert!(matches!(small.select_s_qr(3, 2, 100, 1.0, 2.0), Err(Error::InsufficientSieveRange(_))));
    }

    #[test]
    fn short_interval_trivial_cases() {
        let t = PrimeTable::build(3000).unwrap();
        let r = t.short_interval_ap_average(1000, 100, 1).unwrap();
        // v = 1: brute-force the optimum
        let mut best = f64::INFINITY;
        for z in 0..100 {
            let mut s = 0.0;
            for j in 0..10 {
                s += (t.theta_interval(z + j * 100, 100).unwrap() - 100.0).abs();
            }
            best = best.min(s / 10.0);
        }
        assert!((r.average_error - best).abs() < 1e-9);
        let single = t.short_interval_ap_average(100, 1000, 3).unwrap();
        assert_eq!(single.windows, 1);
    }
}
