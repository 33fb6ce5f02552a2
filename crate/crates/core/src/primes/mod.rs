//! Segmented sieve and log-weighted prime sums.

mod ap;
mod cache;
mod phases;

pub use ap::{euler_phi, ShortIntervalAverage, SqrSelection};
pub use crate::phase::Arc;
pub use phases::{diophantine_gamma2_check, IntervalPartition, PhaseCoefficients};

use crate::error::{Error, Result};
use crate::summation::Compensated;

/// Default memory ceiling for the primality bitset.
pub const DEFAULT_MEMORY_BUDGET: u64 = 1 << 30;
/// Default sieve segment, in bytes of bitset (each byte covers 16 integers).
pub const DEFAULT_SEGMENT_BYTES: usize = 32 * 1024;
/// Spacing of stored theta checkpoints.
const CHECKPOINT: u64 = 1 << 16;

/// Odd-only primality bitset with theta checkpoints.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    segment_bytes: usize,
    /// Bit `i` is set iff `2i + 1` is prime.
    bits: Vec<u64>,
    /// `theta(k * CHECKPOINT)` for `k = 0, 1, ...`.
    checkpoints: Vec<f64>,
}

fn simple_sieve(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

impl PrimeTable {
    pub fn build(limit: u64) -> Result<Self> {
        Self::build_with(limit, DEFAULT_MEMORY_BUDGET, DEFAULT_SEGMENT_BYTES)
    }

    pub fn build_with(limit: u64, memory_budget: u64, segment_bytes: usize) -> Result<Self> {
        if limit < 2 {
            return Err(Error::InvalidInput(format!("sieve limit {limit} < 2")));
        }
        let words = limit / 128 + 1;
        let bytes = words * 8;
        if bytes > memory_budget {
            return Err(Error::Resource(format!(
                "sieve to {limit} needs {bytes} bytes, budget is {memory_budget}"
            )));
        }
        let segment_bytes = segment_bytes.max(8) / 8 * 8;
        let mut bits = vec![!0u64; words as usize];
        // 1 is not prime; clear bits above the limit.
        bits[0] &= !1;
        let top_bit = (limit - 1) / 2; // index of the largest odd <= limit
        let last = (top_bit / 64) as usize;
        let keep = top_bit % 64;
        if keep < 63 {
            bits[last] &= (1u64 << (keep + 1)) - 1;
        }
        for w in bits.iter_mut().skip(last + 1) {
            *w = 0;
        }
        let base = simple_sieve((limit as f64).sqrt() as u64 + 1);
        let seg_bits = (segment_bytes * 8) as u64;
        let total_bits = words * 64;
        let mut lo = 0u64;
        while lo < total_bits {
            let hi = (lo + seg_bits).min(total_bits);
            // odd numbers 2i+1 for i in [lo, hi)
            let lo_n = 2 * lo + 1;
            let hi_n = 2 * hi + 1;
            for &p in base.iter().skip(1) {
                if p * p >= hi_n {
                    break;
                }
                let mut m = (p * p).max(lo_n.div_ceil(p) * p);
                if m % 2 == 0 {
                    m += p;
                }
                while m < hi_n {
                    let i = (m - 1) / 2;
                    bits[(i / 64) as usize] &= !(1u64 << (i % 64));
                    m += 2 * p;
                }
            }
            lo = hi;
        }
        let mut t = PrimeTable { limit, segment_bytes, bits, checkpoints: Vec::new() };
        t.fill_checkpoints();
        Ok(t)
    }

    fn fill_checkpoints(&mut self) {
        let n = (self.limit / CHECKPOINT + 1) as usize;
        let mut cps = Vec::with_capacity(n);
        let mut acc = Compensated::<f64>::new();
        cps.push(0.0);
        let mut next = CHECKPOINT;
        for p in self.primes_in(2, self.limit) {
            while p > next {
                cps.push(acc.value());
                next += CHECKPOINT;
            }
            acc.add((p as f64).ln());
        }
        while cps.len() < n {
            cps.push(acc.value());
        }
        self.checkpoints = cps;
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn segment_bytes(&self) -> usize {
        self.segment_bytes
    }

    fn check_range(&self, x: u64) -> Result<()> {
        if x > self.limit {
            Err(Error::Resource(format!("{x} exceeds the sieve limit {}", self.limit)))
        } else {
            Ok(())
        }
    }

    pub fn is_prime(&self, n: u64) -> bool {
        if n > self.limit {
            panic!("{n} exceeds the sieve limit {}", self.limit);
        }
        if n == 2 {
            return true;
        }
        if n % 2 == 0 {
            return false;
        }
        let i = (n - 1) / 2;
        self.bits[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    /// Primes in `[lo, hi]`, clipped to the table.
    pub fn primes_in(&self, lo: u64, hi: u64) -> PrimeIter<'_> {
        let hi = hi.min(self.limit);
        PrimeIter::new(self, lo, hi)
    }

    pub fn count(&self, x: u64) -> usize {
        self.primes_in(2, x).count()
    }

    /// `theta(x) = sum_{p <= x} log p`.
    pub fn theta(&self, x: u64) -> Result<f64> {
        self.check_range(x)?;
        let k = x / CHECKPOINT;
        let mut acc = Compensated::<f64>::new();
        acc.add(self.checkpoints[k as usize]);
        for p in self.primes_in(k * CHECKPOINT + 1, x) {
            acc.add((p as f64).ln());
        }
        Ok(acc.value())
    }

    /// `sum_{N < p <= N + H} log p`.
    pub fn theta_interval(&self, n: u64, h: u64) -> Result<f64> {
        self.check_range(n.saturating_add(h))?;
        Ok(self.primes_in(n + 1, n + h).map(|p| (p as f64).ln()).collect::<Compensated<f64>>().value())
    }

    /// `sum_{p <= x, p = a mod q} log p`.
    pub fn theta_ap(&self, x: u64, q: u64, a: u64) -> Result<f64> {
        if q == 0 || a >= q {
            return Err(Error::InvalidInput(format!("class {a} mod {q}")));
        }
        self.check_range(x)?;
        Ok(self.primes_in(2, x).filter(|p| p % q == a).map(|p| (p as f64).ln()).collect::<Compensated<f64>>().value())
    }

    /// All classes at once: entry `a` is `theta(x; q, a)`.
    pub fn theta_ap_all(&self, x: u64, q: u64) -> Result<Vec<f64>> {
        if q == 0 {
            return Err(Error::InvalidInput("modulus 0".into()));
        }
        self.check_range(x)?;
        let mut acc = vec![Compensated::<f64>::new(); q as usize];
        for p in self.primes_in(2, x) {
            acc[(p % q) as usize].add((p as f64).ln());
        }
        Ok(acc.iter().map(|c| c.value()).collect())
    }

    /// Raw words of the odd-only bitset (for the cache file).
    pub(crate) fn words(&self) -> &[u64] {
        &self.bits
    }

    pub(crate) fn from_words(limit: u64, segment_bytes: usize, bits: Vec<u64>) -> Result<Self> {
        if bits.len() as u64 != limit / 128 + 1 {
            return Err(Error::InvalidInput("cache bitset length does not match its limit".into()));
        }
        let mut t = PrimeTable { limit, segment_bytes, bits, checkpoints: Vec::new() };
        t.fill_checkpoints();
        Ok(t)
    }
}

/// Ascending iterator over primes in a closed range.
pub struct PrimeIter<'a> {
    table: &'a PrimeTable,
    two: bool,
    word: usize,
    cur: u64,
    end_bit: u64,
}

impl<'a> PrimeIter<'a> {
    fn new(table: &'a PrimeTable, lo: u64, hi: u64) -> Self {
        let two = lo <= 2 && hi >= 2;
        let lo_odd = lo.max(3) | 1;
        if lo_odd > hi {
            return PrimeIter { table, two, word: 0, cur: 0, end_bit: 0 };
        }
        let start_bit = (lo_odd - 1) / 2;
        let end_bit = (hi - 1) / 2 + 1; // exclusive
        let word = (start_bit / 64) as usize;
        let mut cur = table.bits[word];
        cur &= !0u64 << (start_bit % 64);
        PrimeIter { table, two, word, cur, end_bit }
    }
}

impl Iterator for PrimeIter<'_> {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        if self.two {
            self.two = false;
            return Some(2);
        }
        loop {
            if self.cur != 0 {
                let b = self.word as u64 * 64 + self.cur.trailing_zeros() as u64;
                if b >= self.end_bit {
                    self.cur = 0;
                    self.end_bit = 0;
                    return None;
                }
                self.cur &= self.cur - 1;
                return Some(2 * b + 1);
            }
            self.word += 1;
            if (self.word as u64) * 64 >= self.end_bit {
                return None;
            }
            self.cur = self.table.bits[self.word];
        }
    }
}
