//! Continued-fraction arithmetic for rotation numbers.
//!
//! A [`RotationNumber`] is `[0; a_1, ..., a_n, 1, 1, 1, ...]`: the supplied
//! partial quotients followed by an infinite tail of ones. Denominators use
//! `q_0 = 1`, `q_1 = a_1`, `q_{k+1} = a_{k+1} q_k + q_{k-1}`. Residuals
//! `beta_k = q_k alpha - p_k` are exact rationals against a truncation of the
//! tail that is accurate far beyond double precision.

mod construct;
mod primality;

pub use construct::{construct_alpha, AlphaMode, AlphaParams};
pub use primality::{is_prime_big, is_prime_u64};

use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::summation::Compensated;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Number of tail ones appended when forming the exact truncation of alpha.
const TAIL: usize = 160;
/// Tail denominators beyond the supplied quotients that callers may use.
const USABLE_TAIL: usize = 64;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RotationSpec", into = "RotationSpec")]
pub struct RotationNumber {
    quotients: Vec<BigUint>,
    flags: Vec<usize>,
    q: Vec<BigUint>,
    p: Vec<BigUint>,
    q_f64: Vec<f64>,
    beta: Vec<BigRational>,
    beta_f64: Vec<f64>,
    num: BigUint,
    den: BigUint,
    value: f64,
    phase: Phase,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Quotient {
    Small(u64),
    Big(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RotationSpec {
    quotients: Vec<Quotient>,
    #[serde(default)]
    flags: Vec<usize>,
}

impl TryFrom<RotationSpec> for RotationNumber {
    type Error = Error;

    fn try_from(spec: RotationSpec) -> Result<Self> {
        let qs = spec
            .quotients
            .into_iter()
            .map(|q| match q {
                Quotient::Small(v) => Ok(BigUint::from(v)),
                Quotient::Big(s) => s
                    .parse::<BigUint>()
                    .map_err(|e| Error::InvalidInput(format!("partial quotient `{s}`: {e}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RotationNumber::from_big_quotients(qs)?.with_flags(spec.flags))
    }
}

impl From<RotationNumber> for RotationSpec {
    fn from(r: RotationNumber) -> Self {
        RotationSpec {
            quotients: r
                .quotients
                .iter()
                .map(|a| match a.to_u64() {
                    Some(v) => Quotient::Small(v),
                    None => Quotient::Big(a.to_string()),
                })
                .collect(),
            flags: r.flags,
        }
    }
}

/// Greedy expansion `M = sum b_s q_s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OstrowskiExpansion {
    value: BigUint,
    /// Nonzero digits `(s, b_s)`, highest index first.
    digits: Vec<(usize, BigUint)>,
}

impl OstrowskiExpansion {
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn digits(&self) -> &[(usize, BigUint)] {
        &self.digits
    }

    pub fn coefficient(&self, s: usize) -> BigUint {
        self.digits
            .iter()
            .find(|(i, _)| *i == s)
            .map(|(_, b)| b.clone())
            .unwrap_or_default()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// `sum b_s q_s` against the denominators of `alpha`.
    pub fn recombine(&self, alpha: &RotationNumber) -> BigUint {
        self.digits.iter().map(|(s, b)| b * alpha.q(*s)).sum()
    }
}

fn big_to_f64(v: &BigUint) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}

impl RotationNumber {
    pub fn from_partial_quotients(a: &[u64]) -> Result<Self> {
        Self::from_big_quotients(a.iter().map(|&v| BigUint::from(v)).collect())
    }

    pub fn from_big_quotients(a: Vec<BigUint>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidInput("partial quotient sequence is empty".into()));
        }
        if let Some(i) = a.iter().position(|v| v.is_zero()) {
            return Err(Error::InvalidInput(format!("partial quotient a_{} is zero", i + 1)));
        }
        let n = a.len();
        let total = n + TAIL;
        let one = BigUint::one();
        let mut q = Vec::with_capacity(total + 1);
        let mut p = Vec::with_capacity(total + 1);
        // q_{-1} = 0, p_{-1} = 1, q_0 = 1, p_0 = 0.
        let (mut q_prev, mut p_prev) = (BigUint::zero(), one.clone());
        q.push(one.clone());
        p.push(BigUint::zero());
        for k in 1..=total {
            let ak = if k <= n { a[k - 1].clone() } else { one.clone() };
            let qk = &ak * &q[k - 1] + &q_prev;
            let pk = &ak * &p[k - 1] + &p_prev;
            q_prev = q[k - 1].clone();
            p_prev = p[k - 1].clone();
            q.push(qk);
            p.push(pk);
        }
        let num = p[total].clone();
        let den = q[total].clone();
        let keep = n + USABLE_TAIL + 1;
        q.truncate(keep + 1);
        p.truncate(keep + 1);
        let den_i = BigInt::from(den.clone());
        let num_i = BigInt::from(num.clone());
        let beta: Vec<BigRational> = (0..=keep)
            .map(|k| {
                let top = BigInt::from(q[k].clone()) * &num_i - BigInt::from(p[k].clone()) * &den_i;
                BigRational::new(top, den_i.clone())
            })
            .collect();
        let beta_f64 = beta.iter().map(|b| b.to_f64().unwrap_or(0.0)).collect();
        let q_f64 = q.iter().map(big_to_f64).collect();
        let phase_bits: BigUint = (&num << 128u32) / &den;
        let phase = Phase(phase_bits.to_u128().expect("alpha < 1"));
        let value = BigRational::new(num_i, den_i).to_f64().unwrap_or(0.0);
        Ok(RotationNumber { quotients: a, flags: Vec::new(), q, p, q_f64, beta, beta_f64, num, den, value, phase })
    }

    /// Golden-ratio conjugate `[0; 1, 1, ...]`.
    pub fn golden() -> Self {
        Self::from_partial_quotients(&[1]).expect("valid")
    }

    /// Attach the indices `n` at which a constructor imposed a constraint.
    pub fn with_flags(mut self, mut flags: Vec<usize>) -> Self {
        flags.sort_unstable();
        flags.dedup();
        self.flags = flags;
        self
    }

    pub fn flags(&self) -> &[usize] {
        &self.flags
    }

    /// Number of supplied partial quotients.
    pub fn depth(&self) -> usize {
        self.quotients.len()
    }

    pub fn quotients(&self) -> &[BigUint] {
        &self.quotients
    }

    /// Partial quotient `a_k` (`k >= 1`), including the tail of ones.
    pub fn quotient(&self, k: usize) -> BigUint {
        assert!(k >= 1);
        self.quotients.get(k - 1).cloned().unwrap_or_else(BigUint::one)
    }

    /// Largest index `k` for which `q_k`, `p_k` and `beta_k` are available.
    pub fn max_index(&self) -> usize {
        self.q.len() - 2
    }

    /// `q_1, ..., q_n` for the supplied quotients.
    pub fn denominators(&self) -> Vec<BigUint> {
        self.q[1..=self.depth()].to_vec()
    }

    pub fn q(&self, k: usize) -> &BigUint {
        &self.q[k]
    }

    pub fn p(&self, k: usize) -> &BigUint {
        &self.p[k]
    }

    pub fn q_f64(&self, k: usize) -> f64 {
        self.q_f64[k]
    }

    pub fn q_u128(&self, k: usize) -> Option<u128> {
        self.q[k].to_u128()
    }

    pub fn beta(&self, k: usize) -> f64 {
        self.beta_f64[k]
    }

    pub fn beta_exact(&self, k: usize) -> &BigRational {
        &self.beta[k]
    }

    /// `|beta_k|`, which is `||q_k alpha||` for `k >= 1`.
    pub fn norm_q(&self, k: usize) -> f64 {
        self.beta_f64[k].abs()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Rational truncation `P/Q` used for the exact residuals.
    pub fn alpha_exact(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num.clone()), BigInt::from(self.den.clone()))
    }

    /// Smallest index `k` with `q_k >= m`, if available.
    pub fn index_reaching(&self, m: &BigUint) -> Option<usize> {
        (0..=self.max_index()).find(|&k| &self.q[k] >= m)
    }

    /// Verify bracketing, alternation and monotonicity of the residuals for
    /// every supplied index.
    pub fn check_invariants(&self) -> Result<()> {
        let one = BigRational::one();
        for k in 0..=self.depth() {
            let b = self.beta[k].abs();
            let qk1 = BigRational::from_integer(BigInt::from(self.q[k + 1].clone()));
            let qk = BigRational::from_integer(BigInt::from(self.q[k].clone()));
            if &b * &qk1 > one {
                return Err(Error::Consistency(format!("|beta_{k}| > 1/q_{}", k + 1)));
            }
            if &b * (&qk1 + &qk) <= one {
                return Err(Error::Consistency(format!("|beta_{k}| <= 1/(q_{} + q_{k})", k + 1)));
            }
            let next = &self.beta[k + 1];
            if self.beta[k].is_positive() == next.is_positive() {
                return Err(Error::Consistency(format!("beta_{k} and beta_{} share a sign", k + 1)));
            }
            if next.abs() >= b {
                return Err(Error::Consistency(format!("|beta_{}| >= |beta_{k}|", k + 1)));
            }
        }
        Ok(())
    }

    /// Greedy Ostrowski expansion of `m`. Index 1 is preferred over index 0
    /// when `q_0 = q_1 = 1`.
    pub fn ostrowski_expand(&self, m: &BigUint) -> Result<OstrowskiExpansion> {
        let top = self.index_reaching(m).ok_or_else(|| Error::ExtendQuotients {
            needed: m.to_string(),
            available: self.q[self.max_index()].to_string(),
        })?;
        let mut rest = m.clone();
        let mut digits = Vec::new();
        for s in (1..=top).rev() {
            if rest.is_zero() {
                break;
            }
            if self.q[s] <= rest {
                let b = &rest / &self.q[s];
                rest -= &b * &self.q[s];
                digits.push((s, b));
            }
        }
        if !rest.is_zero() {
            digits.push((0, rest));
        }
        Ok(OstrowskiExpansion { value: m.clone(), digits })
    }

    /// Largest `i` accepted by [`Self::multiple_mod_one`].
    pub fn multiple_limit(&self) -> u128 {
        let top = &self.q[self.max_index()];
        (top * top).to_u128().unwrap_or(u128::MAX)
    }

    /// `i alpha mod 1` from the Ostrowski digits of `i` and the exact
    /// residuals: `i alpha = sum b_s p_s + sum b_s beta_s`.
    pub fn multiple_mod_one(&self, i: u128) -> Result<f64> {
        if i > self.multiple_limit() {
            return Err(Error::Overflow(format!("{i} exceeds the supported range {}", self.multiple_limit())));
        }
        let m = BigUint::from(i);
        let top = self.index_reaching(&m).unwrap_or(self.max_index());
        let mut rest = m;
        let mut acc = Compensated::<f64>::new();
        for s in (1..=top).rev() {
            if rest.is_zero() {
                break;
            }
            if self.q[s] <= rest {
                let b = &rest / &self.q[s];
                rest -= &b * &self.q[s];
                if s == top && b > BigUint::one() {
                    // b_top beta_top can exceed double precision as a product.
                    let exact = BigRational::from_integer(BigInt::from(b)) * &self.beta[s];
                    let fl = exact.floor();
                    acc.add((exact - fl).to_f64().unwrap_or(0.0));
                } else {
                    acc.add(big_to_f64(&b) * self.beta_f64[s]);
                }
            }
        }
        if !rest.is_zero() {
            acc.add(big_to_f64(&rest) * self.beta_f64[0]);
        }
        let v = acc.value();
        let r = v - v.floor();
        Ok(if r >= 1.0 { 0.0 } else { r })
    }

    /// Signed `m alpha mod 1` in `[-1/2, 1/2)` from the rational truncation,
    /// with full relative precision even below the fixed-point resolution.
    pub fn multiple_signed(&self, m: &BigUint) -> f64 {
        let r = (m * &self.num) % &self.den;
        let twice = &r << 1u32;
        let signed = if twice >= self.den { BigInt::from(r) - BigInt::from(self.den.clone()) } else { BigInt::from(r) };
        BigRational::new(signed, BigInt::from(self.den.clone())).to_f64().unwrap_or(0.0)
    }

    /// `i alpha mod 1` in fixed point.
    #[inline]
    pub fn multiple_phase(&self, i: i128) -> Phase {
        self.phase.mul_i128(i)
    }

    /// `min_{0 <= i <= n} ||x + i alpha||`.
    pub fn orbit_min_distance(&self, x: f64, n: u64) -> f64 {
        self.orbit_min_distance_phase(Phase::from_f64(x), n).norm()
    }

    /// Signed offset of the orbit point closest to 0 among `x + i alpha`,
    /// `0 <= i <= n`.
    pub fn orbit_min_distance_phase(&self, x: Phase, n: u64) -> Phase {
        let mut cur = x;
        let mut best = x;
        let mut best_abs = x.0.min(x.0.wrapping_neg());
        for _ in 0..n {
            cur += self.phase;
            let d = cur.0.min(cur.0.wrapping_neg());
            if d < best_abs {
                best_abs = d;
                best = cur;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn fibonacci_and_pell() {
        let g = RotationNumber::from_partial_quotients(&[1, 1, 1, 1, 1]).unwrap();
        assert_eq!(g.denominators(), big(&[1, 2, 3, 5, 8]));
        assert!((g.value() - 0.618_033_988_749_894_8).abs() < 1e-15);
        let pell = RotationNumber::from_partial_quotients(&[2, 2, 2, 2]).unwrap();
        assert_eq!(pell.denominators(), big(&[2, 5, 12, 29]));
        for k in 1..=4 {
            assert!(pell.norm_q(k) <= 1.0 / pell.q_f64(k + 1));
        }
        g.check_invariants().unwrap();
        pell.check_invariants().unwrap();
    }

    #[test]
    fn signed_multiple_matches_residual() {
        let a = RotationNumber::from_partial_quotients(&[3, 1000, 7]).unwrap();
        for k in 1..=3 {
            let v = a.multiple_signed(a.q(k));
            assert!((v - a.beta(k)).abs() <= 1e-15 * a.beta(k).abs(), "k={k}");
        }
        assert_eq!(a.multiple_signed(&BigUint::zero()), 0.0);
    }

    #[test]
    fn single_quotient() {
        let a = RotationNumber::from_partial_quotients(&[7]).unwrap();
        assert_eq!(a.denominators(), big(&[7]));
        // [0; 7, 1, 1, ...] = 1 / (7 + 0.618...)
        assert!((a.value() - 1.0 / (7.0 + 0.618_033_988_749_894_8)).abs() < 1e-15);
        assert!(a.flags().is_empty());
    }

    #[test]
    fn rejects_zero_and_empty() {
        assert!(RotationNumber::from_partial_quotients(&[]).is_err());
        assert!(RotationNumber::from_partial_quotients(&[1, 0, 2]).is_err());
    }

    #[test]
    fn ostrowski_examples() {
        let g = RotationNumber::from_partial_quotients(&[1, 1, 1, 1, 1]).unwrap();
        assert!(g.ostrowski_expand(&BigUint::zero()).unwrap().is_empty());
        let e = g.ostrowski_expand(&BigUint::from(10u32)).unwrap();
        let qs: Vec<_> = e.digits().iter().map(|(s, b)| (g.q(*s).clone(), b.clone())).collect();
        assert_eq!(qs, vec![(BigUint::from(8u32), BigUint::one()), (BigUint::from(2u32), BigUint::one())]);
        let q5 = g.q(5).clone();
        let e = g.ostrowski_expand(&q5).unwrap();
        assert_eq!(e.digits(), &[(5, BigUint::one())]);
        let huge = g.q(g.max_index()) + 1u32;
        assert!(matches!(g.ostrowski_expand(&huge), Err(Error::ExtendQuotients { .. })));
    }

    #[test]
    fn multiples() {
        let g = RotationNumber::golden();
        assert_eq!(g.multiple_mod_one(0).unwrap(), 0.0);
        assert!((g.multiple_mod_one(1).unwrap() - g.value()).abs() < 1e-15);
        assert!((g.multiple_mod_one(5).unwrap() - 0.090_169_943_749_474_2).abs() < 1e-13);
        assert!(matches!(g.multiple_mod_one(u128::MAX), Err(Error::Overflow(_))));
    }

    #[test]
    fn multiples_match_exact_rational() {
        let a = RotationNumber::from_partial_quotients(&[3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5]).unwrap();
        let num = &a.num;
        let den = &a.den;
        for i in [7u128, 1_000_003, 123_456_789_012, 98_765_432_109_876_543] {
            let r = (BigUint::from(i) * num).mod_floor(den);
            let exact = BigRational::new(BigInt::from(r), BigInt::from(den.clone())).to_f64().unwrap();
            let got = a.multiple_mod_one(i).unwrap();
            let d = (got - exact).abs();
            assert!(d.min(1.0 - d) < 1e-12, "{i}: {got} vs {exact}");
            let fixed = a.multiple_phase(i as i128).to_f64();
            let d = (fixed - exact).abs();
            assert!(d.min(1.0 - d) < 1e-12);
        }
    }

    #[test]
    fn orbit_minimum() {
        let g = RotationNumber::golden();
        assert_eq!(g.orbit_min_distance(0.0, 17), 0.0);
        assert!((g.orbit_min_distance(0.5, 1) - 0.118_033_988_749_894_8).abs() < 1e-12);
        assert_eq!(g.orbit_min_distance(0.25, 0), 0.25);
    }

    #[test]
    fn json_roundtrip() {
        let a = RotationNumber::from_big_quotients(vec![
            BigUint::from(4u32),
            "123456789012345678901234567890".parse().unwrap(),
        ])
        .unwrap()
        .with_flags(vec![1]);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"quotients":[4,"123456789012345678901234567890"],"flags":[1]}"#);
        let b: RotationNumber = serde_json::from_str(&s).unwrap();
        assert_eq!(b.quotients(), a.quotients());
        assert_eq!(b.flags(), &[1]);
    }
}
