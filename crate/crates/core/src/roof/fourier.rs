use super::{CircleFn, Roof};
use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::quadrature::gauss_legendre_nodes;
use crate::rotation::RotationNumber;
use crate::scalar::Scalar;
use num_bigint::BigUint;
use num_complex::Complex;
use num_traits::ToPrimitive;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// `e(theta)` for a fixed-point angle.
#[inline]
pub(crate) fn expi<F: Scalar>(theta: Phase) -> Complex<F> {
    let t = F::TAU() * theta.to_signed_scalar::<F>();
    Complex::new(t.cos(), t.sin())
}

/// `(e(n theta) - 1) / (e(theta) - 1)` from the angles `theta` and `n theta`.
#[inline]
pub(crate) fn geometric_ratio<F: Scalar>(theta: Phase, n_theta: Phase, n: u128) -> Complex<F> {
    let t1 = theta.to_signed_scalar::<F>();
    if t1 == F::zero() {
        return Complex::new(F::of(n as f64), F::zero());
    }
    let tn = n_theta.to_signed_scalar::<F>();
    let pi = F::PI();
    let mag = (pi * tn).sin() / (pi * t1).sin();
    let arg = pi * (tn - t1);
    Complex::new(mag * arg.cos(), mag * arg.sin())
}

/// `f(x) = 1 + Re sum_j b_j e(q_j x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "FourierSpec<F>",
    into = "FourierSpec<F>",
    bound = "F: Scalar + Serialize + DeserializeOwned"
)]
pub struct FourierRoof<F: Scalar> {
    pairs: Vec<(u64, Complex<F>)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierSpec<F> {
    pairs: Vec<(u64, F, F)>,
}

impl<F: Scalar> TryFrom<FourierSpec<F>> for FourierRoof<F> {
    type Error = Error;
    fn try_from(s: FourierSpec<F>) -> Result<Self> {
        FourierRoof::new(s.pairs.into_iter().map(|(q, re, im)| (q, Complex::new(re, im))).collect())
    }
}

impl<F: Scalar> From<FourierRoof<F>> for FourierSpec<F> {
    fn from(r: FourierRoof<F>) -> Self {
        FourierSpec { pairs: r.pairs.into_iter().map(|(q, b)| (q, b.re, b.im)).collect() }
    }
}

impl<F: Scalar> FourierRoof<F> {
    /// Frequencies must be positive; repeated frequencies are merged.
    pub fn new(pairs: Vec<(u64, Complex<F>)>) -> Result<Self> {
        let mut merged: Vec<(u64, Complex<F>)> = Vec::new();
        for (q, b) in pairs {
            if q == 0 {
                return Err(Error::InvalidInput("Fourier roof frequency 0".into()));
            }
            match merged.iter_mut().find(|(p, _)| *p == q) {
                Some(slot) => slot.1 = slot.1 + b,
                None => merged.push((q, b)),
            }
        }
        merged.sort_by_key(|p| p.0);
        let r = FourierRoof { pairs: merged };
        if r.abs_sum() >= F::one() {
            let qmax = r.pairs.last().map_or(1, |p| p.0);
            let n = (64 * qmax).clamp(4096, 1 << 22);
            for j in 0..n {
                let x = Phase::from_f64((j as f64 + 0.5) / n as f64);
                if r.value(x)? <= F::zero() {
                    return Err(Error::InvalidInput(format!("Fourier roof is not positive near x = {}", x.to_f64())));
                }
            }
        }
        Ok(r)
    }

    /// Roof with coefficient `b_n` at frequency `q_n` for each `(n, b_n)`.
    pub fn from_levels(alpha: &RotationNumber, levels: &[(usize, Complex<F>)]) -> Result<Self> {
        let pairs = levels
            .iter()
            .map(|&(n, b)| {
                let q = alpha.q(n).to_u64().ok_or_else(|| Error::Overflow(format!("q_{n} exceeds 64 bits")))?;
                Ok((q, b))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(pairs)
    }

    pub fn pairs(&self) -> &[(u64, Complex<F>)] {
        &self.pairs
    }

    pub fn coefficient(&self, q: u64) -> Complex<F> {
        self.pairs.iter().find(|p| p.0 == q).map_or(Complex::new(F::zero(), F::zero()), |p| p.1)
    }

    /// Fourier coefficient at `q > 0`, which is `b_q / 2`.
    pub fn fhat(&self, q: u64) -> Complex<F> {
        self.coefficient(q) / F::of(2.0)
    }

    /// `S_N(f)(x) - N` with `N q alpha mod 1` reduced exactly, so the
    /// deviation keeps its relative precision for `N` far beyond `2^53`.
    pub fn birkhoff_deviation(&self, alpha: &RotationNumber, x: Phase, n: &BigUint) -> F {
        let mut acc = F::zero();
        for &(q, b) in &self.pairs {
            let qb = BigUint::from(q);
            let a = F::of(alpha.multiple_signed(&(n * &qb)));
            let d = F::of(alpha.multiple_signed(&qb));
            let pi = F::PI();
            let half = F::TAU() * (a - d) / F::of(2.0);
            let ratio = Complex::new(half.cos(), half.sin()) * ((pi * a).sin() / (pi * d).sin());
            acc += (b * expi::<F>(x.mul_u128(q as u128)) * ratio).re;
        }
        acc
    }

    pub fn abs_sum(&self) -> F {
        self.pairs.iter().fold(F::zero(), |s, p| s + p.1.norm())
    }

    /// Check `|b_{q_n}|` against `[q_{n+1}^{-2/3}, q_{n+1}^{-1/2}]`.
    pub fn check_band(&self, alpha: &RotationNumber) -> Result<()> {
        for &(q, b) in &self.pairs {
            let n = (1..alpha.max_index())
                .find(|&n| alpha.q(n).to_u64() == Some(q))
                .ok_or_else(|| Error::InvalidInput(format!("frequency {q} is not a denominator of alpha")))?;
            let next = alpha.q_f64(n + 1);
            let m = b.norm().to64();
            if m < next.powf(-2.0 / 3.0) * (1.0 - 1e-12) || m > next.powf(-0.5) * (1.0 + 1e-12) {
                return Err(Error::InvalidInput(format!("|b_{q}| = {m:e} outside the band for q_{{n+1}} = {next:e}")));
            }
        }
        Ok(())
    }
}

impl<F: Scalar> CircleFn<F> for FourierRoof<F> {
    fn value(&self, x: Phase) -> Result<F> {
        self.derivative(x, 0)
    }

    fn integral(&self) -> F {
        F::one()
    }

    fn variation(&self) -> Option<F> {
        match self.pairs.as_slice() {
            [] => Some(F::zero()),
            [(q, b)] => Some(F::of(4.0 * *q as f64) * b.norm()),
            _ => None,
        }
    }

    fn birkhoff_closed(&self, x: Phase, n: u128, alpha: Phase) -> Option<F> {
        let na = alpha.mul_u128(n);
        let mut s = F::of(n as f64);
        for &(q, b) in &self.pairs {
            let q = q as u128;
            let g = geometric_ratio::<F>(alpha.mul_u128(q), na.mul_u128(q), n);
            s += (b * expi::<F>(x.mul_u128(q)) * g).re;
        }
        Some(s)
    }
}

impl<F: Scalar> Roof<F> for FourierRoof<F> {
    fn derivative(&self, x: Phase, order: u8) -> Result<F> {
        if order > 2 {
            return Err(Error::InvalidInput(format!("derivative order {order}")));
        }
        let mut s = if order == 0 { F::one() } else { F::zero() };
        for &(q, b) in &self.pairs {
            let mut c = b * expi::<F>(x.mul_u128(q as u128));
            for _ in 0..order {
                c = c * Complex::new(F::zero(), F::TAU() * F::of(q as f64));
            }
            s += c.re;
        }
        Ok(s)
    }

    fn infimum(&self) -> F {
        F::one() - self.abs_sum()
    }
}

/// `v(x, y) = 1 + Re sum a_{q,m} e(q x + m y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "TimeChangeSpec<F>",
    into = "TimeChangeSpec<F>",
    bound = "F: Scalar + Serialize + DeserializeOwned"
)]
pub struct TimeChange<F: Scalar> {
    modes: Vec<(u64, i64, Complex<F>)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeChangeSpec<F> {
    coefficients: Vec<(u64, i64, F, F)>,
}

impl<F: Scalar> TryFrom<TimeChangeSpec<F>> for TimeChange<F> {
    type Error = Error;
    fn try_from(s: TimeChangeSpec<F>) -> Result<Self> {
        TimeChange::new(s.coefficients.into_iter().map(|(q, m, re, im)| (q, m, Complex::new(re, im))).collect())
    }
}

impl<F: Scalar> From<TimeChange<F>> for TimeChangeSpec<F> {
    fn from(v: TimeChange<F>) -> Self {
        TimeChangeSpec { coefficients: v.modes.into_iter().map(|(q, m, a)| (q, m, a.re, a.im)).collect() }
    }
}

impl<F: Scalar> TimeChange<F> {
    /// Requires `sum |a| < 1`, which makes `v` positive.
    pub fn new(modes: Vec<(u64, i64, Complex<F>)>) -> Result<Self> {
        if modes.iter().any(|&(q, m, _)| q == 0 && m == 0) {
            return Err(Error::InvalidInput("the (0, 0) mode is fixed at 1".into()));
        }
        let v = TimeChange { modes };
        if v.abs_sum() >= F::one() {
            return Err(Error::InvalidInput(format!("coefficient mass {} must be below 1", v.abs_sum())));
        }
        Ok(v)
    }

    pub fn unit() -> Self {
        TimeChange { modes: Vec::new() }
    }

    /// `|a_{q_n,0}| = |a_{q_n,1}| = q_{n+1}^{-exponent}` with zero phases at
    /// each level `n` in `levels`.
    pub fn default_for(alpha: &RotationNumber, levels: &[usize], exponent: f64) -> Result<Self> {
        let mut modes = Vec::new();
        for &n in levels {
            let q = alpha.q(n).to_u64().ok_or_else(|| Error::Overflow(format!("q_{n} exceeds 64 bits")))?;
            let a = F::of(alpha.q_f64(n + 1).powf(-exponent));
            modes.push((q, 0, Complex::new(a, F::zero())));
            modes.push((q, 1, Complex::new(a, F::zero())));
        }
        Self::new(modes)
    }

    pub fn modes(&self) -> &[(u64, i64, Complex<F>)] {
        &self.modes
    }

    pub fn abs_sum(&self) -> F {
        self.modes.iter().fold(F::zero(), |s, m| s + m.2.norm())
    }

    pub fn is_unit(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn value(&self, x: Phase, y: Phase) -> F {
        let mut s = F::one();
        for &(q, m, a) in &self.modes {
            let th = x.mul_u128(q as u128) + y.mul_i128(m as i128);
            s += (a * expi::<F>(th)).re;
        }
        s
    }

    pub fn infimum(&self) -> F {
        F::one() - self.abs_sum()
    }

    pub fn supremum(&self) -> F {
        F::one() + self.abs_sum()
    }
}

/// The roof `x -> int_0^1 v(x, s) ds`, which keeps exactly the `m = 0`
/// modes. Checked against 64-node Gauss-Legendre quadrature at 100 points.
pub fn roof_from_timechange<F: Scalar>(v: &TimeChange<F>) -> Result<FourierRoof<F>> {
    let roof = FourierRoof::new(v.modes.iter().filter(|m| m.1 == 0).map(|m| (m.0, m.2)).collect())?;
    let (nodes, weights) = gauss_legendre_nodes(64);
    for j in 0..100 {
        let x = Phase::from_f64((j as f64 + 0.5) / 100.0 + 1e-3 * std::f64::consts::SQRT_2);
        let quad: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(t, w)| 0.5 * w * v.value(x, Phase::from_f64(0.5 * (t + 1.0))).to64())
            .sum();
        let direct = roof.value(x)?.to64();
        if (quad - direct).abs() > 1e-10 {
            return Err(Error::Consistency(format!(
                "fibre integral {quad} differs from the roof value {direct} at x = {}",
                x.to_f64()
            )));
        }
    }
    Ok(roof)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roof::birkhoff_sum_naive;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn single_pair_at_zero() {
        let r = FourierRoof::new(vec![(3, c(0.2, 0.1))]).unwrap();
        assert!((r.value(Phase::ZERO).unwrap() - 1.2).abs() < 1e-15);
        assert_eq!(r.integral(), 1.0);
        assert_eq!(r.fhat(3), c(0.1, 0.05));
    }

    #[test]
    fn closed_form_matches_naive() {
        let a = RotationNumber::from_partial_quotients(&[2, 3, 1, 4]).unwrap();
        let r = FourierRoof::new(vec![(2, c(0.2, 0.1)), (7, c(-0.1, 0.05)), (9, c(0.01, 0.0))]).unwrap();
        for &n in &[0u128, 1, 2, 17, 1000, 12345] {
            for &x in &[0.0, 0.3, 0.77] {
                let x = Phase::from_f64(x);
                let cf = r.birkhoff_closed(x, n, a.phase()).unwrap();
                let nv = birkhoff_sum_naive(&r, n as i128, x, a.phase()).unwrap();
                assert!((cf - nv).abs() < 1e-9 * (1.0 + nv.abs()), "n={n}: {cf} vs {nv}");
            }
        }
    }

    #[test]
    fn exact_deviation_matches_closed_form() {
        let a = RotationNumber::from_partial_quotients(&[2, 3, 1, 4]).unwrap();
        let r = FourierRoof::new(vec![(2, c(0.2, 0.1)), (7, c(-0.1, 0.05))]).unwrap();
        for &n in &[1u128, 17, 12345] {
            let x = Phase::from_f64(0.31);
            let cf = r.birkhoff_closed(x, n, a.phase()).unwrap() - n as f64;
            let ex = r.birkhoff_deviation(&a, x, &BigUint::from(n));
            assert!((cf - ex).abs() < 1e-9, "{cf} {ex}");
        }
    }

    #[test]
    fn derivatives_by_differences() {
        let r = FourierRoof::new(vec![(2, c(0.2, 0.1)), (5, c(-0.1, 0.05))]).unwrap();
        let h = 1e-6;
        for &x in &[0.1, 0.5, 0.9] {
            let fd = (r.eval(x + h, 0).unwrap() - r.eval(x - h, 0).unwrap()) / (2.0 * h);
            assert!((fd - r.eval(x, 1).unwrap()).abs() < 1e-6);
            let fd2 = (r.eval(x + h, 1).unwrap() - r.eval(x - h, 1).unwrap()) / (2.0 * h);
            assert!((fd2 - r.eval(x, 2).unwrap()).abs() < 1e-4);
        }
    }

    #[test]
    fn nonpositive_rejected() {
        assert!(FourierRoof::new(vec![(1, c(1.5, 0.0))]).is_err());
        assert!(FourierRoof::new(vec![(0, c(0.1, 0.0))]).is_err());
    }

    #[test]
    fn timechange_roofs() {
        let v = TimeChange::new(vec![(3, 1, c(0.3, 0.0))]).unwrap();
        let f = roof_from_timechange(&v).unwrap();
        assert!(f.pairs().is_empty());
        let v = TimeChange::new(vec![(3, 0, c(0.3, -0.1))]).unwrap();
        let f = roof_from_timechange(&v).unwrap();
        assert_eq!(f.pairs(), &[(3, c(0.3, -0.1))]);
        let v = TimeChange::new(vec![(4, 0, c(0.2, 0.1)), (4, 3, c(0.25, 0.0))]).unwrap();
        let f = roof_from_timechange(&v).unwrap();
        assert_eq!(f.pairs(), &[(4, c(0.2, 0.1))]);
    }

    #[test]
    fn band_check() {
        let a = RotationNumber::from_partial_quotients(&[2, 5, 7]).unwrap();
        let next = a.q_f64(2);
        let ok = FourierRoof::from_levels(&a, &[(1, c(next.powf(-0.6), 0.0))]).unwrap();
        ok.check_band(&a).unwrap();
        let bad = FourierRoof::from_levels(&a, &[(1, c(next.powf(-0.1), 0.0))]).unwrap();
        assert!(bad.check_band(&a).is_err());
    }
}
