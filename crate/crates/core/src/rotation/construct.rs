//! Constructors for rotation numbers with prescribed denominator growth.

use super::primality::is_prime_big;
use super::RotationNumber;
use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    /// `q_{n+1} >= g(q_n)` at every flagged level.
    ScaledD,
    /// Prime denominators with `q_{n+1}` in `[low * g(q_n), g(q_n)]`.
    ScaledCA,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlphaParams {
    pub mode: AlphaMode,
    /// Exponents of the growth rule `g(q) = q^kappa`, one per constructed
    /// level; the last entry repeats.
    pub growth: Vec<f64>,
    /// Total number of partial quotients.
    pub depth: usize,
    /// Leading partial quotients, kept as given.
    pub seed: Vec<u64>,
    /// Lower end of the prime window as a fraction of `g(q)`.
    pub window_low: f64,
    /// When false, `ScaledCA` still honours the window but skips primality.
    pub require_prime: bool,
    /// Candidate cap per level before giving up.
    pub max_candidates: u64,
}

impl Default for AlphaParams {
    fn default() -> Self {
        AlphaParams {
            mode: AlphaMode::ScaledD,
            growth: vec![2.0],
            depth: 4,
            seed: vec![1],
            window_low: 0.5,
            require_prime: true,
            max_candidates: 1_000_000,
        }
    }
}

fn ln_big(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        v.to_f64().unwrap_or(f64::INFINITY).ln()
    } else {
        let shift = bits - 900;
        (v >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// `ceil(q^kappa)`, exact for integral `kappa`.
fn growth_target(q: &BigUint, kappa: f64) -> Result<BigUint> {
    if kappa.fract() == 0.0 && kappa >= 0.0 && kappa <= 64.0 {
        return Ok(q.pow(kappa as u32));
    }
    let lg = kappa * ln_big(q);
    if lg < 700.0 {
        return BigUint::from_f64(lg.exp().ceil())
            .ok_or_else(|| Error::InvalidInput(format!("growth exponent {kappa}")));
    }
    // Split exp(lg) = m * 2^e with m in double range.
    let e = ((lg - 600.0) / std::f64::consts::LN_2).floor();
    let m = (lg - e * std::f64::consts::LN_2).exp().ceil();
    Ok(BigUint::from_f64(m).unwrap() << (e as u64))
}

fn ceil_div(a: &BigUint, b: &BigUint) -> BigUint {
    let (d, r) = a.div_rem(b);
    if r.is_zero() {
        d
    } else {
        d + 1u32
    }
}

impl AlphaParams {
    /// `[0; 4, ...]` with `q_{n+1} >= q_n^4` then `q_n^3`: `q = 4, 257, 16974597`.
    pub fn kochergin() -> Self {
        AlphaParams { depth: 3, seed: vec![4], growth: vec![4.0, 3.0], ..Default::default() }
    }

    /// `q_{n+1} >= q_n^2` from `q_1 = 4`: `q = 4, 17, 293, 85866, 7372970249`.
    pub fn kochergin_dense() -> Self {
        AlphaParams { depth: 5, seed: vec![4], growth: vec![2.0], ..Default::default() }
    }

    /// Prime denominators in `[q_n^4 / 2, q_n^4]` from `q_1 = 5`.
    pub fn reparam() -> Self {
        AlphaParams { mode: AlphaMode::ScaledCA, depth: 4, seed: vec![5], growth: vec![4.0], ..Default::default() }
    }
}

/// Build alpha whose denominators grow according to `params`. Flags record
/// the levels `n` at which `q_{n+1}` was constrained by `q_n`.
pub fn construct_alpha(params: &AlphaParams) -> Result<RotationNumber> {
    if params.seed.is_empty() || params.seed.iter().any(|&a| a == 0) {
        return Err(Error::InvalidInput("seed quotients must be nonempty and positive".into()));
    }
    if params.depth < params.seed.len() {
        return Err(Error::InvalidInput(format!(
            "depth {} is shorter than the seed ({} quotients)",
            params.depth,
            params.seed.len()
        )));
    }
    if params.growth.is_empty() || params.growth.iter().any(|&k| !(k >= 1.0)) {
        return Err(Error::InvalidInput("growth exponents must be >= 1".into()));
    }
    if !(params.window_low > 0.0 && params.window_low <= 1.0) {
        return Err(Error::InvalidInput("window_low must lie in (0, 1]".into()));
    }
    let mut quotients: Vec<BigUint> = params.seed.iter().map(|&a| BigUint::from(a)).collect();
    let (mut q_prev, mut q) = (BigUint::zero(), BigUint::one());
    for a in &quotients {
        let next = a * &q + &q_prev;
        q_prev = std::mem::replace(&mut q, next);
    }
    let n0 = quotients.len();
    let prime_mode = params.mode == AlphaMode::ScaledCA && params.require_prime;
    if prime_mode && params.depth > n0 && !is_prime_big(&q) {
        return Err(Error::Construction { level: n0, reason: format!("seed denominator q_{n0} = {q} is not prime") });
    }
    let mut flags = Vec::new();
    for n in n0..params.depth {
        let kappa = params.growth[(n - n0).min(params.growth.len() - 1)];
        let target = growth_target(&q, kappa)?;
        let a = match params.mode {
            AlphaMode::ScaledD => {
                if target > q_prev {
                    ceil_div(&(&target - &q_prev), &q).max(BigUint::one())
                } else {
                    BigUint::one()
                }
            }
            AlphaMode::ScaledCA => {
                // window_low rounded up to a multiple of 2^-20
                let num = (params.window_low * (1u64 << 20) as f64).ceil() as u64;
                let lo = (&target * num + ((1u32 << 20) - 1)) >> 20u32;
                let mut a = if lo > q_prev { ceil_div(&(&lo - &q_prev), &q) } else { BigUint::zero() };
                if a.is_zero() {
                    a = BigUint::one();
                }
                let mut found = None;
                for _ in 0..params.max_candidates {
                    let cand = &a * &q + &q_prev;
                    if cand > target {
                        break;
                    }
                    if !prime_mode || is_prime_big(&cand) {
                        found = Some(a.clone());
                        break;
                    }
                    a += 1u32;
                }
                found.ok_or_else(|| Error::Construction {
                    level: n,
                    reason: format!(
                        "no {}q_{} = a*{q} + {q_prev} in [{lo}, {target}]",
                        if prime_mode { "prime " } else { "" },
                        n + 1
                    ),
                })?
            }
        };
        let next = &a * &q + &q_prev;
        q_prev = std::mem::replace(&mut q, next);
        quotients.push(a);
        flags.push(n);
    }
    Ok(RotationNumber::from_big_quotients(quotients)?.with_flags(flags))
}
