//! Quadratic expansion of `S_{k q_n}(f)` and zeros of `S_{q_n}(f')`.

use super::{birkhoff_sum_phase, Derivative, Roof};
use crate::error::{Error, Result};
use crate::phase::{Arc, Phase};
use crate::rotation::RotationNumber;
use crate::scalar::Scalar;
use rayon::prelude::*;
use serde::Serialize;

fn level_q(alpha: &RotationNumber, n: usize) -> Result<u64> {
    alpha
        .q_u128(n)
        .and_then(|q| u64::try_from(q).ok())
        .ok_or_else(|| Error::Overflow(format!("q_{n} exceeds 64 bits")))
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadExpansion {
    pub actual: f64,
    /// `k S + k^2 S' beta_n`.
    pub predicted: f64,
    /// `k S + k(k-1)/2 S' beta_n`.
    pub predicted_pairs: f64,
    pub budget: f64,
    /// The `L` used for the avoidance hypothesis.
    pub l: f64,
    /// Whether the budget exceeds the main term, making the check vacuous.
    pub non_informative: bool,
}

impl QuadExpansion {
    pub fn error(&self) -> f64 {
        (self.actual - self.predicted).abs()
    }
    pub fn error_pairs(&self) -> f64 {
        (self.actual - self.predicted_pairs).abs()
    }
}

/// Compare `S_{k q_n}(f)(x)` with its second-order expansion in `beta_n`.
/// With `l = None` the smallest admissible `L` is used, just above the
/// inverse distance from the orbit to 0.
pub fn quadratic_expansion_check<F: Scalar, R: Roof<F> + ?Sized>(
    roof: &R,
    x: Phase,
    k: u64,
    n: usize,
    alpha: &RotationNumber,
    l: Option<f64>,
) -> Result<QuadExpansion> {
    let qn = level_q(alpha, n)?;
    let qn1 = alpha.q_f64(n + 1);
    if k < 2 || k as f64 > qn1.powf(0.75) / qn as f64 {
        return Err(Error::InvalidInput(format!("k = {k} outside [2, q_(n+1)^(3/4)/q_n]")));
    }
    let len = k * qn;
    let a = alpha.phase();
    // closest orbit point to 0
    let (mut best, mut best_i, mut y) = (u128::MAX, 0u64, x);
    for i in 0..len {
        let d = y.0.min(y.0.wrapping_neg());
        if d < best {
            best = d;
            best_i = i;
        }
        y += a;
    }
    let dmin = Phase(best).to_f64();
    let l = match l {
        Some(l) => {
            if dmin <= 1.0 / l {
                return Err(Error::Hypothesis { index: best_i as i64, reason: format!("orbit point within 1/L = {:e} of 0", 1.0 / l) });
            }
            l
        }
        None => (1.0 / dmin) * (1.0 + 1e-9),
    };
    if l >= qn1 / 4.0 {
        return Err(Error::Hypothesis {
            index: best_i as i64,
            reason: format!("L = {l:e} is not below q_(n+1)/4 = {:e}", qn1 / 4.0),
        });
    }
    let actual = birkhoff_sum_phase(roof, len as i128, x, a)?.to64();
    let s = birkhoff_sum_phase(roof, qn as i128, x, a)?.to64();
    let ds = birkhoff_sum_phase(&Derivative { roof, order: 1 }, qn as i128, x, a)?.to64();
    let beta = alpha.beta(n);
    let kf = k as f64;
    let (qf, lq) = (qn as f64, l * qn as f64);
    let budget = (lq * kf).powi(3) / (qn1 * qn1) + kf * lq * lq / qn1;
    Ok(QuadExpansion {
        actual,
        predicted: kf * s + kf * kf * ds * beta,
        predicted_pairs: kf * s + kf * (kf - 1.0) / 2.0 * ds * beta,
        budget,
        l,
        non_informative: budget >= kf * qf,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroInterval {
    pub start: f64,
    pub end: f64,
    pub zero: f64,
    #[serde(skip)]
    pub zero_phase: Phase,
    pub residual: f64,
    /// `min(|x_I - a|, |x_I - b|)`.
    pub endpoint_distance: f64,
}

/// For the partition of the circle by `{-i alpha}_{i < q_n}`, the zero of
/// `S_{q_n}(f')` in each interval, by bisection to width `1e-14` or 60 steps.
pub fn derivative_zero_locator<F: Scalar, R: Roof<F> + ?Sized>(roof: &R, n: usize, alpha: &RotationNumber) -> Result<Vec<ZeroInterval>> {
    let qn = level_q(alpha, n)?;
    let a = alpha.phase();
    let mut pts: Vec<Phase> = (0..qn).map(|i| -a.mul_u128(i as u128)).collect();
    pts.sort_unstable();
    let d1 = Derivative { roof, order: 1 };
    let eval = |x: Phase| -> Result<f64> { Ok(birkhoff_sum_phase(&d1, qn as i128, x, a)?.to64()) };
    let m = pts.len();
    (0..m)
        .into_par_iter()
        .map(|j| {
            let start = pts[j];
            let end = pts[(j + 1) % m];
            let len = match (end - start).0 {
                0 => u128::MAX,
                v => v,
            };
            let probe = len >> 20;
            let lo_v = eval(start + Phase(probe))?;
            let hi_v = eval(start + Phase(len - probe))?;
            if !(lo_v < 0.0 && hi_v > 0.0) {
                return Err(Error::Bracket {
                    interval: j,
                    reason: format!("S'(a+) = {lo_v:e}, S'(b-) = {hi_v:e}"),
                });
            }
            let (mut lo, mut hi) = (probe, len - probe);
            let tol = Phase::from_f64(1e-14).0;
            for _ in 0..60 {
                if hi - lo <= tol {
                    break;
                }
                let mid = lo + (hi - lo) / 2;
                if eval(start + Phase(mid))? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let zero = start + Phase(lo + (hi - lo) / 2);
            let residual = eval(zero)?.abs();
            let off = (zero - start).to_f64();
            let total = Phase(len).to_f64();
            let total = if total == 0.0 { 1.0 } else { total };
            Ok(ZeroInterval {
                start: start.to_f64(),
                end: end.to_f64(),
                zero: zero.to_f64(),
                zero_phase: zero,
                residual,
                endpoint_distance: off.min(total - off),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SmallDerivativeSet {
    pub threshold: f64,
    #[serde(skip)]
    pub arcs: Vec<Arc>,
    pub grid_points: usize,
    /// Grid points where `|S_{q_n}(f')| < threshold`.
    pub small_points: usize,
    /// Small points outside the union of arcs.
    pub witnesses: Vec<f64>,
}

/// Arcs of radius `2 threshold` around `x_n + i alpha`, `i < q_n`, and a
/// grid scan confirming that the small-derivative set lies inside them.
pub fn small_derivative_set<F: Scalar, R: Roof<F> + ?Sized>(
    roof: &R,
    n: usize,
    alpha: &RotationNumber,
    threshold: f64,
    grid: usize,
) -> Result<SmallDerivativeSet> {
    let qn = level_q(alpha, n)?;
    if threshold <= 0.0 {
        return Ok(SmallDerivativeSet { threshold, arcs: Vec::new(), grid_points: grid, small_points: 0, witnesses: Vec::new() });
    }
    let zeros = derivative_zero_locator(roof, n, alpha)?;
    let xn = zeros[0].zero_phase;
    let a = alpha.phase();
    let centres: Vec<Phase> = (0..qn).map(|i| xn + a.mul_u128(i as u128)).collect();
    let arcs = centres.iter().map(|c| Arc::new(c.to_f64() - 2.0 * threshold, 4.0 * threshold)).collect::<Vec<_>>();
    let d1 = Derivative { roof, order: 1 };
    let small: Vec<Phase> = (0..grid)
        .into_par_iter()
        .filter_map(|j| {
            let x = Phase::from_f64((j as f64 + 0.5) / grid as f64);
            match birkhoff_sum_phase(&d1, qn as i128, x, a) {
                Ok(v) if v.to64().abs() < threshold => Some(x),
                _ => None,
            }
        })
        .collect();
    let witnesses = small
        .iter()
        .filter(|x| !arcs.iter().any(|arc| arc.contains(**x)))
        .map(|x| x.to_f64())
        .collect();
    Ok(SmallDerivativeSet { threshold, arcs, grid_points: grid, small_points: small.len(), witnesses })
}
