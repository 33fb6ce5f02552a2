use super::{fmt_list, rng, ExperimentConfig, Recorder, RunContext, VerdictKind};
use crate::error::{Error, Result};
use crate::phase::Arc;
use crate::primes::{diophantine_gamma2_check, euler_phi, PhaseCoefficients};
use rand::Rng;

fn frac(x: f64) -> f64 {
    x - x.floor()
}

pub(super) fn interval_factorization(cfg: &ExperimentConfig, ctx: &RunContext, rec: &mut Recorder) -> Result<()> {
    let n: u64 = cfg.param("n", 1_000_000)?;
    let h: u64 = cfg.param("h", 10_000)?;
    let b: f64 = cfg.param("b", 2.0)?;
    let qs: Vec<u64> = cfg.param_list("q", &[3, 5, 7])?;
    let gamma1: f64 = cfg.param("gamma1", frac(3f64.sqrt().recip()))?;
    let primes = ctx.primes(n + h)?;
    // first of frac(k / sqrt 2), k = 1, 2, ..., passing the Diophantine condition
    let gamma2 = match cfg.raw.get::<f64>("params", "gamma2")? {
        Some(g) => g,
        None => (1..=1000)
            .map(|k| frac(k as f64 / 2f64.sqrt()))
            .find(|&g| diophantine_gamma2_check(g, n, h, b))
            .ok_or_else(|| Error::InvalidInput("no gamma2 candidate passes the Diophantine check".into()))?,
    };
    let passes = diophantine_gamma2_check(gamma2, n, h, b);
    rec.scalar("gamma2", gamma2);
    rec.verdict("gamma2_diophantine", VerdictKind::Exact, passes, format!("gamma2 = {gamma2}"));
    let c = PhaseCoefficients::new(gamma1, gamma2, n, h)?;
    let mut rng = rng(cfg)?;
    let js: Vec<Arc> = (0..cfg.param("arcs", 3usize)?).map(|_| Arc::new(rng.gen(), rng.gen_range(0.1..0.5))).collect();
    let mut maxima = Vec::new();
    let mut all_ok = true;
    for &q in &qs {
        let part = primes.build_interval_partition(q, gamma1, n, h)?;
        let mut worst = 0.0f64;
        for j in &js {
            let sums = primes.box_grid_sums(&c, part.arcs.len(), 2, |a| Some(part.locate(a)), |y| Some(usize::from(!j.contains(y))))?;
            for row in &sums {
                let marginal = row[0] + row[1];
                worst = worst.max((row[0] - j.len() * marginal).abs() / h as f64);
            }
        }
        rec.at("max_residual", q, worst);
        rec.at("offset_family", q, part.offset_family as f64);
        all_ok &= worst <= 1.0 / q as f64;
        maxima.push(worst);
    }
    rec.verdict("residual_within_1_over_q", VerdictKind::Tolerance, all_ok, format!("max residual per q: {}", fmt_list(&maxima)));
    let first = qs.iter().position(|&q| q == 3);
    let last = qs.iter().position(|&q| q == 7);
    if let (Some(i), Some(k)) = (first, last) {
        rec.verdict(
            "residual_decays",
            VerdictKind::Trend,
            maxima[k] < maxima[i],
            format!("q = 7: {:.3e}, q = 3: {:.3e}", maxima[k], maxima[i]),
        );
    }
    Ok(())
}

pub(super) fn phase_contrast(cfg: &ExperimentConfig, ctx: &RunContext, rec: &mut Recorder) -> Result<()> {
    let n: u64 = cfg.param("n", 1_000_000)?;
    let h: u64 = cfg.param("h", 10_000)?;
    let g1: f64 = cfg.param("gamma1", frac(3f64.sqrt().recip()))?;
    let g2: f64 = cfg.param("gamma2", frac(2f64.sqrt().recip()))?;
    let primes = ctx.primes(n + h)?;
    let zero = primes.quad_phase_sum(&PhaseCoefficients::new(0.0, 0.0, n, h)?)?;
    let theta = primes.theta_interval(n, h)?;
    let twisted = primes.quad_phase_sum(&PhaseCoefficients::new(g1, g2, n, h)?)?.norm();
    rec.at("zero_phase_sum", n, zero.norm());
    rec.at("theta_interval", n, theta);
    rec.at("twisted_sum", n, twisted);
    rec.at("ratio", n, twisted / zero.norm());
    let gap = (zero.re - theta).abs().max(zero.im.abs());
    rec.verdict("zero_phase_is_theta", VerdictKind::Exact, gap <= 1e-9 * theta, format!("|sum - theta| = {gap:.2e}"));
    rec.verdict(
        "twisted_small",
        VerdictKind::Tolerance,
        twisted <= 0.25 * zero.norm(),
        format!("ratio {:.4} (limit 0.25)", twisted / zero.norm()),
    );
    Ok(())
}

pub(super) fn ap_short_avg(cfg: &ExperimentConfig, ctx: &RunContext, rec: &mut Recorder) -> Result<()> {
    let n: u64 = cfg.param("n", 1_000_000)?;
    let h: u64 = cfg.param("h", 10_000)?;
    let v: u64 = cfg.param("v", 3)?;
    let primes = ctx.primes(n + h)?;
    let avg = primes.short_interval_ap_average(n, h, v)?;
    let limit = 0.05 * h as f64 / euler_phi(v) as f64;
    rec.at("average_error", n, avg.average_error);
    rec.at("average_error_at_zero", n, avg.average_at_zero);
    rec.at("offset", n, avg.offset as f64);
    rec.at("windows", n, avg.windows as f64);
    rec.verdict(
        "average_error",
        VerdictKind::Tolerance,
        avg.average_error <= limit,
        format!("{:.3} against 0.05 H / phi(v) = {limit:.3}", avg.average_error),
    );
    Ok(())
}

pub(super) fn bt_ratio(cfg: &ExperimentConfig, ctx: &RunContext, rec: &mut Recorder) -> Result<()> {
    let n: u64 = cfg.param("n", 1_000_000)?;
    let count = cfg.samples(1000)?;
    let primes = ctx.primes(n)?;
    let lo = (n as f64).powf(0.1).ceil() as u64;
    let hi = n / 10;
    let mut rng = rng(cfg)?;
    let mut worst = 0.0f64;
    let mut mean = 0.0;
    for _ in 0..count {
        let len = rng.gen_range(lo..=hi);
        let start = rng.gen_range(0..=n - len);
        let r = primes.theta_interval(start, len)? / len as f64;
        worst = worst.max(r);
        mean += r / count as f64;
    }
    rec.at("max_ratio", n, worst);
    rec.at("mean_ratio", n, mean);
    rec.verdict("ratio_at_most_4", VerdictKind::Tolerance, worst <= 4.0, format!("max theta(I)/|I| = {worst:.4} over {count} intervals"));
    Ok(())
}

pub(super) fn s_qr_build(cfg: &ExperimentConfig, ctx: &RunContext, rec: &mut Recorder) -> Result<()> {
    let q: u64 = cfg.param("q", 3)?;
    let r: u64 = cfg.param("r", 2)?;
    let n: u64 = cfg.param("n", 10_000)?;
    let c: f64 = cfg.param("c", 10.0)?;
    let a: f64 = cfg.param("a", 2.0)?;
    let primes = ctx.primes(cfg.sieve_limit(super::DEFAULT_SIEVE_LIMIT)?)?;
    let sel = primes.select_s_qr(q, r, n, c, a)?;
    rec.scalar("candidates", sel.candidates.len() as f64);
    rec.scalar("members", sel.members.len() as f64);
    rec.scalar("test_points", sel.xs.len() as f64);
    rec.scalar("implied_log_scale", sel.implied_log_scale);
    if let (Some(&x1), Some(&t1)) = (sel.xs.first(), sel.thresholds.first()) {
        rec.at("first_threshold", x1, t1);
    }
    if let Some((l, e)) = sel.best_first_error {
        rec.at("best_first_error", l, e);
    }
    let congruent = sel.members.iter().all(|&l| l % q == r % q);
    rec.verdict(
        "nonempty",
        VerdictKind::Exact,
        !sel.members.is_empty() && congruent,
        format!(
            "{} of {} candidates pass; smallest first error {:.3} against threshold {:.3e}",
            sel.members.len(),
            sel.candidates.len(),
            sel.best_first_error.map_or(f64::NAN, |b| b.1),
            sel.thresholds.first().copied().unwrap_or(f64::NAN)
        ),
    );
    Ok(())
}
