use super::{decreasing, fmt_list, rng, AlphaPreset, ExperimentConfig, Recorder, RunContext, VerdictKind, DEFAULT_SIEVE_LIMIT};
use crate::error::{Error, Result};
use crate::flow::{Direction, FlowPoint, SpecialFlow};
use crate::observables::{reparam_prime_report, BoxGrid, TorusObservable, TowerObservable};
use crate::phase::Phase;
use crate::primes::PrimeTable;
use crate::reparam::{Coboundary, ReparamFlow, TorusPoint};
use crate::roof::{CircleFn, PowerRoof, RoofFunction};
use num_bigint::BigUint;
use rand::Rng;
use rayon::prelude::*;

const PNT_GRID: [u64; 3] = [10_000, 100_000, 1_000_000];

/// True when two consecutive steps of `v` each shrink by at least `factor`.
fn two_step_decay(v: &[f64], factor: f64) -> bool {
    let drops: Vec<bool> = v.windows(2).map(|w| w[0] >= factor * w[1]).collect();
    drops.windows(2).any(|d| d[0] && d[1])
}

pub(super) fn birkhoff_rigidity(cfg: &ExperimentConfig, _ctx: &RunContext, rec: &mut Recorder) -> Result<()> {
    let alpha = cfg.alpha(AlphaPreset::Reparam)?;
    let flow = ReparamFlow::default_for(alpha.clone())?;
    let roof = flow.averaged_roof()?;
    let k_max: u32 = cfg.param("k_max", 10)?;
    let mut rng = rng(cfg)?;
    let pts: Vec<TorusPoint> = (0..cfg.samples(100)?).map(|_| TorusPoint::new(rng.gen(), rng.gen())).collect();
    let (mut dev, mut rig) = (Vec::new(), Vec::new());
    for &n in alpha.flags() {
        let (d, r) = pts
            .par_iter()
            .map(|p| {
                let (mut d, mut r) = (0.0f64, 0.0f64);
                for k in 1..=k_max {
                    let m = alpha.q(n) * BigUint::from(k);
                    d = d.max(roof.birkhoff_deviation(&alpha, Phase::from_f64(p.x1), &m).abs());
                    r = r.max(flow.rigidity_distance(p, &m));
                }
                (d, r)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
        let q = alpha.q_f64(n);
        rec.metric("deviation", Some(q.min(u64::MAX as f64) as u64), None, d);
        rec.metric("rigidity", Some(q.min(u64::MAX as f64) as u64), None, r);
        dev.push(d);
        rig.push(r);
    }
    rec.verdict(
        "deviation_decay",
        VerdictKind::Trend,
        two_step_decay(&dev, 3.0),
        format!("max |S_kqn(f) - kqn| by level: {}", fmt_list(&dev)),
    );
    rec.verdict(
        "rigidity_decay",
        VerdictKind::Trend,
        two_step_decay(&rig, 3.0),
        format!("max rigidity distance by level: {}", fmt_list(&rig)),
    );
    Ok(())
}

pub(super) fn katok_wm(cfg: &ExperimentConfig, _ctx: &RunContext, rec: &mut Recorder) -> Result<()> {
    let flow = ReparamFlow::default_for(cfg.alpha(AlphaPreset::Reparam)?)?;
    let levels = flow.katok_ratios()?;
    let mut deepest = None;
    let mut ratio2_ok = true;
    for l in &levels {
        if let Some(r) = l.ratio1 {
            rec.at("ratio1", l.q, r);
            deepest = Some(r);
        }
        if let Some(r) = l.ratio2 {
            rec.at("ratio2", l.q, r);
            ratio2_ok &= r >= 0.5;
        }
        if let Some(r) = l.ratio2_tail {
            rec.at("ratio2_tail", l.q, r);
        }
    }
    let r1 = deepest.ok_or_else(|| Error::InvalidInput("time change has no nonzero coefficient".into()))?;
    rec.verdict("ratio1_deepest", VerdictKind::Tolerance, r1 <= 0.1, format!("ratio1 at the deepest level = {r1:.3e} (limit 0.1)"));
    rec.verdict("ratio2", VerdictKind::Tolerance, ratio2_ok, "ratio2 >= 0.5 at every level with a coefficient");
    Ok(())
}

struct TowerSetup {
    flow: SpecialFlow<f64, RoofFunction<f64>>,
    starts: Vec<FlowPoint<f64>>,
    grid: Vec<u64>,
    primes: PrimeTable,
    boxes: BoxGrid,
}

fn tower_setup(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<TowerSetup> {
    let alpha = cfg.alpha(AlphaPreset::KocherginDense)?;
    let d = PowerRoof::<f64>::default();
    let roof = PowerRoof::normalized(cfg.raw.get_or("roof", "gamma", d.gamma())?, cfg.raw.get_or("roof", "c0", d.c0())?)?;
    let flow = SpecialFlow::new(RoofFunction::Power(roof), alpha);
    let grid = cfg.grid(&PNT_GRID)?;
    let top = grid.iter().copied().max().unwrap_or(0);
    let primes = ctx.primes(cfg.sieve_limit(DEFAULT_SIEVE_LIMIT.max(top))?)?;
    let mut rng = rng(cfg)?;
    let mut starts = Vec::new();
    for _ in 0..cfg.starts(8)? {
        let x: f64 = rng.gen();
        let h = flow.roof().value(Phase::from_f64(x))?;
        starts.push(flow.point(x, rng.gen::<f64>() * h)?);
    }
    let boxes = BoxGrid::tower(flow.roof(), cfg.param("bins", 32)?, cfg.param("h_max", 4.0)?)?;
    Ok(TowerSetup { flow, starts, grid, primes, boxes })
}

fn box_verdict(rec: &mut Recorder, rows: &[(u64, f64)]) {
    for &(n, v) in rows {
        rec.at("box_discrepancy", n, v);
    }
    let vals: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let ok = vals.len() >= 2 && vals[vals.len() - 1] <= 0.5 * vals[0];
    rec.verdict(
        "box_discrepancy_halves",
        VerdictKind::Trend,
        ok,
        format!("discrepancy across the grid: {} (last must be <= half the first)", fmt_list(&vals)),
    );
}

pub(super) fn pnt_kochergin(cfg: &ExperimentConfig, ctx: &RunContext, rec: &mut Recorder) -> Result<()> {
    let s = tower_setup(cfg, ctx)?;
    let dirs = [Direction::Forward, Direction::Backward];
    for (j, obs) in TowerObservable::default_bank().iter().enumerate() {
        let boxes = (j == 0).then_some(&s.boxes);
        let tab = obs.pnt_report(&s.flow, &s.starts, &s.grid, &dirs, &s.primes, boxes)?;
        rec.metric(&format!("obs{j}_space_average"), None, None, tab.space_average);
        for r in &tab.rows {
            rec.metric(&format!("obs{j}_d1"), Some(r.n), Some(r.z), r.d1);
            rec.metric(&format!("obs{j}_d2"), Some(r.n), Some(r.z), r.d2);
            rec.metric(&format!("obs{j}_d3"), Some(r.n), Some(r.z), r.d3);
        }
        let col = |z: i8, f: fn(&crate::observables::PntRow) -> f64| -> Vec<f64> {
            tab.rows.iter().filter(|r| r.z == z).map(f).collect()
        };
        for z in [1i8, -1] {
            let d2 = col(z, |r| r.d2);
            rec.verdict(
                &format!("obs{j}_d2_decreases_z{z:+}"),
                VerdictKind::Trend,
                decreasing(&d2),
                format!("D2: {}", fmt_list(&d2)),
            );
        }
        let d1: Vec<f64> = col(1, |r| r.d1).iter().zip(col(-1, |r| r.d1)).map(|(a, b)| a.max(b)).collect();
        rec.verdict(
            &format!("obs{j}_max_d1_decreases"),
            VerdictKind::Trend,
            decreasing(&d1),
            format!("max_z D1: {}", fmt_list(&d1)),
        );
        if j == 0 {
            box_verdict(rec, &tab.boxes);
        }
    }
    // psi = 1 reduces D1 to the classical theta deviation
    let one = TowerObservable::constant(1.0);
    let tab = one.pnt_report(&s.flow, &s.starts[..1], &s.grid, &[Direction::Forward], &s.primes, None)?;
    let mut worst = 0.0f64;
    for r in &tab.rows {
        let classical = (s.primes.theta(r.n)? - r.n as f64).abs() / r.n as f64;
        worst = worst.max((r.d1 - classical).abs());
    }
    rec.scalar("constant_reduction_gap", worst);
    rec.verdict("constant_reduction", VerdictKind::Tolerance, worst <= 1e-9, format!("|D1 - |theta(N) - N|/N| = {worst:.2e}"));
    Ok(())
}

pub(super) fn equidist_boxes(cfg: &ExperimentConfig, ctx: &RunContext, rec: &mut Recorder) -> Result<()> {
    let s = tower_setup(cfg, ctx)?;
    let one = TowerObservable::constant(1.0);
    let tab = one.pnt_report(&s.flow, &s.starts, &s.grid, &[Direction::Forward], &s.primes, Some(&s.boxes))?;
    box_verdict(rec, &tab.boxes);
    Ok(())
}

pub(super) fn pnt_reparam(cfg: &ExperimentConfig, ctx: &RunContext, rec: &mut Recorder) -> Result<()> {
    let flow = ReparamFlow::default_for(cfg.alpha(AlphaPreset::Reparam)?)?;
    let cob = Coboundary::new(&flow, TorusObservable::cos_x1(), cfg.raw.get_or("observable", "transfer_n", 1000)?);
    let grid = cfg.grid(&PNT_GRID)?;
    let top = grid.iter().copied().max().unwrap_or(0);
    let primes = ctx.primes(cfg.sieve_limit(DEFAULT_SIEVE_LIMIT.max(top))?)?;
    let a: f64 = cfg.param("log_power", 2.0)?;
    let check_m: u64 = cfg.param("coboundary_m", 10_000)?;
    let boxes = if cfg.param("torus_boxes", false)? { Some(BoxGrid::torus(flow.time_change(), 32)) } else { None };
    let mut rng = rng(cfg)?;
    let starts: Vec<TorusPoint> = (0..cfg.starts(8)?).map(|_| TorusPoint::new(rng.gen(), rng.gen())).collect();
    let mut d3 = vec![0.0; grid.len()];
    let mut d3_log = vec![0.0; grid.len()];
    let mut bounded = true;
    let k = starts.len() as f64;
    for x in &starts {
        let rows = reparam_prime_report(&cob, &flow, x, &primes, &grid, a, boxes.as_ref())?;
        for (i, r) in rows.iter().enumerate() {
            d3[i] += r.d3 / k;
            d3_log[i] += r.d3_log / k;
            if r.n <= check_m {
                bounded &= r.max_birkhoff <= r.transfer_bound;
            }
            if let Some(b) = r.box_discrepancy {
                rec.at("torus_box_discrepancy", r.n, b);
            }
        }
    }
    let mut sorted = grid.clone();
    sorted.sort_unstable();
    for (i, &n) in sorted.iter().enumerate() {
        rec.at("d3", n, d3[i]);
        rec.at("d3_log", n, d3_log[i]);
    }
    rec.scalar("certificate", cob.certificate(cfg.param("certificate_grid", 64)?));
    let last = d3.len() - 1;
    rec.verdict(
        "d3_halves",
        VerdictKind::Trend,
        last > 0 && d3[last] <= 0.5 * d3[0],
        format!("mean D3 across the grid: {} (last must be <= half the first)", fmt_list(&d3)),
    );
    rec.verdict(
        "coboundary_bound",
        VerdictKind::Exact,
        bounded,
        format!("|S_M(psi)| <= 2 sup|h| for M <= {check_m} at every start"),
    );
    Ok(())
}
