//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are run in full and reported as FAIL;
//! the process fails if any other criterion fails, or if a known failure
//! starts passing.

use num_complex::Complex64;
use prime_orbits::experiment::{run_experiment, ExperimentConfig, ExperimentReport, RunContext};
use prime_orbits::flow::SpecialFlow;
use prime_orbits::primes::{PhaseCoefficients, PrimeTable};
use prime_orbits::roof::{CircleFn, FourierRoof, PowerRoof, RoofFunction};
use prime_orbits::{Phase, RotationNumber};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::ExitCode;
use std::time::Instant;

/// Criterion 12 asks for a nonempty selection at N = 10^4, where the first
/// dyadic test point already forces an error below ~2e-4 while every prime
/// modulus in the window has error at least log of the smallest prime in
/// its class.
const KNOWN_FAILURES: &[u32] = &[12];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn run(name: &str) -> ExperimentReport {
    run_experiment(&ExperimentConfig::minimal(name), &RunContext::default()).unwrap()
}

/// All verdicts of `report` named in `names` must pass.
fn verdicts(report: &ExperimentReport, names: &[&str]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in names {
        let v = report.verdict(n).unwrap_or_else(|| panic!("missing verdict {n}"));
        pass &= v.passed();
        detail.push(format!("{n}: {}", v.detail));
    }
    outcome(pass, detail.join("; "))
}

fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn c1_sieve() -> Outcome {
    let t0 = Instant::now();
    let table = PrimeTable::build(100_000_000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mismatches = (0..10_000)
        .map(|_| rng.gen_range(1..=100_000_000u64))
        .filter(|&n| table.is_prime(n) != is_prime_trial(n))
        .count();
    // independent oracle: plain Eratosthenes on a byte vector
    let x = 1_000_000usize;
    let mut comp = vec![false; x + 1];
    let mut oracle = 0.0;
    for i in 2..=x {
        if !comp[i] {
            oracle += (i as f64).ln();
            let mut j = i * i;
            while j <= x {
                comp[j] = true;
                j += i;
            }
        }
    }
    let theta = table.theta(x as u64).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let ok = mismatches == 0 && (theta - oracle).abs() <= 1e-6 && (theta / 1e6 - 1.0).abs() < 0.01 && secs < 30.0;
    outcome(ok, format!("{mismatches} mismatches, |theta - oracle| = {:.2e}, theta/N = {:.5}, {secs:.1} s", (theta - oracle).abs(), theta / 1e6))
}

fn c2_classes() -> Outcome {
    let table = PrimeTable::build(1_000_000).unwrap();
    let theta = table.theta(1_000_000).unwrap();
    let mut worst = 0.0f64;
    for q in [2, 3, 5, 30, 101] {
        let s: f64 = table.theta_ap_all(1_000_000, q).unwrap().iter().sum();
        worst = worst.max((s - theta).abs());
    }
    outcome(worst <= 1e-9, format!("max |sum_a theta(x;q,a) - theta(x)| = {worst:.2e}"))
}

fn c3_flow_oracle() -> Outcome {
    let t0 = Instant::now();
    let roofs = [
        RoofFunction::Power(PowerRoof::default()),
        RoofFunction::Fourier(FourierRoof::new(vec![(2, Complex64::new(0.3, 0.1)), (13, Complex64::new(0.05, -0.02))]).unwrap()),
        RoofFunction::constant(0.7).unwrap(),
    ];
    let flows: Vec<_> = roofs.into_iter().map(|r| SpecialFlow::new(r, RotationNumber::golden())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut oracle, mut group) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let flow = &flows[rng.gen_range(0..flows.len())];
        let x: f64 = rng.gen();
        let h = flow.roof().value(Phase::from_f64(x)).unwrap();
        let p = flow.point(x, rng.gen::<f64>() * h).unwrap();
        let t = rng.gen_range(-1e4..1e4);
        let fast = flow.evaluate(&p, t).unwrap().point;
        let slow = flow.evaluate_naive(&p, t).unwrap().point;
        oracle = oracle.max(fast.tower_metric(&slow));
        let t2 = rng.gen_range(-1e4..1e4);
        let split = flow.evaluate(&fast, t2).unwrap().point;
        let whole = flow.evaluate(&p, t + t2).unwrap().point;
        group = group.max(split.tower_metric(&whole));
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        oracle <= 1e-9 && group <= 1e-7 && secs < 60.0,
        format!("oracle {oracle:.2e}, group {group:.2e}, {secs:.1} s"),
    )
}

fn c16_vinogradov() -> Outcome {
    let table = PrimeTable::build(1_000_000).unwrap();
    let alpha = RotationNumber::golden().value();
    let s = table.quad_phase_sum(&PhaseCoefficients::new(alpha, 0.0, 0, 1_000_000).unwrap()).unwrap().norm();
    let r = s / table.theta(1_000_000).unwrap();
    outcome(r <= 0.1, format!("|sum e(p alpha) log p| / theta = {r:.4e}"))
}

fn main() -> ExitCode {
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "sieve exactness", Box::new(c1_sieve)),
        (2, "residue-class partition", Box::new(c2_classes)),
        (3, "flow oracle equivalence", Box::new(c3_flow_oracle)),
        (4, "Denjoy-Koksma", Box::new(|| {
            verdicts(&run("dk_bound"), &["golden_indicator", "golden_sawtooth", "pell_indicator", "pell_sawtooth"])
        })),
        (5, "rigidity decay", Box::new(|| verdicts(&run("birkhoff_rigidity"), &["deviation_decay", "rigidity_decay"]))),
        (6, "quadratic expansion", Box::new(|| verdicts(&run("quad_expansion"), &["square_prediction", "max_prediction"]))),
        (7, "derivative zeros", Box::new(|| verdicts(&run("deriv_zeros"), &["one_zero_per_interval", "small_set_contained"]))),
        (8, "claims P1-P3", Box::new(|| verdicts(&run("section_claims"), &["claims_p1_p3", "rest_ratio"]))),
        (9, "interval factorization", Box::new(|| {
            verdicts(&run("interval_factorization"), &["gamma2_diophantine", "residual_within_1_over_q", "residual_decays"])
        })),
        (10, "phase contrast", Box::new(|| verdicts(&run("phase_contrast"), &["zero_phase_is_theta", "twisted_small"]))),
        (11, "short-interval average and theta ratio", Box::new(|| {
            let a = verdicts(&run("ap_short_avg"), &["average_error"]);
            let b = verdicts(&run("bt_ratio"), &["ratio_at_most_4"]);
            outcome(a.pass && b.pass, format!("{}; {}", a.detail, b.detail))
        })),
        (12, "S(q, r) selection", Box::new(|| verdicts(&run("s_qr_build"), &["nonempty"]))),
        (13, "Katok ratios", Box::new(|| verdicts(&run("katok_wm"), &["ratio1_deepest", "ratio2"]))),
        (14, "coboundary prime sums", Box::new(|| verdicts(&run("pnt_reparam"), &["d3_halves", "coboundary_bound"]))),
        (15, "tower prime sums", Box::new(|| {
            let t0 = Instant::now();
            let r = run("pnt_kochergin");
            let secs = t0.elapsed().as_secs_f64();
            let mut names = vec!["box_discrepancy_halves".to_string()];
            for j in 0..3 {
                names.push(format!("obs{j}_d2_decreases_z+1"));
                names.push(format!("obs{j}_d2_decreases_z-1"));
                names.push(format!("obs{j}_max_d1_decreases"));
            }
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let o = verdicts(&r, &refs);
            outcome(o.pass && secs < 600.0, format!("{} ({secs:.1} s)", o.detail))
        })),
        (16, "rotation prime sum baseline", Box::new(c16_vinogradov)),
    ];
    let mut unexpected = Vec::new();
    let mut passed = 0;
    for (id, name, check) in &criteria {
        let t0 = Instant::now();
        let o = check();
        let known = KNOWN_FAILURES.contains(id);
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if known { " [known failure]" } else { "" };
        println!("criterion {id:>2} {tag}{note} ({name}, {:.1} s): {}", t0.elapsed().as_secs_f64(), o.detail);
        passed += usize::from(o.pass);
        if o.pass == known {
            unexpected.push(*id);
        }
    }
    println!("acceptance: {passed}/{} criteria pass", criteria.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
