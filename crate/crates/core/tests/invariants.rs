use num_complex::Complex64;
use prime_orbits::experiment::{run_experiment, ExperimentConfig, RunContext};
use prime_orbits::flow::TowerFn;
use prime_orbits::observables::{torus_box_masses, TowerObservable};
use prime_orbits::reparam::{ReparamFlow, TorusPoint};
use prime_orbits::roof::{CircleFn, PowerRoof, RoofFunction};
use prime_orbits::{Phase, RotationNumber, TimeChange};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cloud-in-cell deposit of weighted points into a `bins^2` torus grid.
fn deposit(points: &[(f64, f64, f64)], bins: usize) -> Vec<f64> {
    let mut out = vec![0.0; bins * bins];
    let b = bins as f64;
    for &(x, y, w) in points {
        let (gx, gy) = (x * b - 0.5, y * b - 0.5);
        let (ix, iy) = (gx.floor(), gy.floor());
        let (fx, fy) = (gx - ix, gy - iy);
        for (dx, wx) in [(0, 1.0 - fx), (1, fx)] {
            for (dy, wy) in [(0, 1.0 - fy), (1, fy)] {
                let cx = (ix as i64 + dx).rem_euclid(bins as i64) as usize;
                let cy = (iy as i64 + dy).rem_euclid(bins as i64) as usize;
                out[cx * bins + cy] += w * wx * wy;
            }
        }
    }
    out
}

fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum::<f64>()
}

#[test]
fn time_one_map_preserves_mu_on_128_grid() {
    let v = TimeChange::new(vec![(1, 0, Complex64::new(0.3, 0.0)), (2, 1, Complex64::new(0.1, 0.15))]).unwrap();
    let flow = ReparamFlow::new(RotationNumber::golden(), v.clone());
    let fine = 512;
    let masses = torus_box_masses(&v, fine);
    let total: f64 = masses.iter().sum();
    let centre = |i: usize| (i as f64 + 0.5) / fine as f64;
    let mut before = Vec::with_capacity(fine * fine);
    let mut after = Vec::with_capacity(fine * fine);
    let mut lebesgue_after = Vec::with_capacity(fine * fine);
    for i in 0..fine {
        for j in 0..fine {
            let w = masses[i * fine + j] / total;
            let x = TorusPoint::new(centre(i), centre(j));
            let y = flow.evaluate(1.0, &x);
            before.push((x.x1, x.x2, w));
            after.push((y.x1, y.x2, w));
            lebesgue_after.push((y.x1, y.x2, 1.0 / (fine * fine) as f64));
        }
    }
    let reference = deposit(&before, 128);
    let tv = total_variation(&deposit(&after, 128), &reference);
    let tv_leb = total_variation(&deposit(&lebesgue_after, 128), &reference);
    assert!(tv <= 0.01, "pushforward TV {tv}");
    // Lebesgue weights are visibly not invariant at this resolution
    assert!(tv_leb > 5.0 * tv, "lebesgue {tv_leb} vs mu {tv}");
}

#[test]
fn space_average_matches_monte_carlo() {
    let roof = PowerRoof::<f64>::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = 400_000;
    for obs in TowerObservable::default_bank() {
        let exact = obs.space_average(&roof, true).unwrap() - obs.psi_inf;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..m {
            let y = Phase::from_f64(rng.gen::<f64>());
            let h = roof.value(y).unwrap();
            let s = rng.gen::<f64>() * h;
            let v = h * (obs.value(y, s, h) - obs.psi_inf);
            s1 += v;
            s2 += v * v;
        }
        let mean = s1 / m as f64 / roof.integral();
        let se = ((s2 / m as f64 - (s1 / m as f64).powi(2)) / m as f64).sqrt() / roof.integral();
        assert!((mean - exact).abs() <= 5.0 * se + 1e-9, "{mean} vs {exact} (se {se})");
    }
}

#[test]
fn observables_match_across_the_roof() {
    let roof = PowerRoof::<f64>::default();
    let alpha = RotationNumber::golden().phase();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for obs in TowerObservable::default_bank() {
        for _ in 0..1000 {
            let y = Phase::from_f64(rng.gen::<f64>());
            let h = roof.value(y).unwrap();
            let h1 = roof.value(y + alpha).unwrap();
            assert!((obs.value(y, h, h) - obs.psi_inf).abs() < 1e-12);
            assert!((obs.value(y + alpha, 0.0, h1) - obs.psi_inf).abs() < 1e-12);
        }
    }
}

fn report_bytes(cfg: &ExperimentConfig) -> String {
    let mut r = run_experiment(cfg, &RunContext::default()).unwrap();
    r.seconds = 0.0;
    serde_json::to_string(&r).unwrap()
}

#[test]
fn seeded_reports_are_identical() {
    let text = "experiment = pnt_kochergin\nseed = 5\n[grid]\nn = 10000, 30000\nstarts = 2\n";
    let cfg = ExperimentConfig::parse(text).unwrap();
    assert_eq!(report_bytes(&cfg), report_bytes(&cfg));
    let cfg = ExperimentConfig::minimal("bt_ratio").with_seed(9);
    let a = report_bytes(&cfg);
    assert_eq!(a, report_bytes(&cfg));
    assert_ne!(a, report_bytes(&ExperimentConfig::minimal("bt_ratio").with_seed(10)));
}

#[test]
fn constant_observable_reduces_to_theta() {
    let cfg = ExperimentConfig::parse("experiment = pnt_kochergin\n[grid]\nn = 10000, 20000\nstarts = 1\n").unwrap();
    let r = run_experiment(&cfg, &RunContext::default()).unwrap();
    assert!(r.verdict("constant_reduction").unwrap().passed());
}

#[test]
fn unknown_experiment_lists_registry() {
    let err = run_experiment(&ExperimentConfig::minimal("nope"), &RunContext::default()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("nope") && msg.contains("dk_bound") && msg.contains("equidist_boxes"), "{msg}");
}

#[test]
fn roof_variants_share_the_flow_interface() {
    let flow = prime_orbits::SpecialFlow::new(RoofFunction::<f64>::constant(2.0).unwrap(), RotationNumber::golden());
    let p = flow.point(0.25, 0.5).unwrap();
    let q = flow.evaluate(&p, 3.7).unwrap();
    assert_eq!(q.n, 2);
    assert!((q.point.s - 0.2).abs() < 1e-12);
}
