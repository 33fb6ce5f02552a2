use num_bigint::BigUint;
use num_complex::Complex64;
use prime_orbits::experiment::Config;
use prime_orbits::flow::{Direction, SpecialFlow};
use prime_orbits::observables::{prime_orbit_sum, TowerObservable};
use prime_orbits::primes::{Arc, PhaseCoefficients, PrimeTable};
use prime_orbits::reparam::{Coboundary, ReparamFlow, TorusPoint};
use prime_orbits::roof::{birkhoff_sum, CircleFn, FourierRoof, PowerRoof, RoofFunction};
use prime_orbits::rotation::{construct_alpha, AlphaParams, RotationNumber};
use prime_orbits::observables::TorusObservable;
use prime_orbits::flow::TowerFn;
use prime_orbits::Phase;
use proptest::prelude::*;
use std::sync::OnceLock;

fn primes() -> &'static PrimeTable {
    static T: OnceLock<PrimeTable> = OnceLock::new();
    T.get_or_init(|| PrimeTable::build(200_000).unwrap())
}

fn reparam() -> &'static ReparamFlow {
    static F: OnceLock<ReparamFlow> = OnceLock::new();
    F.get_or_init(|| ReparamFlow::default_for(construct_alpha(&AlphaParams::reparam()).unwrap()).unwrap())
}

fn roofs() -> Vec<RoofFunction<f64>> {
    vec![
        RoofFunction::Power(PowerRoof::default()),
        RoofFunction::Fourier(
            FourierRoof::new(vec![(3, Complex64::new(0.2, 0.1)), (8, Complex64::new(0.05, 0.0))]).unwrap(),
        ),
        RoofFunction::constant(1.3).unwrap(),
    ]
}

fn tower_point(flow: &SpecialFlow<f64, RoofFunction<f64>>, x: f64, u: f64) -> prime_orbits::FlowPoint64 {
    let h = flow.roof().value(Phase::from_f64(x)).unwrap();
    flow.point(x, u * h).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn denominators_bracket(a in prop::collection::vec(1u64..50, 2..12)) {
        let alpha = RotationNumber::from_partial_quotients(&a).unwrap();
        for n in 1..a.len() {
            let (qn, qn1) = (alpha.q_f64(n), alpha.q_f64(n + 1));
            let b = alpha.norm_q(n);
            prop_assert!(b <= 1.0 / qn1 * (1.0 + 1e-12), "n={n}");
            prop_assert!(b > 1.0 / (qn1 + qn) * (1.0 - 1e-12), "n={n}");
        }
    }

    #[test]
    fn ostrowski_recombines(a in prop::collection::vec(1u64..20, 3..10), frac in 0.0f64..1.0) {
        let alpha = RotationNumber::from_partial_quotients(&a).unwrap();
        let top = alpha.q_u128(a.len()).unwrap();
        let m = BigUint::from(((top as f64 - 1.0) * frac) as u128);
        let e = alpha.ostrowski_expand(&m).unwrap();
        prop_assert_eq!(e.recombine(&alpha), m);
    }

    #[test]
    fn multiples_are_additive(i in 0u128..1 << 40, j in 0u128..1 << 40) {
        let alpha = RotationNumber::golden();
        let s = alpha.multiple_mod_one(i + j).unwrap();
        let t = alpha.multiple_mod_one(i).unwrap() + alpha.multiple_mod_one(j).unwrap();
        let d = (s - t).rem_euclid(1.0);
        prop_assert!(d.min(1.0 - d) < 1e-11);
    }

    #[test]
    fn birkhoff_cocycle(m in 0i128..3000, n in -3000i128..3000, x in 0.0f64..1.0, which in 0usize..3) {
        let alpha = RotationNumber::golden();
        let g = &roofs()[which];
        let x = Phase::from_f64(x);
        let whole = birkhoff_sum(g, m + n, x, &alpha);
        let a = birkhoff_sum(g, m, x, &alpha);
        let b = birkhoff_sum(g, n, x + alpha.phase().mul_i128(m), &alpha);
        if let (Ok(w), Ok(a), Ok(b)) = (whole, a, b) {
            prop_assert!((w - a - b).abs() <= 1e-8 * (1.0 + w.abs()), "{w} vs {a} + {b}");
        }
    }

    #[test]
    fn flow_group_property(x in 0.0f64..1.0, u in 0.0f64..1.0, t1 in -500.0f64..500.0, t2 in -500.0f64..500.0, which in 0usize..3) {
        let flow = SpecialFlow::new(roofs()[which].clone(), RotationNumber::golden());
        let p = tower_point(&flow, x, u);
        let once = flow.evaluate(&p, t1 + t2).unwrap().point;
        let mid = flow.evaluate(&p, t1).unwrap().point;
        let twice = flow.evaluate(&mid, t2).unwrap().point;
        prop_assert!(once.tower_metric(&twice) <= 1e-7);
        let back = flow.evaluate(&mid, -t1).unwrap().point;
        prop_assert!(back.tower_metric(&p) <= 1e-7);
    }

    #[test]
    fn accelerated_matches_naive(x in 0.0f64..1.0, u in 0.0f64..1.0, t in -2000.0f64..2000.0, which in 0usize..3) {
        let flow = SpecialFlow::new(roofs()[which].clone(), RotationNumber::golden());
        let p = tower_point(&flow, x, u);
        let fast = flow.evaluate(&p, t).unwrap();
        let slow = flow.evaluate_naive(&p, t).unwrap();
        prop_assert_eq!(fast.n, slow.n);
        prop_assert!(fast.point.tower_metric(&slow.point) <= 1e-9);
    }

    #[test]
    fn time_inverse_undoes_cocycle(x1 in 0.0f64..1.0, x2 in 0.0f64..1.0, t in -1000.0f64..1000.0) {
        let f = reparam();
        let x = TorusPoint::new(x1, x2);
        let u = f.time_inverse(t, &x);
        prop_assert!((f.cocycle_integral(u, &x) - t).abs() <= 1e-9);
        prop_assert!((f.time_inverse(f.cocycle_integral(t, &x), &x) - t).abs() <= 1e-9);
    }

    #[test]
    fn reparam_group_property(x1 in 0.0f64..1.0, x2 in 0.0f64..1.0, t1 in -300.0f64..300.0, t2 in -300.0f64..300.0) {
        let f = reparam();
        let x = TorusPoint::new(x1, x2);
        let once = f.evaluate(t1 + t2, &x);
        let twice = f.evaluate(t2, &f.evaluate(t1, &x));
        prop_assert!(once.distance(&twice) <= 1e-8);
    }

    #[test]
    fn coboundary_sums_stay_bounded(x1 in 0.0f64..1.0, x2 in 0.0f64..1.0) {
        let f = reparam();
        let cob = Coboundary::new(f, TorusObservable::cos_x1(), 50);
        let (psi, h) = cob.along_orbit(&TorusPoint::new(x1, x2), 2001);
        let bound = 2.0 * h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut s = 0.0;
        for (m, v) in psi.iter().take(2000).enumerate() {
            s += v;
            prop_assert!(s.abs() <= bound + 1e-9, "M = {}", m + 1);
            prop_assert!((s - (h[0] - h[m + 1])).abs() <= 1e-8 * (1.0 + bound));
        }
    }

    #[test]
    fn residue_classes_partition_theta(q in 1u64..=100, x in 2u64..200_000) {
        let t = primes();
        let classes = t.theta_ap_all(x, q).unwrap();
        prop_assert!((classes.iter().sum::<f64>() - t.theta(x).unwrap()).abs() <= 1e-9 * (1.0 + t.theta(x).unwrap()));
    }

    #[test]
    fn phase_sums_bounded_by_theta(g1 in 0.0f64..1.0, g2 in 0.0f64..1.0, n in 0u64..150_000, h in 1u64..40_000) {
        let t = primes();
        let c = PhaseCoefficients::new(g1, g2, n, h).unwrap();
        let th = t.theta_interval(n, h).unwrap();
        prop_assert!(t.quad_phase_sum(&c).unwrap().norm() <= th * (1.0 + 1e-12) + 1e-9);
        // a 3 x 2 partition of the torus
        let is = [Arc::new(0.0, 0.3), Arc::new(0.3, 0.45), Arc::new(0.75, 0.25)];
        let js = [Arc::new(g1, 0.5), Arc::new(g1 + 0.5, 0.5)];
        let mut total = 0.0;
        for i in &is {
            for j in &js {
                total += t.box_indicator_sum(&c, i, j).unwrap();
            }
        }
        prop_assert!((total - th).abs() <= 1e-9 * (1.0 + th));
    }

    #[test]
    fn prime_orbit_sum_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, x in 0.0f64..1.0) {
        let flow = SpecialFlow::new(RoofFunction::Power(PowerRoof::default()), RotationNumber::golden());
        let p = tower_point(&flow, x, 0.5);
        let bank = TowerObservable::default_bank();
        let (psi, phi) = (&bank[0], &bank[1]);
        let combo = |y: Phase, s: f64, h: f64| a * TowerFn::value(psi, y, s, h) + b * TowerFn::value(phi, y, s, h);
        let n = 5000;
        let t = primes();
        let sp = prime_orbit_sum(psi, &flow, &p, t, n, Direction::Forward, 0).unwrap();
        let sf = prime_orbit_sum(phi, &flow, &p, t, n, Direction::Forward, 0).unwrap();
        let sc = prime_orbit_sum(&combo, &flow, &p, t, n, Direction::Forward, 0).unwrap();
        prop_assert!((sc - a * sp - b * sf).abs() <= 1e-8 * (1.0 + sc.abs()));
        let sup = psi.psi_inf.abs() + psi.amplitude.abs() * psi.u.sup_bound();
        prop_assert!(sp.abs() <= sup * t.theta(n).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn config_round_trip(
        seed in any::<u64>(),
        grid in prop::collection::vec(1u64..10_000_000, 1..4),
        params in prop::collection::btree_map("[a-z_][a-z0-9_]{0,8}", "[A-Za-z0-9.,_-]{1,12}", 0..6),
    ) {
        let mut c = Config::default();
        c.set("", "experiment", "pnt_kochergin");
        c.set("", "seed", seed);
        c.set("grid", "n", grid.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(", "));
        for (k, v) in &params {
            c.set("params", k, v);
        }
        let again = Config::parse(&c.emit()).unwrap();
        prop_assert_eq!(&again, &c);
        prop_assert_eq!(again.list::<u64>("grid", "n").unwrap().unwrap(), grid);
    }
}
