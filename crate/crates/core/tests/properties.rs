mod common;

use common::{check_decompose, check_deriv, check_ghost, check_roots_against_scan, poly_source, random_expr, Rng};
use proptest::prelude::*;
use switchlayer::closures::{heat_steady_state, relaxation_steady_state, relaxation_transient};
use switchlayer::layer;
use switchlayer::regularize::{smooth_simulate, stochastic_simulate, NoiseConfig, Sigmoid, SigmoidKind};
use switchlayer::{scenario, SwitchedSystem};

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 2..8)
}

fn kinds() -> impl Strategy<Value = SigmoidKind> {
    prop_oneof![
        Just(SigmoidKind::Tanh),
        Just(SigmoidKind::Arctan),
        (0.2f64..5.0).prop_map(|theta| SigmoidKind::Hill { theta }),
        Just(SigmoidKind::AlgebraicSqrt),
        Just(SigmoidKind::NonAnalyticBump),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roots_agree_with_scan(c in coeffs()) {
        if let Err(e) = check_roots_against_scan(&c, 20_000, 1e-8) {
            prop_assert!(false, "{}", e);
        }
    }

    #[test]
    fn sliding_field_is_tangent(c in coeffs(), x2 in -2.0f64..2.0, t in 0.0f64..5.0) {
        let f1 = poly_source(&c);
        let sys = SwitchedSystem::combined(2, "x1 - x2^2", &[&format!("{f1} + 2*x2*(x2 - lam)"), "x2 - lam"]).unwrap();
        let x = [x2 * x2, x2];
        for root in layer::find_sliding_roots(&sys, &x, t).unwrap() {
            let v = layer::sliding_field(&sys, &x, t, &root).unwrap();
            let normal = v[0] - 2.0 * x2 * v[1];
            prop_assert!(normal.abs() <= 1e-10 * (1.0 + v[0].abs() + v[1].abs()), "v·∇h = {}", normal);
        }
    }

    #[test]
    fn hidden_term_vanishes_off_the_layer(seed in any::<u64>(), x1 in -2.0f64..2.0, x2 in -2.0f64..2.0, t in 0.0f64..10.0) {
        let g = random_expr(&mut Rng::new(seed), 3);
        if let Err(e) = check_ghost(&g, &[x1, x2], t, 1e-12) {
            prop_assert!(false, "{}", e);
        }
    }

    #[test]
    fn decomposition_reassembles(c in coeffs(), lam in -1.0f64..1.0, x1 in -2.0f64..2.0, x2 in -2.0f64..2.0) {
        if let Err(e) = check_decompose(&c, lam, &[x1, x2], 1e-12) {
            prop_assert!(false, "{}", e);
        }
    }

    #[test]
    fn derivative_matches_differences(seed in any::<u64>(), x1 in -1.5f64..1.5, x2 in -1.5f64..1.5, t in -1.5f64..1.5, lam in -1.0f64..1.0) {
        let e = random_expr(&mut Rng::new(seed), 3);
        if let Err(msg) = check_deriv(&e, &[x1, x2], t, lam, 1e-5) {
            prop_assert!(false, "{}", msg);
        }
    }

    #[test]
    fn sigmoids_are_monotone_odd_and_bounded(kind in kinds(), eps in 1e-4f64..1.0, a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let s = Sigmoid::new(kind, eps).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (vl, vh) = (s.eval(lo * eps), s.eval(hi * eps));
        prop_assert!(vl <= vh);
        prop_assert!((-1.0..=1.0).contains(&vl) && (-1.0..=1.0).contains(&vh));
        if !matches!(kind, SigmoidKind::Hill { theta } if theta != 1.0) {
            prop_assert!((s.eval(a * eps) + s.eval(-a * eps)).abs() <= 1e-15);
        }
    }

    #[test]
    fn sigmoids_tend_to_sign(kind in kinds(), h in prop_oneof![-1.0f64..-1e-3, 1e-3f64..1.0]) {
        let errs: Vec<f64> = [1e-1, 1e-3, 1e-5, 1e-7]
            .iter()
            .map(|&eps| (Sigmoid::new(kind, eps).unwrap().eval(h) - h.signum()).abs())
            .collect();
        prop_assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{:?}", errs);
        prop_assert!(errs[3] < 1e-3, "{:?}", errs);
    }

    #[test]
    fn relaxation_transient_settles(eps in 1e-3f64..1.0, h in prop_oneof![-1.0f64..-1e-3, 1e-3f64..1.0], y0 in -0.99f64..0.99) {
        let steady = relaxation_steady_state(eps, h).unwrap().y_star;
        if let Ok(y) = relaxation_transient(eps, h, y0, 1e3 * eps / h.abs()) {
            prop_assert!((y - steady).abs() < 1e-8, "{} vs {}", y, steady);
        }
        prop_assert_eq!(relaxation_transient(eps, h, y0, 0.0).ok().unwrap_or(y0), y0);
    }

    #[test]
    fn heat_closure_is_odd_and_increasing(eps in 1e-6f64..1.0, a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let y = |h: f64| heat_steady_state(eps, h).unwrap();
        prop_assert!(y(lo) <= y(hi));
        prop_assert_eq!(y(-a), -y(a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn seeded_runs_reproduce(seed in any::<u64>(), kappa in 0.0f64..0.1) {
        let s = scenario("example2a").unwrap();
        let sig = Sigmoid::tanh(1e-3);
        let noise = NoiseConfig { kappa, seed, substep: 1e-4 };
        let a = stochastic_simulate(&s.system, &s.x0, (0.0, 0.5), &sig, &noise, Some(10)).unwrap();
        let b = stochastic_simulate(&s.system, &s.x0, (0.0, 0.5), &sig, &noise, Some(10)).unwrap();
        prop_assert_eq!(&a, &b);
        let quiet = NoiseConfig { kappa: 0.0, ..noise };
        let c = stochastic_simulate(&s.system, &s.x0, (0.0, 0.5), &sig, &quiet, Some(10)).unwrap();
        let d = smooth_simulate(&s.system, &s.x0, (0.0, 0.5), &sig, 1e-4, Some(10)).unwrap();
        prop_assert_eq!(c, d);
    }
}
