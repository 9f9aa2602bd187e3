//! Finite-difference consistency of `L*` and properties of the drift scan.

use kfp::lyapunov::*;
use kfp::model::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn models() -> Vec<ModelParams> {
    let mut out: Vec<ModelParams> = [0.5, 1.0, 2.0, 3.0].iter().map(|&b| ModelParams::exp(1.5, b).unwrap()).collect();
    out.extend([1.5, 2.0, 3.0].iter().map(|&g| ModelParams::poly(1.5, g).unwrap()));
    out
}

fn full_h_spec() -> LyapunovSpec {
    LyapunovSpec { ell: 2.0, eps: 0.3, a_exp: 0.5, b_exp: 0.5, mode: WeightMode::Exp { theta: 0.25, delta: 0.1 } }
}

#[test]
fn centred_differences_are_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let spec = full_h_spec();
    for kind in [ModelParams::exp(1.5, 0.5).unwrap(), ModelParams::poly(1.5, 2.0).unwrap()] {
        let lyap = Lyapunov::new(&kind, &spec).unwrap();
        let (mut coarse, mut fine) = (0.0, 0.0);
        for _ in 0..20 {
            let p = PointEval::one_d(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let exact = lyap.lstar(&p, LstarTarget::FullH);
            let at = |h| (apply_lstar_fd(|q| lyap.h(q), &p, &kind, h).unwrap() - exact).abs();
            coarse += at(2e-2);
            fine += at(1e-2);
        }
        let order = (coarse / fine).log2();
        assert!(order >= 1.9, "{:?}: observed order {order}", kind.equilibrium());
    }
}

#[test]
fn richardson_matches_exact_weight() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let spec = full_h_spec();
    for m in models() {
        let lyap = Lyapunov::new(&m, &spec).unwrap();
        for _ in 0..25 {
            let p = PointEval::one_d(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
            let exact = lyap.lstar(&p, LstarTarget::FullH);
            let fd = lstar_fd_richardson(|q| lyap.h(q), &p, &m, RICHARDSON_STEP).unwrap();
            // Relative to the size of the individual terms, which cancel.
            let err = (fd.total() - exact).abs() / fd.magnitude();
            assert!(err < 1e-6, "{:?} at {:?}: {err}", m.equilibrium(), p);
        }
    }
}

#[test]
fn nonfinite_values_are_reported() {
    let m = ModelParams::exp(1.5, 0.5).unwrap();
    let p = PointEval::one_d(0.0, 0.0);
    assert!(apply_lstar_fd(|q| 1.0 / q.v[0], &p, &m, 0.0).is_err());
    assert!(apply_lstar_fd(|q| if q.v[0] > 0.0 { f64::NAN } else { 0.0 }, &p, &m, 1e-3).is_err());
}

fn nested_cfgs() -> (ScanConfig, ScanConfig) {
    // Same spacing (0.5), so the large box samples a superset of the small one.
    let radii = vec![1.0, 2.0, 3.0, 5.0, 8.0, 10.0, 15.0, 20.0];
    let small = ScanConfig {
        x_half_width: 25.0,
        v_half_width: 25.0,
        samples_per_axis: 101,
        radii: radii.clone(),
        ..ScanConfig::default()
    };
    let large =
        ScanConfig { x_half_width: 50.0, v_half_width: 50.0, samples_per_axis: 201, radii, ..ScanConfig::default() };
    (small, large)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn enlarging_the_box_never_rescues_a_failure(
        eps in 0.0f64..1.0,
        a in -0.5f64..1.25,
        b in 0.5f64..0.95,
        delta in 0.01f64..2.0,
    ) {
        let m = ModelParams::exp(1.5, 0.5).unwrap();
        let spec = LyapunovSpec { ell: 2.0, eps, a_exp: a, b_exp: b, mode: WeightMode::Exp { theta: 0.25, delta } };
        prop_assume!(Lyapunov::new(&m, &spec).is_ok());
        let (small, large) = nested_cfgs();
        let rs = scan_drift_inequality(&m, &spec, &small).unwrap();
        let rl = scan_drift_inequality(&m, &spec, &large).unwrap();
        if !rs.passed {
            prop_assert!(!rl.passed);
        }
        if rl.passed {
            prop_assert!(rs.chosen_r <= rl.chosen_r);
        }
    }

    #[test]
    fn verdict_ignores_radius_order(seed in any::<u64>()) {
        let m = ModelParams::exp(1.5, 0.5).unwrap();
        let spec = exp_weight_spec(1.5, 0.5, 0.5, 0.3, 0.25, 2.0);
        let cfg = ScanConfig { samples_per_axis: 65, ..ScanConfig::default() };
        let mut shuffled = cfg.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.radii.len()).rev() {
            shuffled.radii.swap(i, rng.gen_range(0..=i));
        }
        let a = scan_drift_inequality(&m, &spec, &cfg).unwrap();
        let b = scan_drift_inequality(&m, &spec, &shuffled).unwrap();
        prop_assert_eq!(a.passed, b.passed);
        prop_assert_eq!(a.chosen_r, b.chosen_r);
        prop_assert_eq!(a.chosen_c, b.chosen_c);
    }
}

#[test]
fn tiny_eps_and_delta_exp_spec_is_not_certified() {
    // Literal margin check without the hidden constants of the drift bound.
    let m = ModelParams::exp(1.5, 0.5).unwrap();
    let spec = LyapunovSpec {
        ell: 2.0,
        eps: 1e-3,
        a_exp: 0.05,
        b_exp: 0.95,
        mode: WeightMode::Exp { theta: 0.25, delta: 1e-2 },
    };
    let report = scan_drift_inequality(&m, &spec, &ScanConfig::default()).unwrap();
    assert!(!report.passed);
    assert!(report.note.is_some());
}

#[test]
fn exp_spec_from_search_passes() {
    let m = ModelParams::exp(1.5, 0.5).unwrap();
    let spec = exp_weight_spec(1.5, 0.5, 0.5, 0.3, 0.25, 2.0);
    let report = scan_drift_inequality(&m, &spec, &ScanConfig::default()).unwrap();
    assert!(report.passed, "{}", report.summary());
    assert!(report.min_margin_outside >= 0.0 && report.chosen_c.is_finite());
}

#[test]
fn poly_spec_passes() {
    let m = ModelParams::poly(2.0, 2.0).unwrap();
    let spec = LyapunovSpec { ell: 1.75, eps: 1.0, a_exp: 0.0, b_exp: 0.95, mode: WeightMode::Poly { k: 1.5 } };
    let report = scan_drift_inequality(&m, &spec, &ScanConfig::default()).unwrap();
    assert!(report.passed, "{}", report.summary());
}

#[test]
fn no_cross_term_fails_along_v_zero() {
    let m = ModelParams::exp(1.5, 0.5).unwrap();
    let spec =
        LyapunovSpec { ell: 2.0, eps: 0.0, a_exp: 0.0, b_exp: 0.5, mode: WeightMode::Exp { theta: 0.25, delta: 0.1 } };
    let report =
        scan_drift_inequality(&m, &spec, &ScanConfig { samples_per_axis: 65, ..ScanConfig::default() }).unwrap();
    assert!(!report.passed);
    assert_eq!(report.worst_point.v[0], 0.0);
}

#[test]
fn equivalence_constants_tighten_with_eps() {
    let m = ModelParams::exp(1.5, 0.5).unwrap();
    let cfg = ScanConfig { samples_per_axis: 101, ..ScanConfig::default() };
    let at = |eps| {
        let spec = LyapunovSpec {
            ell: 2.0,
            eps,
            a_exp: 0.05,
            b_exp: 0.95,
            mode: WeightMode::Exp { theta: 0.25, delta: 1e-2 },
        };
        equivalence_constants(&m, &spec, &cfg).unwrap()
    };
    let (c1, c2) = at(1e-3);
    assert!(0.0 < c1 && c1 <= 1.0 && 1.0 <= c2 && c2.is_finite());
    let (h1, h2) = at(5e-4);
    assert!(c1 < h1 && h1 <= 1.0 && 1.0 <= h2 && h2 < c2);
    let zero = at(0.0);
    assert_eq!(zero, (1.0, 1.0));
}

#[test]
fn search_finds_a_poly_certificate() {
    let m = ModelParams::poly(2.0, 2.0).unwrap();
    let template = LyapunovSpec { ell: 1.75, eps: 0.0, a_exp: 0.0, b_exp: 0.5, mode: WeightMode::Poly { k: 1.5 } };
    let cfg = ScanConfig { samples_per_axis: 65, ..ScanConfig::default() };
    let found = search_admissible(&m, &template, &SearchGrid::default(), &cfg).unwrap().expect("a certificate");
    assert!(found.passed && found.spec_echo.eps > 0.0);
}
