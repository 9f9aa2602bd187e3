//! Closed-form model quantities checked against independent numerical
//! evaluations.

use kfp::model::*;
use kfp::quadrature::{integrate_with_breaks, Tolerance};
use proptest::prelude::*;

fn exp_models() -> Vec<ModelParams> {
    [0.5, 1.0, 2.0, 3.0].iter().map(|&b| ModelParams::exp(1.5, b).unwrap()).collect()
}

fn poly_models() -> Vec<ModelParams> {
    [1.5, 2.0, 3.0].iter().map(|&g| ModelParams::poly(1.5, g).unwrap()).collect()
}

fn central(f: impl Fn(f64) -> f64, z: f64) -> f64 {
    // Step near cbrt(eps) scaled to the argument.
    let h = 6e-6 * (1.0 + z.abs());
    (f(z + h) - f(z - h)) / (2.0 * h)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn potential_gradient_is_its_derivative(x in -50.0f64..50.0, alpha in 1.05f64..3.0) {
        prop_assume!(x.abs() > 1e-3);
        let p = ModelParams::exp(alpha, 1.0).unwrap();
        let fd = central(|z| p.potential(&[z]), x);
        prop_assert!(rel(fd, p.grad_potential(&[x])[0]) < 1e-6);
    }

    #[test]
    fn drift_is_gradient_of_log_equilibrium(v in -50.0f64..50.0) {
        prop_assume!(v.abs() > 1e-3);
        for p in exp_models().iter().chain(poly_models().iter()) {
            // ln M is only resolvable where M has not underflowed.
            if p.equilibrium_density(&[v.abs() + 1.0]) < 1e-250 {
                continue;
            }
            let fd = central(|z| p.equilibrium_density(&[z]).ln(), v);
            prop_assert!(rel(fd, p.equilibrium_drift(&[v])[0]) < 1e-6, "{:?} at {v}", p.equilibrium());
        }
    }

    #[test]
    fn full_h_is_linear_in_the_cross_term(x in -20.0f64..20.0, v in -20.0f64..20.0, eps in 0.0f64..2.0) {
        let m = ModelParams::exp(1.5, 0.5).unwrap();
        let spec = LyapunovSpec { ell: 2.0, eps, a_exp: 0.3, b_exp: 0.6, mode: WeightMode::Exp { theta: 0.25, delta: 0.5 } };
        let l = Lyapunov::new(&m, &spec).unwrap();
        let p = PointEval::one_d(x, v);
        let full = l.lstar(&p, LstarTarget::FullH);
        let parts = l.lstar(&p, LstarTarget::EnergyPower) + eps * l.lstar(&p, LstarTarget::CrossTerm);
        prop_assert!((full - parts).abs() <= 1e-12 * (full.abs() + parts.abs() + 1.0));
    }

    #[test]
    fn weight_lstar_follows_the_chain_rule(x in -15.0f64..15.0, v in -15.0f64..15.0) {
        let m = ModelParams::poly(2.0, 2.0).unwrap();
        for spec in [
            LyapunovSpec { ell: 1.75, eps: 1.0, a_exp: 0.0, b_exp: 0.95, mode: WeightMode::Poly { k: 1.5 } },
            LyapunovSpec { ell: 2.0, eps: 0.3, a_exp: 0.5, b_exp: 0.5, mode: WeightMode::Exp { theta: 0.5, delta: 0.2 } },
        ] {
            let l = Lyapunov::new(&m, &spec).unwrap();
            let p = PointEval::one_d(x, v);
            let h = l.h(&p);
            let g = l.grad_v_h(&p)[0];
            // Φ' and Φ'' written out directly from Φ.
            let (d1, d2) = match spec.mode {
                WeightMode::Poly { k } => {
                    let r = k / spec.ell;
                    (r * h.powf(r - 1.0), r * (r - 1.0) * h.powf(r - 2.0))
                }
                WeightMode::Exp { theta, delta } => {
                    let q = 0.5 * theta;
                    let phi = (delta * h.powf(q)).exp();
                    let u1 = delta * q * h.powf(q - 1.0);
                    let u2 = delta * q * (q - 1.0) * h.powf(q - 2.0);
                    (phi * u1, phi * (u1 * u1 + u2))
                }
            };
            let expect = d1 * l.lstar(&p, LstarTarget::FullH) + d2 * g * g;
            let got = l.lstar(&p, LstarTarget::WeightM);
            prop_assert!((got - expect).abs() <= 1e-12 * (d1.abs() * l.lstar(&p, LstarTarget::FullH).abs() + d2.abs() * g * g + 1e-300));
        }
    }

    #[test]
    fn grad_v_h_matches_differences(x in -20.0f64..20.0, v in -20.0f64..20.0) {
        let m = ModelParams::exp(1.5, 0.5).unwrap();
        let spec = LyapunovSpec { ell: 2.0, eps: 1e-3, a_exp: 0.05, b_exp: 0.95, mode: WeightMode::Exp { theta: 0.25, delta: 0.01 } };
        let l = Lyapunov::new(&m, &spec).unwrap();
        let fd = central(|z| l.h(&PointEval::one_d(x, z)), v);
        let exact = l.grad_v_h(&PointEval::one_d(x, v))[0];
        prop_assume!(exact.abs() > 1e-3);
        prop_assert!(rel(fd, exact) < 1e-6, "{fd} {exact}");
    }

    #[test]
    fn decay_profile_is_decreasing(t in 0.0f64..100.0, dt in 1e-3f64..10.0) {
        for mode in [WeightMode::Exp { theta: 0.25, delta: 1.0 }, WeightMode::Poly { k: 1.5 }] {
            let spec = LyapunovSpec { ell: 2.0, eps: 0.0, a_exp: 0.0, b_exp: 0.5, mode };
            prop_assert!(theta_decay(t + dt, &spec, 0.7) < theta_decay(t, &spec, 0.7));
        }
    }
}

#[test]
fn decay_profile_is_log_linear_in_t_theta() {
    // log Θ = -λ s with s = t^θ: second differences in s vanish, so the
    // profile is log-concave (and log-convex) in those coordinates.
    let spec =
        LyapunovSpec { ell: 2.0, eps: 0.0, a_exp: 0.0, b_exp: 0.5, mode: WeightMode::Exp { theta: 0.5, delta: 1.0 } };
    for i in 1..50 {
        let s = 0.3 * i as f64;
        let at = |s: f64| theta_decay(s * s, &spec, 0.4).ln();
        let second = at(s + 0.1) - 2.0 * at(s) + at(s - 0.1);
        assert!(second.abs() < 1e-12, "{second}");
    }
}

#[test]
fn equilibria_have_unit_mass() {
    let tol = Tolerance { abs: 1e-15, rel: 1e-13, max_panels: 20_000 };
    let breaks: Vec<f64> = [-1000.0, -100.0, -10.0, -1.0, 0.0, 1.0, 10.0, 100.0, 1000.0].to_vec();
    for p in exp_models() {
        let mass = integrate_with_breaks(|v| p.equilibrium_density(&[v]), &breaks, tol).unwrap().value;
        assert!((mass - 1.0).abs() < 1e-8, "{:?}: {mass}", p.equilibrium());
    }
    for p in poly_models() {
        let Equilibrium::Poly { gamma } = p.equilibrium() else { unreachable!() };
        let mass = integrate_with_breaks(|v| p.equilibrium_density(&[v]), &breaks, tol).unwrap().value;
        // Two tails of ∫_R^∞ v^{-1-γ} dv / d_γ.
        let tail = 2.0 * 1000f64.powf(-gamma) / (gamma * p.norm_const());
        assert!((mass + tail - 1.0).abs() < 1e-8 + 0.01 * tail, "{gamma}: {mass} + {tail}");
    }
}

#[test]
fn equilibria_are_even() {
    for p in exp_models().iter().chain(poly_models().iter()) {
        for v in [0.3, 2.0, 17.0] {
            assert_eq!(p.equilibrium_density(&[v]), p.equilibrium_density(&[-v]));
        }
    }
}

#[test]
fn h_is_equivalent_to_energy_power_for_small_eps() {
    let m = ModelParams::exp(1.5, 0.5).unwrap();
    let mut prev: Option<(f64, f64)> = None;
    for eps in [1e-2, 5e-3, 2.5e-3, 1.25e-3] {
        let spec = LyapunovSpec {
            ell: 2.0,
            eps,
            a_exp: 0.05,
            b_exp: 0.95,
            mode: WeightMode::Exp { theta: 0.25, delta: 0.01 },
        };
        let l = Lyapunov::new(&m, &spec).unwrap();
        let (mut c1, mut c2) = (f64::INFINITY, 0.0f64);
        for i in 0..=100 {
            for j in 0..=100 {
                let p = PointEval::one_d(-50.0 + i as f64, -50.0 + j as f64);
                let r = l.h(&p) / l.energy_power(&p);
                c1 = c1.min(r);
                c2 = c2.max(r);
            }
        }
        assert!(0.0 < c1 && c1 <= 1.0 && 1.0 <= c2, "{c1} {c2}");
        if let Some((p1, p2)) = prev {
            assert!(c1 > p1 && c2 < p2);
        }
        prev = Some((c1, c2));
    }
}

#[test]
fn tail_asymptotics_against_quadrature() {
    assert!((asymptotic_constant(1.5, 0.5, 1.15) - 4.0154).abs() < 1e-4);
    let mut x = 200.0;
    while x <= 380.0 {
        let q = profile_density(x, 1.5, 0.5, 1.15).unwrap();
        let a = asymptotic_density_corrected(x, 1.5, 0.5, 1.15);
        assert!((a / q - 1.0).abs() < 0.02, "x = {x}: {a} vs {q}");
        x += 10.0;
    }
}

#[test]
fn leading_tail_error_decays_like_inverse_lambda() {
    // λ (ρ_asym / ρ - 1) tends to -3(2-β)/(8β).
    for (beta, x) in [(0.5, 1e5), (1.0, 1e3), (1.5, 380.0)] {
        let q = profile_density(x, 1.5, beta, 1.15).unwrap();
        let a = asymptotic_density(x, 1.5, beta, 1.15);
        let pot: f64 = (1.0 + x * x).powf(0.75) / 1.5;
        let lambda = 1.15 * pot.powf(0.5 * beta);
        let c = 3.0 * (2.0 - beta) / (8.0 * beta);
        assert!((lambda * (a / q - 1.0) + c).abs() < 0.05 * c, "β = {beta}");
    }
}

#[test]
fn unit_alpha_beta_prefactor_exponent() {
    // α = β = 1: ρ ~ C |x|^{1/4} exp(-δ (⟨x⟩/1)^{1/2}).
    let x: f64 = 1e4;
    let ratio = asymptotic_density(2.0 * x, 1.0, 1.0, 2.0) / asymptotic_density(x, 1.0, 1.0, 2.0);
    let expo = |z: f64| (-2.0 * (1.0 + z * z).sqrt().sqrt()).exp();
    let prefactor = ratio * expo(x) / expo(2.0 * x);
    assert!((prefactor.log2() - 0.25).abs() < 1e-9);
}
