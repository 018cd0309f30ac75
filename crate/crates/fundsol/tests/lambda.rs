use fundsol::calibration::frozen;
use fundsol::complexfn::{gamma, EULER_GAMMA};
use fundsol::contour::adaptive_gk;
use fundsol::lambda::*;
use fundsol::ufunc::{eval_u, SQRT_2PI};
use fundsol::{Error, C64};
use proptest::prelude::*;

fn symbol(t: f64, s: f64) -> f64 {
    eval_u(t, C64::new(s, 0.0)).unwrap().value.re * SQRT_2PI
}

fn lam(t: f64, x: f64) -> LambdaValue {
    eval_lambda(&LambdaQuery::new(t, x)).unwrap()
}

#[test]
fn mass_equals_symbol_at_one() {
    let mass = mellin_of_lambda(1.0, 1.0).unwrap();
    assert!((mass - symbol(1.0, 1.0)).abs() <= 1e-5, "{mass}");
}

#[test]
fn mellin_round_trip() {
    for t in [0.75, 1.5] {
        for s in [1.0, 1.5] {
            let m = mellin_of_lambda(t, s).unwrap();
            assert!((m - symbol(t, s)).abs() <= 1e-5, "t={t} s={s}: {m}");
        }
    }
}

#[test]
fn large_time_decomposition() {
    for t in [1.5f64, 2.0, 4.0] {
        for theta in [0.1, 1.0, 10.0] {
            let direct = eval_lambda(&LambdaQuery { t, x: t * theta, regime: Regime::Direct }).unwrap().value;
            let split = t.powi(-3) * eval_q1(theta).unwrap() + eval_q2(t, theta).unwrap();
            assert!((direct - split).abs() <= 1e-6, "t={t} θ={theta}: {direct} vs {split}");
            let asym = eval_lambda(&LambdaQuery { t, x: t * theta, regime: Regime::LargeTAsymptotic }).unwrap();
            assert!((asym.value - split).abs() <= 1e-14 * split.abs());
        }
    }
}

#[test]
fn direct_and_log_regularized_agree_on_overlap() {
    for t in [0.51, 0.55, 0.59] {
        let ts = slice(t).unwrap();
        for x in [0.5f64, 2.0, 5.0] {
            let a = ts.eval(x.ln(), Regime::Direct).unwrap();
            let b = ts.eval(x.ln(), Regime::LogRegularized).unwrap();
            assert!((a.value - b.value).abs() <= a.err + b.err, "t={t} x={x}: {a:?} {b:?}");
            assert!((a.value - b.value).abs() <= 1e-8 * a.value.abs().max(1e-3));
        }
    }
}

#[test]
fn dispatch_rule() {
    assert_eq!(resolve_regime(0.6, 0.0), Regime::Direct);
    assert_eq!(resolve_regime(0.3, 1.0), Regime::LogRegularized);
    assert_eq!(resolve_regime(0.3, 1e-6), Regime::NearOneScaling);
    assert_eq!(resolve_regime(0.1, (-9.0f64).exp()), Regime::LogRegularized);
    assert_eq!(resolve_regime(0.1, (-11.0f64).exp()), Regime::NearOneScaling);
    assert_eq!(lam(0.3, 2.0).regime, Regime::LogRegularized);
    for r in ["direct", "log_regularized", "large_t_asymptotic", "small_t_series", "near_one_scaling", "auto"] {
        assert_eq!(r.parse::<Regime>().unwrap().as_str(), r);
    }
    assert!("fast".parse::<Regime>().is_err());
}

#[test]
fn domain_and_regime_errors() {
    assert!(matches!(eval_lambda(&LambdaQuery::new(0.0, 1.0)), Err(Error::Domain(_))));
    assert!(matches!(eval_lambda(&LambdaQuery::new(1.0, -1.0)), Err(Error::Domain(_))));
    let q = LambdaQuery { t: 0.3, x: 1.0, regime: Regime::LogRegularized };
    assert!(matches!(eval_lambda(&q), Err(Error::Regime(_))));
    let q = LambdaQuery { t: 0.3, x: 2.0, regime: Regime::Direct };
    assert!(matches!(eval_lambda(&q), Err(Error::Regime(_))));
    assert!(lam(0.3, 1.0).value.is_infinite());
    assert!(matches!(eval_dlambda_dx(1.0, 2.0), Err(Error::Regime(_))));
}

/// Limit of `t⁻¹|X|^{1−2t}Λ` at `X → 0`: `A(t)Γ(1−2t) sin(πt)/(πt)` with `A(t) = (e^γ/2)^{−2t}`
/// the amplitude of `v^{−2t}` in `F(t, 1 + iv)`.
fn near_one_limit(t: f64) -> f64 {
    let a = (EULER_GAMMA.exp() / 2.0).powf(-2.0 * t);
    let g = gamma(C64::new(1.0 - 2.0 * t, 0.0)).unwrap().re;
    a * g * (std::f64::consts::PI * t).sin() / (std::f64::consts::PI * t)
}

#[test]
fn near_one_example() {
    let t = 0.05;
    let lx = (-1.0 / t as f64).exp().ln_1p();
    let v = eval_lambda_log(t, lx, Regime::Auto).unwrap();
    let r = v.value / near_one_leading(t, lx);
    assert!(r > 0.8 && r < 1.2, "{r}");
}

#[test]
fn small_time_scaling() {
    let mut sups = Vec::new();
    for t in [0.1f64, 0.05, 0.02] {
        let ts = slice(t).unwrap();
        let mut sup = 0.0f64;
        for y in [-2.0, -1.5, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 1.5, 2.0] {
            let lx = (y * (-1.0 / t).exp()).ln_1p();
            let r = ts.eval_auto(lx).unwrap().value / near_one_leading(t, lx);
            assert!((r - near_one_limit(t)).abs() <= 0.01 * near_one_limit(t), "t={t} Y={y}: {r}");
            sup = sup.max((r - 1.0).abs());
        }
        sups.push(sup);
    }
    assert!(sups[0] > sups[1] && sups[1] > sups[2], "{sups:?}");
    assert!(sups[2] <= 0.2);
}

#[test]
fn q1_limits() {
    let k = large_time_constants().unwrap();
    assert!((k.q1_at_zero + 2.0 * k.c1 * k.b1 / k.w_prime0).abs() <= 1e-9 * k.q1_at_zero.abs());
    assert!((k.printed_q1_at_zero + k.q1_at_zero).abs() <= 1e-9 * k.q1_at_zero.abs());
    let q = eval_q1(1e-3).unwrap();
    assert!((q - k.q1_at_zero).abs() <= 0.01 * k.q1_at_zero.abs(), "{q}");
    assert!(eval_q1(1e3).unwrap().abs() <= 1e-10 * eval_q1(1.0).unwrap().abs());
    let (left, right) = eval_q1_both_lines(1.0).unwrap();
    assert!((left - right).abs() <= 1e-12);
    let (left, right) = eval_q1_both_lines(3.0).unwrap();
    assert!((left - right).abs() <= 1e-12);
}

#[test]
fn q1_integrable_with_mellin_mass() {
    // ∫Q₁ dθ is the Mellin transform at s = 1: c₁ B(1) Γ(2).
    let k = large_time_constants().unwrap();
    let f = |l: f64| C64::new(eval_q1(l.exp()).unwrap() * l.exp(), 0.0);
    let r = adaptive_gk(f, -14.0, 10.0, 16, 1e-10, 1e-14, 400).unwrap();
    let head = eval_q1((-14.0f64).exp()).unwrap() * (-14.0f64).exp();
    let total = r.value.re + head;
    assert!((total - k.c1 * k.b1).abs() <= 1e-6, "{total}");
    let fa = |l: f64| C64::new(eval_q1(l.exp()).unwrap().abs() * l.exp(), 0.0);
    let abs = adaptive_gk(fa, -14.0, 10.0, 16, 1e-8, 1e-14, 400).unwrap().value.re;
    assert!(abs.is_finite() && abs >= total * (1.0 - 1e-5), "{abs} vs {total}");
}

#[test]
fn q2_zones() {
    let k = large_time_constants().unwrap();
    assert!((k.printed_c2 + k.q2_near_zero).abs() <= 1e-9 * k.q2_near_zero.abs());
    assert!((k.printed_c3 - k.q2_far).abs() <= 1e-9 * k.q2_far.abs());
    let t = 2.0f64;
    let near = k.q2_near_zero * t.powi(-4) + eval_b1(t).unwrap();
    let q = eval_q2(t, 1e-3).unwrap();
    assert!((q - near).abs() <= 0.01 * near.abs(), "{q} vs {near}");
    let far = k.q2_far * t.powi(-4) * 50f64.powi(-5);
    let r = eval_q2(t, 50.0).unwrap() / far;
    assert!(r > 0.8 && r < 1.2, "{r}");
    let l1 = q2_l1(t).unwrap();
    assert!(l1 <= frozen().lambda.q2_l1 * t.powi(-4), "{l1}");
    assert!(matches!(eval_q2(1.0, 1.0), Err(Error::Domain(_))));
}

#[test]
fn series_matches_quadrature() {
    let s = eval_lambda_series(0.25, 2.0, 7).unwrap();
    let q = lam(0.25, 2.0).value;
    assert!((s - q).abs() <= 1e-4 * q.abs(), "{s} vs {q}");
    let q = eval_lambda(&LambdaQuery { t: 0.2, x: 3.0, regime: Regime::SmallTSeries }).unwrap();
    assert_eq!(q.regime, Regime::SmallTSeries);
    assert!((q.value - lam(0.2, 3.0).value).abs() <= 1e-4 * q.value.abs());
    assert!(matches!(eval_lambda_series(0.2, 0.9, 3), Err(Error::Domain(_))));
    assert!(matches!(eval_lambda_series(0.2, 2.0, 0), Err(Error::Domain(_))));
}

#[test]
fn series_leading_coefficient() {
    // Residues −4 of W at 4n + 1 give L₁(x) = 4 Σ x^{−4n−1} = 4x^{−5}/(1 − x^{−4}).
    for x in [1.5f64, 2.0, 5.0] {
        let l1 = series_coefficient(1, x).unwrap();
        let exact = 4.0 * x.powi(-5) / (1.0 - x.powi(-4));
        assert!((l1 - exact).abs() <= 1e-12 * exact, "x={x}: {l1}");
    }
}

#[test]
fn series_decay_shape_at_fixed_time() {
    let c = 2.0 * 2f64.powi(5) * lam(0.2, 2.0).value.abs();
    for x in [1.5f64, 3.0, 10.0, 30.0] {
        assert!(lam(0.2, x).value.abs() <= c * x.powi(-5), "x={x}");
    }
    // Order t, not t⁷: Λ/t tends to L₁ as t → 0.
    let l1 = series_coefficient(1, 2.0).unwrap();
    let r = eval_lambda_series(0.01, 2.0, 7).unwrap() / (0.01 * l1);
    assert!((r - 1.0).abs() < 0.02, "{r}");
}

#[test]
fn mu_is_asymptotic() {
    let rho6 = inverse_b_residue(6).unwrap();
    let r = eval_mu(0.002).unwrap() / (rho6 * 0.002f64.powi(6));
    assert!((r - 1.0).abs() <= 0.05, "{r}");
    // At t = 0.1 the second term is 0.7 of the first, so the leading term does not dominate.
    let r = eval_mu(0.1).unwrap() / (rho6 * 1e-6);
    assert!((r - 1.0).abs() > 0.05, "{r}");
}

#[test]
fn dt_matches_finite_difference() {
    let (t, x, dt) = (1.5, 2.0f64, 1e-4);
    let fd = (lam(t + dt, x).value - lam(t - dt, x).value) / (2.0 * dt);
    let d = eval_dlambda_dt(t, x).unwrap();
    assert!((d - fd).abs() <= 1e-5, "{d} vs {fd}");
    // Small-time path (difference in t) against the contour path just above the threshold.
    let a = eval_dlambda_dt(DIRECT_MIN_T, x).unwrap();
    let b = eval_dlambda_dt(DIRECT_MIN_T + 1e-6, x).unwrap();
    assert!((a - b).abs() <= 1e-5 * b.abs().max(1e-3), "{a} vs {b}");
    assert!(matches!(eval_dlambda_dt(0.3, 1.0), Err(Error::Regime(_))));
}

#[test]
fn dt_bounds() {
    let c = frozen().lambda;
    assert!(eval_dlambda_dt(2.0, 0.5).unwrap().abs() <= c.dt_near * 2f64.powi(-4));
    assert!(eval_dlambda_dt(2.0, 10.0).unwrap().abs() <= c.dt_far * 10f64.powi(-4));
}

#[test]
fn dx_matches_finite_difference() {
    let (t, x, h) = (2.0, 1.5f64, 1e-4);
    let fd = (lam(t, x + h).value - lam(t, x - h).value) / (2.0 * h);
    let d = eval_dlambda_dx(t, x).unwrap();
    assert!((d - fd).abs() <= 1e-5, "{d} vs {fd}");
    let far = eval_dlambda_dx(2.0, 100.0).unwrap();
    assert!(far.abs() <= frozen().lambda.dx_far * 2f64.powi(-4) * 50f64.powi(-4));
}

#[test]
fn dx_near_origin_approaches_residue_limit() {
    // t⁴∂_xΛ(t, θt) = 6c₁Res(B,−1) + O(1/t); extrapolate out the 1/t term.
    let k = large_time_constants().unwrap();
    let at = |t: f64| eval_dlambda_dx(t, 0.01 * t / 3.0).unwrap() * t.powi(4);
    let (a, b) = (at(12.0), at(24.0));
    let extrapolated = 2.0 * b - a;
    assert!((extrapolated - k.dx_near_zero).abs() <= 0.01 * k.dx_near_zero.abs(), "{extrapolated}");
    assert!((b - k.dx_near_zero).abs() < (a - k.dx_near_zero).abs());
}

#[test]
fn green_kernel_scaling() {
    let (t, x) = (0.7, 1.3);
    assert_eq!(eval_g(t, x, 1.0).unwrap(), lam(t, x).value);
    let a = 2.0;
    let lhs = a * eval_g(a * t, a * x, a * 0.9).unwrap();
    let rhs = eval_g(t, x, 0.9).unwrap();
    assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs(), "{lhs} vs {rhs}");
    assert!(matches!(eval_g(t, x, 0.0), Err(Error::Domain(_))));
}

#[test]
fn green_integral_bounded() {
    // Constant data stay constant, so ∫G dy = 1; Λ ≥ 0 makes this the L¹ norm as well.
    let v = green_l1(0.5, 1.0).unwrap();
    assert!((v - 1.0).abs() <= 1e-4, "{v}");
    assert!(v <= frozen().lambda.green);
}

#[test]
fn l1_norm_envelope() {
    let c = frozen().lambda.l1;
    let l2 = l1_norm_lambda(2.0).unwrap();
    assert!(l2 <= c / 5.0, "{l2}");
    let small = l1_norm_lambda(0.2).unwrap();
    assert!(small.is_finite() && small > 0.0);
    assert!(l1_norm_lambda(4.0).unwrap() < l1_norm_lambda(1.0).unwrap());
}

#[test]
fn delta_pairing_limits() {
    let bump = Bump { center: 1.0, radius: 0.5 };
    let v = delta_pairing(0.02, &bump).unwrap();
    assert!((v - bump.value(1.0)).abs() <= 0.05 * bump.value(1.0), "{v}");
    let far = delta_pairing(0.02, &Bump { center: 2.5, radius: 0.5 }).unwrap();
    assert!(far.abs() <= 1e-3, "{far}");
    assert_eq!(delta_pairing(0.0, &bump).unwrap(), bump.value(1.0));
    assert!(matches!(delta_pairing(0.1, &Bump { center: 0.5, radius: 1.0 }), Err(Error::Domain(_))));
}

#[test]
fn profiles() {
    let p = lambda_profile(2.0, 0.01, 100.0, 40).unwrap();
    assert_eq!(p.len(), 40);
    assert!((p[0].0 - 0.01).abs() < 1e-15 && (p[39].0 - 100.0).abs() < 1e-12);
    assert!(p.windows(2).all(|w| w[1].0 > w[0].0));
    assert!(p.iter().all(|(_, v)| v.value.is_finite() && v.regime == Regime::Direct));
    let grid: Vec<f64> = p.iter().map(|(x, _)| *x).collect();
    let vals: Vec<f64> = p.iter().map(|(_, v)| v.value).collect();
    assert!(RadialProfile::new(grid.clone(), vals.clone(), 2.0).is_ok());
    assert!(RadialProfile::new(grid.iter().rev().copied().collect(), vals, 2.0).is_err());
    assert!(lambda_profile(2.0, 1.0, 0.5, 10).is_err());
}

#[test]
fn frozen_lambda_constants_reproduce() {
    let fresh = calibrate_lambda().unwrap();
    let old = frozen().lambda;
    for (a, b) in [
        (fresh.l1, old.l1),
        (fresh.green, old.green),
        (fresh.q2_l1, old.q2_l1),
        (fresh.dt_near, old.dt_near),
        (fresh.dt_far, old.dt_far),
        (fresh.dx_far, old.dx_far),
    ] {
        assert!((a - b).abs() <= 1e-6 * b, "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn green_self_similarity(t in 0.6f64..3.0, x in 0.2f64..5.0, y in 0.3f64..3.0, a in 0.5f64..2.0) {
        let lhs = a * eval_g(a * t, a * x, a * y).unwrap();
        let rhs = eval_g(t, x, y).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1e-6));
    }

    #[test]
    fn lambda_is_real_and_finite(t in 0.05f64..6.0, lx in -4.0f64..4.0) {
        prop_assume!(lx.abs() > 1e-3);
        let v = eval_lambda_log(t, lx, Regime::Auto).unwrap();
        prop_assert!(v.value.is_finite() && v.err.is_finite() && v.err >= 0.0);
    }
}
