use fundsol::calibration::frozen;
use fundsol::complexfn::eval_w;
use fundsol::ufunc::*;
use fundsol::{Error, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

const U_ZERO: f64 = 0.398_942_280_401_432_7;

#[test]
fn value_at_time_zero_is_exact() {
    for s in [c(1.0, 0.0), c(0.3, 7.0), c(1.9, -40.0)] {
        let u = eval_u(0.0, s).unwrap();
        assert_eq!(u.value, c(1.0 / SQRT_2PI, 0.0));
        assert_eq!(u.err, 0.0);
        assert_eq!(eval_u_small_t(0.0, s).unwrap().value, c(1.0 / SQRT_2PI, 0.0));
    }
}

#[test]
fn small_time_limit() {
    let s = c(1.0, 0.0);
    let mut prev = f64::INFINITY;
    for t in [1e-1, 1e-2, 1e-3, 1e-4] {
        let d = (eval_u(t, s).unwrap().value - U_ZERO).norm();
        assert!(d < prev, "t={t}: {d}");
        prev = d;
    }
    assert!(prev < 1e-6, "{prev}");
}

#[test]
fn first_order_in_time_matches_the_delay_equation() {
    // U(t, s) = (1 + W(s-1) t)/√(2π) + o(t).
    let s = c(1.5, 0.0);
    let w = eval_w(s - 1.0).unwrap();
    let mut prev = f64::INFINITY;
    for t in [1e-2, 1e-3, 1e-4] {
        let r = (eval_u(t, s).unwrap().value - (1.0 + w * t) / SQRT_2PI).norm() / t;
        assert!(r < prev, "t={t}: {r}");
        prev = r;
    }
    assert!(prev < 1e-2, "{prev}");
}

#[test]
fn line_independence() {
    let (t, s) = (0.3, c(1.2, 0.0));
    let a = eval_u_with_line(t, s, 1.6).unwrap().value;
    let b = eval_u_with_line(t, s, 1.9).unwrap().value;
    assert!((a - b).norm() < 1e-8, "{a} vs {b}");
    for (t, s) in [(1.0, c(0.4, 3.0)), (2.5, c(1.1, -12.0))] {
        let a = eval_u_with_line(t, s, s.re + 0.2).unwrap().value;
        let b = eval_u_with_line(t, s, s.re + 0.8).unwrap().value;
        assert!((a - b).norm() < 1e-8, "t={t} s={s}: {a} vs {b}");
    }
}

#[test]
fn small_time_form_agrees_with_the_standard_form() {
    let (t, s) = (0.2, c(1.5, 0.0));
    let a = eval_u(t, s).unwrap().value;
    let b = eval_u_small_t(t, s).unwrap().value;
    assert!((a - b).norm() < 1e-8, "{a} vs {b}");
    let b = eval_u_small_t_with_line(t, s, 0.9).unwrap().value;
    assert!((a - b).norm() < 1e-8, "{a} vs {b}");
}

#[test]
fn small_time_excess_is_bounded() {
    let k = frozen().envelope.small_t;
    let u = eval_u_small_t_with_line(0.01, c(1.0, 0.0), 0.5).unwrap().value;
    assert!((u - U_ZERO).norm() <= k * 0.01f64.sqrt());
}

#[test]
fn domain_errors() {
    assert!(matches!(eval_u(0.5, c(2.0, 0.0)), Err(Error::Domain(_))));
    assert!(matches!(eval_u(0.5, c(0.0, 1.0)), Err(Error::Domain(_))));
    assert!(matches!(eval_u(-0.1, c(1.0, 0.0)), Err(Error::Domain(_))));
    assert!(matches!(eval_u_with_line(0.5, c(1.0, 0.0), 0.9), Err(Error::Domain(_))));
    assert!(matches!(eval_u_small_t_with_line(0.5, c(1.0, 0.0), 1.1), Err(Error::Domain(_))));
    assert!(matches!(eval_u_small_t(1.5, c(1.0, 0.0)), Err(Error::Domain(_))));
}

#[test]
fn envelope_at_a_single_point() {
    let s = c(1.0, 20.0);
    let k = frozen().envelope.point;
    assert!(eval_u(1.0, s).unwrap().value.norm() <= k * envelope(1.0, s));
}

#[test]
fn envelope_on_the_calibration_grid() {
    let env = frozen().envelope;
    for (t, s) in envelope_grid() {
        let jet = eval_u_jet(t, s).unwrap();
        let e = envelope(t, s);
        assert!(jet.u.norm() <= env.grid * e, "t={t} s={s}");
        assert!((1.0 + s.norm()) * jet.du_ds.norm() <= env.derivative * t * e, "t={t} s={s}");
    }
}

#[test]
fn derivative_envelope_far_up_the_line() {
    let s = c(1.0, 30.0);
    let d = eval_du_ds(0.2, s).unwrap();
    assert!((1.0 + s.norm()) * d.norm() <= frozen().envelope.derivative * 0.2 * envelope(0.2, s));
}

#[test]
fn s_derivative_matches_central_differences() {
    for (t, s) in [(0.3, c(1.0, 2.0)), (0.02, c(0.7, -1.0)), (1.5, c(1.4, 8.0))] {
        let h = 1e-5;
        let fd = (eval_u(t, s + h).unwrap().value - eval_u(t, s - h).unwrap().value) / (2.0 * h);
        let d = eval_du_ds(t, s).unwrap();
        assert!(rel(d, fd) < 1e-6, "t={t} s={s}: {d} vs {fd}");
    }
}

#[test]
fn s_derivative_vanishes_at_time_zero() {
    assert_eq!(eval_du_ds(0.0, c(1.0, 3.0)).unwrap(), C64::default());
    assert!(eval_du_ds(1e-5, c(1.0, 3.0)).unwrap().norm() < 1e-3);
}

#[test]
fn jet_second_and_time_derivatives() {
    let (t, s) = (0.4, c(1.3, 2.0));
    let h = 1e-4;
    let j = eval_u_jet(t, s).unwrap();
    let fd2 = (eval_u_jet(t, s + h).unwrap().du_ds - eval_u_jet(t, s - h).unwrap().du_ds) / (2.0 * h);
    assert!(rel(j.d2u_ds2, fd2) < 1e-6, "{} vs {fd2}", j.d2u_ds2);
    let fdt = (eval_u(t + h, s).unwrap().value - eval_u(t - h, s).unwrap().value) / (2.0 * h);
    assert!(rel(j.du_dt, fdt) < 1e-6, "{} vs {fdt}", j.du_dt);
}

#[test]
fn delay_equation() {
    assert!(check_u_ode(0.5, c(1.5, 0.0), 1e-4).unwrap() <= 1e-6);
    assert!(check_u_ode(2.0, c(1.2, 5.0), 1e-4).unwrap() <= 1e-6);
    assert!(matches!(check_u_ode(0.5, c(0.5, 0.0), 1e-4), Err(Error::Domain(_))));
}

#[test]
fn delay_equation_refines_with_the_step() {
    let s = c(1.5, 0.0);
    for dt in [1e-1, 1e-2, 1e-3] {
        let a = check_u_ode(0.5, s, dt).unwrap();
        let b = check_u_ode(0.5, s, dt / 2.0).unwrap();
        assert!(b < a, "dt={dt}: {b} vs {a}");
    }
}

#[test]
fn laplace_side_functional_equation() {
    for (z, s) in [
        (c(1.0, 0.0), c(1.5, 0.0)),
        (c(2.0, 3.0), c(1.2, 0.0)),
        (c(0.5, -1.0), c(1.7, 2.0)),
        (c(3.0, 0.5), c(1.05, -4.0)),
        (c(0.2, 6.0), c(1.9, 1.0)),
    ] {
        let r = check_v_functional(z, s).unwrap();
        assert!(r <= 1e-7, "z={z} s={s}: {r}");
    }
}

#[test]
fn laplace_side_does_not_depend_on_the_line() {
    let (z, s) = (c(2.0, 3.0), c(1.2, 0.0));
    let a = LaplaceLine::with_line(s, 0.45).unwrap().eval(z).unwrap();
    let b = LaplaceLine::with_line(s, 0.95).unwrap().eval(z).unwrap();
    assert!((a - b).norm() < 1e-10, "{a} vs {b}");
}

#[test]
fn laplace_side_is_the_transform_of_the_symbol() {
    // Midpoint rule on e^{-zt} U(t, s) over [0, 40].
    let (z, s) = (c(2.0, 1.0), c(1.3, 0.5));
    let dt = 0.01;
    let mut acc = C64::default();
    let mut t = 0.5 * dt;
    while t < 40.0 {
        acc += (-z * t).exp() * eval_u_jet(t, s).unwrap().u * dt;
        t += dt;
    }
    let v = eval_v(z, s).unwrap();
    assert!(rel(acc, v) < 1e-4, "{acc} vs {v}");
}

#[test]
fn laplace_inversion_recovers_the_symbol() {
    for (s, ds) in [(c(1.5, 0.0), [0.6, 1.2]), (c(1.2, 2.0), [0.3, 0.9])] {
        let u = eval_u(1.0, s).unwrap().value;
        let a = bromwich_u(1.0, s, ds[0]).unwrap();
        let b = bromwich_u(1.0, s, ds[1]).unwrap();
        assert!((a - b).norm() < 1e-6, "s={s}: {a} vs {b}");
        assert!((a - u).norm() < 1e-5, "s={s}: {a} vs {u}");
    }
}

#[test]
fn laplace_side_domain() {
    assert!(matches!(eval_v(c(-1.0, 0.0), c(1.0, 0.0)), Err(Error::Domain(_))));
    assert!(matches!(eval_v(c(1.0, 0.0), c(2.5, 0.0)), Err(Error::Domain(_))));
    assert!(matches!(LaplaceLine::with_line(c(1.5, 0.0), 1.6), Err(Error::Domain(_))));
    let l = log_minus_z(c(1.0, 1e-300)).unwrap();
    assert!(l.im <= 0.0 && l.im > -2.0 * std::f64::consts::PI);
}

#[test]
fn profile_matches_point_values() {
    let basis = ProfileBasis::new(1.0, 0.1, 20.0).unwrap();
    for t in [0.02, 0.4, 1.7] {
        let p = basis.profile(t).unwrap();
        for k in [0usize, 7, 150, 200] {
            let s = c(p.c, k as f64 * p.h);
            let j = eval_u_jet(t, s).unwrap();
            assert!((p.f[k] - SQRT_2PI * j.u).norm() < 1e-10, "t={t} k={k}");
            assert!((p.f_s[k] - SQRT_2PI * j.du_ds).norm() < 1e-9, "t={t} k={k}");
            assert!((p.f_t[k] - SQRT_2PI * j.du_dt).norm() < 1e-9, "t={t} k={k}");
        }
    }
}

#[test]
fn frozen_constants_reproduce() {
    let fresh = calibrate_envelopes().unwrap();
    let env = frozen().envelope;
    for (a, b) in [(fresh.point, env.point), (fresh.grid, env.grid), (fresh.derivative, env.derivative), (fresh.small_t, env.small_t)] {
        assert!((a - b).abs() <= 1e-6 * b, "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn representations_agree(t in 0.01f64..0.9, re in 0.2f64..1.8, im in -30.0f64..30.0) {
        let s = c(re, im);
        let a = eval_u(t, s).unwrap().value;
        let b = eval_u_small_t(t, s).unwrap().value;
        prop_assert!((a - b).norm() < 1e-8);
    }

    #[test]
    fn real_symmetry(t in 0.05f64..3.0, re in 0.2f64..1.8, im in 0.0f64..30.0) {
        let a = eval_u(t, c(re, im)).unwrap().value;
        let b = eval_u(t, c(re, -im)).unwrap().value;
        prop_assert!((a - b.conj()).norm() < 1e-10);
    }

    #[test]
    fn delay_equation_anywhere(t in 0.2f64..3.0, re in 1.1f64..1.9, im in -20.0f64..20.0) {
        prop_assert!(check_u_ode(t, c(re, im), 1e-4).unwrap() <= 1e-6);
    }
}
