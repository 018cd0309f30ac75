use fundsol::contour::{adaptive_gk, integrate_tanh_sinh};
use fundsol::kernels::eval_h;
use fundsol::kinetic::{
    apply_l, apply_transport, evolve, evolve_values, h_primitive, mellin_moment, multiplier_check, CollisionOperator,
    EvolveControls, LogGrid, TailPolicy, Tails,
};
use fundsol::lambda::RadialProfile;
use fundsol::{Error, C64};
use proptest::prelude::*;

fn bump(x: f64) -> f64 {
    let z = (x - 1.0) / 0.5;
    if z.abs() < 1.0 {
        (-1.0 / (1.0 - z * z)).exp()
    } else {
        0.0
    }
}

fn profile(grid: &LogGrid, f: impl Fn(f64) -> f64) -> RadialProfile {
    RadialProfile::new(grid.nodes.clone(), grid.nodes.iter().map(|&x| f(x)).collect(), 0.0).unwrap()
}

fn h_over_r_at(r: f64) -> f64 {
    if r == 1.0 {
        0.0
    } else {
        eval_h(r).unwrap() / r
    }
}

/// `∫_a^b H(r)/r dr`, with tanh-sinh next to the logarithmic singularity at one.
fn h_over_r(a: f64, b: f64) -> f64 {
    let smooth = |lo: f64, hi: f64| {
        adaptive_gk(|r| C64::new(h_over_r_at(r), 0.0), lo, hi, 16, 1e-13, 1e-300, 20_000).unwrap().value.re
    };
    let mut total = 0.0;
    if a < 0.5 {
        total += smooth(a, b.min(0.5));
    }
    if a < 1.0 && b > 0.5 {
        let lo = a.max(0.5);
        if b >= 1.0 {
            total += integrate_tanh_sinh(|d| h_over_r_at(1.0 - d), 1.0 - lo, 1e-13).unwrap();
        } else {
            total += smooth(lo, b);
        }
    }
    if b > 1.0 && a < 2.0 {
        let hi = b.min(2.0);
        if a <= 1.0 {
            total += integrate_tanh_sinh(|d| h_over_r_at(1.0 + d), hi - 1.0, 1e-13).unwrap();
        } else {
            total += smooth(a, hi);
        }
    }
    if b > 2.0 {
        total += smooth(a.max(2.0), b);
    }
    total
}

#[test]
fn grid_is_geometric() {
    let g = LogGrid::new(1e-2, 1e2, 41).unwrap();
    assert_eq!(g.nodes.len(), 41);
    assert!((g.nodes[20] - 1.0).abs() < 1e-12);
    assert!((g.ratio() - 10f64.powf(0.1)).abs() < 1e-12);
    assert!(matches!(LogGrid::new(1.0, 2.0, 8), Err(Error::Domain(_))));
    assert!(matches!(LogGrid::new(0.0, 2.0, 32), Err(Error::Domain(_))));
}

#[test]
fn transport_primitive_matches_quadrature() {
    for r in [0.05, 0.3, 0.9, 0.999, 1.0, 1.001, 2.0, 7.0, 40.0] {
        let exact = h_over_r(1e-12, r);
        assert!((h_primitive(r) - exact).abs() < 1e-9, "r = {r}: {} vs {exact}", h_primitive(r));
    }
    // Full line: π + 4 ln 2 − 4.
    let total = std::f64::consts::PI + 4.0 * 2f64.ln() - 4.0;
    assert!((h_primitive(1e12) - total).abs() < 1e-10);
}

#[test]
fn constants_are_annihilated() {
    let g = LogGrid::new(1e-2, 1e2, 64).unwrap();
    let l = apply_l(&profile(&g, |_| 3.5), Tails::constant()).unwrap();
    assert!(l.values.iter().all(|v| v.abs() < 1e-10), "{:?}", l.values);
    let h = apply_transport(&g, Tails::constant(), &vec![3.5; 64]).unwrap();
    assert!(h.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn linear_profile_matches_window_integral() {
    // u(y) = y continued as a power law on both sides: twice the collision integral is the
    // transport integral over the whole line, the same constant at every node.
    let g = LogGrid::new(1e-1, 1e1, 96).unwrap();
    let tails = Tails { lower: TailPolicy::Power(1.0), upper: TailPolicy::Power(1.0) };
    let l = apply_l(&profile(&g, |x| x), tails).unwrap();
    let total = h_over_r(1e-12, 1.0) + h_over_r(1.0, 1e6) + 1e-6f64.powi(5) / 5.0;
    for v in &l.values {
        assert!((2.0 * v - total).abs() < 1e-6, "{} vs {total}", 2.0 * v);
    }
    // Transport over the grid window alone: slopes equal to one inside, none outside.
    let u: Vec<f64> = g.nodes.clone();
    let inside = Tails { lower: TailPolicy::Power(0.0), upper: TailPolicy::Power(0.0) };
    let t = apply_transport(&g, inside, &u).unwrap();
    for (i, &x) in g.nodes.iter().enumerate() {
        let window = h_over_r(x / g.x_max, x / g.x_min);
        assert!((t[i] - window).abs() < 1e-8, "node {i}: {} vs {window}", t[i]);
    }
}

#[test]
fn transport_form_is_twice_the_collision_form() {
    let g = LogGrid::new(1e-2, 1e2, 160).unwrap();
    for tails in [Tails::default(), Tails::constant(), Tails { lower: TailPolicy::Power(0.5), upper: TailPolicy::Power(-1.0) }] {
        let p = profile(&g, |x| (-(x.ln() * x.ln())).exp() + 0.1);
        let k = apply_l(&p, tails).unwrap();
        let h = apply_transport(&g, tails, &p.values).unwrap();
        let scale = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, (a, b)) in k.values.iter().zip(&h).enumerate() {
            assert!((2.0 * a - b).abs() < 1e-8 * scale, "{tails:?} node {i}: {} vs {b}", 2.0 * a);
        }
    }
}

#[test]
fn bump_loses_at_peak_and_gains_outside() {
    let g = LogGrid::new(1e-2, 1e2, 128).unwrap();
    let l = apply_l(&profile(&g, bump), Tails::default()).unwrap();
    let at = |x: f64| l.values[g.nodes.iter().position(|&n| n >= x).unwrap()];
    assert!(at(1.0) < 0.0);
    assert!(at(0.1) > 0.0 && at(5.0) > 0.0);
}

#[test]
fn unresolved_profiles_are_rejected() {
    let g = LogGrid::new(1e-1, 1e1, 32).unwrap();
    let p = profile(&g, |x| if x < 1.0 { 1.0 } else { 0.0 });
    assert!(matches!(apply_l(&p, Tails::default()), Err(Error::Unresolved(_))));
}

#[test]
fn zero_and_constant_evolutions_are_stationary() {
    let g = LogGrid::new(1e-2, 1e2, 48).unwrap();
    let c = EvolveControls { snapshots: vec![0.5, 1.0], ..Default::default() };
    let zero = evolve(&profile(&g, |_| 0.0), &c).unwrap();
    assert!(zero.iter().all(|s| s.profile.values.iter().all(|&v| v == 0.0)));
    let c = EvolveControls { snapshots: vec![0.5, 1.0], tails: Tails::constant(), ..Default::default() };
    let one = evolve(&profile(&g, |_| 2.0), &c).unwrap();
    assert!(one.iter().all(|s| s.profile.values.iter().all(|v| (v - 2.0).abs() < 1e-10)));
}

#[test]
fn moments_of_scaled_profiles_scale() {
    let g = LogGrid::new(1e-3, 1e3, 512).unwrap();
    let s = C64::new(1.5, 0.7);
    let p = profile(&g, bump);
    let lam = 1.3;
    let q = profile(&g, |x| bump(x / lam));
    let ratio = mellin_moment(&q, s) / mellin_moment(&p, s);
    let expect = (s * lam.ln()).exp();
    assert!((ratio - expect).norm() < 1e-3 * expect.norm());
    // Exact for piecewise-linear profiles: a single hat.
    let mut hat = vec![0.0; 512];
    hat[256] = 1.0;
    let h = RadialProfile::new(g.nodes.clone(), hat, 0.0).unwrap();
    let (a, b, c) = (g.nodes[255], g.nodes[256], g.nodes[257]);
    let f = |y: f64| {
        let v = if y < b { (y - a) / (b - a) } else { (c - y) / (c - b) };
        C64::new(v * y.powf(0.5), 0.0)
    };
    let direct = adaptive_gk(f, a, b, 8, 1e-12, 1e-300, 100).unwrap().value + adaptive_gk(f, b, c, 8, 1e-12, 1e-300, 100).unwrap().value;
    assert!((mellin_moment(&h, C64::new(1.5, 0.0)) - direct).norm() < 1e-12 * direct.norm());
}

#[test]
fn multiplier_law_holds_along_evolution() {
    // The solution develops a plateau as x → 0, so the lower continuation is constant.
    let g = LogGrid::new(1e-3, 1e3, 512).unwrap();
    let snaps: Vec<f64> = (0..=6).map(|k| 0.05 * k as f64).collect();
    let tails = Tails { lower: TailPolicy::Power(0.0), upper: TailPolicy::Zero };
    let c = EvolveControls { snapshots: snaps, tails, ..Default::default() };
    let traj = evolve(&profile(&g, bump), &c).unwrap();
    for s in [1.5, 2.0, 2.5] {
        let r = multiplier_check(&traj, C64::new(s, 0.0)).unwrap();
        assert!(r < 0.01, "s = {s}: residual {r}");
    }
    // Mass drains through the plateau into the origin, slowly and monotonically.
    assert!(traj.windows(2).all(|w| w[1].mass <= w[0].mass));
    assert!(traj.last().unwrap().mass > 0.95 * traj[0].mass);
}

#[test]
fn multiplier_check_rejects_truncated_data() {
    let g = LogGrid::new(0.6, 3.0, 32).unwrap();
    let c = EvolveControls { snapshots: vec![0.0, 0.01, 0.02], ..Default::default() };
    let traj = evolve(&profile(&g, |x| 1.0 / x), &c).unwrap();
    assert!(matches!(multiplier_check(&traj, C64::new(2.0, 0.0)), Err(Error::Truncation(_))));
}

#[test]
fn single_precision_matches_double() {
    let g = LogGrid::new(1e-2, 1e2, 64).unwrap();
    let u: Vec<f64> = g.nodes.iter().map(|&x| bump(x)).collect();
    let u32v: Vec<f32> = u.iter().map(|&v| v as f32).collect();
    let op64 = CollisionOperator::<f64>::new(g.clone(), Tails::default()).unwrap();
    let op32 = CollisionOperator::<f32>::new(g, Tails::default()).unwrap();
    let c = EvolveControls { snapshots: vec![0.1], rel_tol: 1e-5, ..Default::default() };
    let a = evolve_values(&op64, &u, &c).unwrap();
    let b = evolve_values(&op32, &u32v, &c).unwrap();
    for (x, y) in a[0].1.iter().zip(&b[0].1) {
        assert!((x - *y as f64).abs() < 1e-4);
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let g = LogGrid::new(1e-2, 1e2, 80).unwrap();
    let u: Vec<f64> = g.nodes.iter().map(|&x| bump(x)).collect();
    let op = CollisionOperator::<f64>::new(g, Tails::default()).unwrap();
    let a = op.clone().with_threads(1).collision(&u);
    let b = op.with_threads(7).collision(&u);
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn annihilates_constants_on_any_grid(lo in -3.0f64..0.0, span in 1.0f64..5.0, n in 16usize..80, c in -5.0f64..5.0) {
        let g = LogGrid::new(10f64.powf(lo), 10f64.powf(lo + span), n).unwrap();
        let op = CollisionOperator::<f64>::new(g, Tails::constant()).unwrap();
        let l = op.collision(&vec![c; n]);
        let scale = c.abs() * 10f64.powf(-lo) * 100.0;
        prop_assert!(l.iter().all(|v| v.abs() <= 1e-12 * scale.max(1.0)));
    }

    #[test]
    fn collision_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let g = LogGrid::new(1e-1, 1e1, 32).unwrap();
        let op = CollisionOperator::<f64>::new(g.clone(), Tails::default()).unwrap();
        let u: Vec<f64> = g.nodes.iter().map(|&x| bump(x)).collect();
        let v: Vec<f64> = g.nodes.iter().map(|&x| (-(x.ln()).powi(2)).exp()).collect();
        let w: Vec<f64> = u.iter().zip(&v).map(|(p, q)| a * p + b * q).collect();
        let (lu, lv, lw) = (op.collision(&u), op.collision(&v), op.collision(&w));
        for i in 0..g.n {
            prop_assert!((lw[i] - a * lu[i] - b * lv[i]).abs() < 1e-10 * (1.0 + lw[i].abs()));
        }
    }
}

#[test]
fn generator_reproduces_time_derivative_of_lambda() {
    use fundsol::lambda::{eval_dlambda_dt, eval_lambda, LambdaQuery};
    let t = 2.0;
    let g = LogGrid::new(1e-3, 1e3, 512).unwrap();
    let u: Vec<f64> = g.nodes.iter().map(|&x| eval_lambda(&LambdaQuery::new(t, x)).unwrap().value).collect();
    let tails = Tails { lower: TailPolicy::Power(0.0), upper: TailPolicy::Power(-5.0) };
    let op = CollisionOperator::<f64>::new(g.clone(), tails).unwrap();
    let lu = op.generator(&u);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (i, &x) in g.nodes.iter().enumerate() {
        if !(0.05..=20.0).contains(&x) {
            continue;
        }
        let dt = eval_dlambda_dt(t, x).unwrap();
        scale = scale.max(dt.abs());
        worst = worst.max((lu[i] - dt).abs());
    }
    assert!(worst < 0.01 * scale, "worst {worst} against scale {scale}");
}
