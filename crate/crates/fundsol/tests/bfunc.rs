use fundsol::bfunc::*;
use fundsol::complexfn::{eval_w, eval_w_prime};
use fundsol::{Error, C64};
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

/// Regression anchor fixed after the functional equation and line independence checks.
const B_AT_ONE: f64 = 0.467_522_612_879_888;

#[test]
fn value_at_one_is_the_regression_anchor() {
    let b = eval_b_strip(c(1.0, 0.0)).unwrap();
    assert!((b.re - B_AT_ONE).abs() < 1e-12 && b.im.abs() < 1e-14, "{b}");
}

#[test]
fn strip_values_do_not_depend_on_the_line() {
    let e = BEvaluator::shared();
    for (s, betas) in [
        (c(0.5, 0.0), [0.1, 0.3, 0.45]),
        (c(1.5, 0.0), [0.6, 0.9, 1.2]),
        (c(1.05, 3.0), [0.1, 0.3, 0.7]),
        (c(1.7, -20.0), [0.75, 1.3, 1.6]),
        (c(0.6, 100.0), [0.05, 0.25, 0.4]),
    ] {
        let fast = e.eval_b_strip(s).unwrap();
        for beta in betas {
            let other = e.eval_b_strip_with(s, beta).unwrap();
            assert!(rel(other, fast) < 1e-9, "s={s} beta={beta}: {other} vs {fast}");
        }
    }
}

#[test]
fn strip_needs_admissible_line() {
    let e = BEvaluator::shared();
    assert!(matches!(e.eval_b_strip_with(c(1.0, 0.0), 0.5), Err(Error::Domain(_))));
    assert!(matches!(e.eval_b_strip_with(c(1.6, 0.0), 0.3), Err(Error::Domain(_))));
    assert!(matches!(e.eval_b_strip(c(2.2, 0.0)), Err(Error::Domain(_))));
}

#[test]
fn functional_equation_examples() {
    let l = eval_b(c(1.5, 0.0)).unwrap();
    let r = -eval_w(c(0.5, 0.0)).unwrap() * eval_b(c(0.5, 0.0)).unwrap();
    assert!(rel(l, r) < 1e-8);
}

#[test]
fn zeros_at_three_and_four() {
    let scale = eval_b(c(2.999, 0.0)).unwrap().norm();
    assert!(eval_b(c(3.0, 0.0)).unwrap().norm() <= 1e-8 * scale);
    assert!(eval_b(c(4.0, 0.0)).unwrap().norm() <= 1e-8 * scale);
    let b25 = eval_b(c(2.5, 0.0)).unwrap().norm();
    assert!(eval_b(c(3.0, 0.0)).unwrap().norm() <= 1e-6 * b25);
}

#[test]
fn value_at_five_is_finite_and_continuous() {
    // The pole of W at 4 cancels the zero of B at 4.
    let b5 = eval_b(c(5.0, 0.0)).unwrap();
    let near = eval_b(c(5.0 + 1e-3, 0.0)).unwrap();
    assert!(b5.norm() > 0.5 && b5.norm() < 2.0);
    assert!(rel(near, b5) < 1e-2);
    let mid = eval_b(c(5.0, 1e-7)).unwrap();
    assert!(rel(mid, b5) < 1e-6);
}

#[test]
fn poles_are_refused() {
    for p in [0.0, -1.0, 9.0] {
        assert!(matches!(eval_b(c(p, 0.0)), Err(Error::Pole { .. })), "B({p})");
    }
    assert!(eval_b(c(9.0 + 1e-3, 0.0)).unwrap().norm() > 1e3);
}

#[test]
fn residue_of_inverse_at_three_matches_functional_equation() {
    let one = c(1.0, 0.0);
    let chain = (eval_b(one).unwrap() * eval_w(one).unwrap() * eval_w_prime(c(2.0, 0.0)).unwrap()).inv();
    assert!(rel(residue_inv_b(3.0).unwrap(), chain) < 1e-7);
}

#[test]
fn residue_of_inverse_at_four() {
    let one = c(1.0, 0.0);
    let chain = -(eval_w(c(3.0, 0.0)).unwrap() * eval_w_prime(c(2.0, 0.0)).unwrap() * eval_w(one).unwrap() * eval_b(one).unwrap()).inv();
    let r = residue_inv_b(4.0).unwrap();
    assert!(r.norm() > 0.0 && r.norm().is_finite());
    assert!(rel(r, chain) < 1e-7);
    assert!(residue_inv_b(3.5).unwrap().norm() < 1e-10);
}

#[test]
fn derived_constants_are_consistent() {
    let l = derived_constants().unwrap();
    let c1 = C64::from(l.c1);
    assert!(c1.norm() > 0.0 && c1.norm().is_finite());
    assert!(rel(c1, -C64::from(l.rho3)) < 1e-7);
    assert!(C64::from(l.q[0]).norm() < 1e-12);
    let ratio = C64::from(l.c3) / C64::from(l.rho4);
    assert!(rel(ratio, C64::from(l.b5) / (2.0 * PI).sqrt()) < 1e-12);
    for n in 0..l.p.len() {
        let p = C64::from(l.p[n]);
        let q = C64::from(l.q[n]);
        assert!((q + p * n as f64).norm() <= 1e-8 * p.norm().max(1.0), "n={n}");
    }
    // Res(B, 0) = -B(1)/W'(0).
    let expected = -eval_b(c(1.0, 0.0)).unwrap() / eval_w_prime(c(0.0, 0.0)).unwrap();
    assert!(rel(l.res_b0.into(), expected) < 1e-8);
}

#[test]
fn log_derivatives_match_finite_differences() {
    let e = BEvaluator::shared();
    let h = 1e-5;
    for s in [c(1.0, 2.0), c(2.5, -7.0), c(0.5, 30.0), c(1.5, 300.0)] {
        let j = e.eval_b_jet(s).unwrap();
        assert!(rel(j.value, e.eval_b(s).unwrap()) < 1e-13);
        let fd = (e.eval_b(s + h).unwrap() - e.eval_b(s - h).unwrap()) / (2.0 * h) / j.value;
        assert!((fd - j.dlog).norm() < 1e-8 * j.dlog.norm().max(1.0), "{s}");
        let fd2 = (e.eval_b_jet(s + h).unwrap().dlog - e.eval_b_jet(s - h).unwrap().dlog) / (2.0 * h);
        assert!((fd2 - j.d2log).norm() < 1e-7 * j.d2log.norm().max(1.0), "{s}");
    }
}

#[test]
fn modulus_on_the_strip_is_bounded_but_not_tending_to_one() {
    // |B(1+iv)| decreases slowly; |B(3/2+iv)| is constant.
    let mut prev = f64::INFINITY;
    for v in [5.0, 10.0, 50.0, 100.0, 500.0] {
        let m = eval_b(c(1.0, v)).unwrap().norm();
        assert!(m > 0.05 && m < 5.0 && m < prev);
        prev = m;
    }
    let m5 = eval_b(c(1.5, 5.0)).unwrap().norm();
    let m500 = eval_b(c(1.5, 500.0)).unwrap().norm();
    assert!((m5 - m500).abs() < 1e-6);
}

#[test]
fn growth_right_of_the_strip_is_logarithmic() {
    for re in [2.1, 2.5, 2.9] {
        for v in [10.0, 30.0, 100.0, 300.0, 1000.0] {
            let r = eval_b(c(re, v)).unwrap().norm() / f64::ln(v);
            assert!(r > 0.1 && r < 2.0, "{re}+{v}i: {r}");
        }
    }
}

#[test]
fn cache_round_trip_and_reproducibility() {
    let dir = std::env::temp_dir().join(format!("fundsol-bcache-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("b.bin");
    let a = BEvaluator::new().unwrap();
    let pts = [c(1.0, 0.0), c(2.5, 7.0), c(-0.5, 1.0), c(5.0, 0.0)];
    let vals: Vec<C64> = pts.iter().map(|&s| a.eval_b(s).unwrap()).collect();
    a.save_cache(&path).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 48 * pts.len() as u64);
    let b = BEvaluator::new().unwrap();
    assert_eq!(b.load_cache(&path).unwrap(), pts.len());
    for (s, v) in pts.iter().zip(&vals) {
        assert_eq!(b.eval_b(*s).unwrap(), *v);
    }
    let fresh = BEvaluator::new().unwrap();
    for (s, v) in pts.iter().zip(&vals) {
        assert!(rel(fresh.eval_b(*s).unwrap(), *v) < 1e-9);
    }
    std::fs::write(&path, [0u8; 47]).unwrap();
    assert!(matches!(b.load_cache(&path), Err(Error::Cache(_))));
    std::fs::remove_dir_all(&dir).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn functional_equation_on_the_strip(re in 1.0f64..2.0, im in -200.0f64..200.0) {
        prop_assume!(re > 1.001 && re < 1.999);
        let s = c(re, im);
        let l = eval_b(s).unwrap();
        let r = -eval_w(s - 1.0).unwrap() * eval_b(s - 1.0).unwrap();
        prop_assert!((l - r).norm() <= 1e-8 * l.norm());
    }

    #[test]
    fn real_symmetry(re in 0.05f64..1.95, im in 0.0f64..100.0) {
        let e = BEvaluator::shared();
        let a = e.eval_b_strip(c(re, im)).unwrap();
        let b = e.eval_b_strip(c(re, -im)).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-10 * a.norm());
    }
}

#[test]
fn concurrent_readers_agree() {
    let e = std::sync::Arc::new(BEvaluator::new().unwrap());
    let handles: Vec<_> = (0..4)
        .map(|k| {
            let e = e.clone();
            std::thread::spawn(move || e.eval_b(c(1.2, 100.0 * (k + 1) as f64)).unwrap())
        })
        .collect();
    let got: Vec<C64> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    let fresh = BEvaluator::new().unwrap();
    for (k, v) in got.iter().enumerate() {
        assert_eq!(*v, fresh.eval_b(c(1.2, 100.0 * (k + 1) as f64)).unwrap());
    }
}
