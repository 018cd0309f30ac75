//! Complex special functions and the Mellin multiplier `W`.

use crate::contour::{find_root_real, integrate_circle};
use crate::error::{Error, Result};
use crate::C64;
use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Riemann zeta at 2..=10.
const ZETA: [f64; 11] = [
    0.0,
    0.0,
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_2,
    1.082_323_233_711_138_2,
    1.036_927_755_143_37,
    1.017_343_061_984_449,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_4,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818_1,
];

/// Bernoulli numbers B_2, B_4, ..., B_20.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

const SHIFT_TARGET: f64 = 10.0;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn check_finite(z: C64, what: &str) -> Result<C64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::Domain(format!("{what} produced a non-finite value")))
    }
}

fn nonpositive_integer(z: C64) -> Option<f64> {
    let n = z.re.round();
    if n <= 0.0 && (z - c(n, 0.0)).norm() < 1e-14 {
        Some(n)
    } else {
        None
    }
}

fn gamma_pole_error(z: C64, n: f64) -> Error {
    Error::Pole {
        value: format!("{z}"),
        pole: format!("{n}"),
        distance: (z - c(n, 0.0)).norm(),
    }
}

/// Stable `cot(pi z)` that stays finite for large imaginary parts.
pub fn cot_pi(z: C64) -> C64 {
    let w = z * PI;
    let i = C64::i();
    if w.im.abs() < 5.0 {
        w.cos() / w.sin()
    } else if w.im > 0.0 {
        let q = (i * w * 2.0).exp();
        i * (q + 1.0) / (q - 1.0)
    } else {
        let q = (-i * w * 2.0).exp();
        -i * (q + 1.0) / (q - 1.0)
    }
}

/// Stable `csc^2(pi z)`.
pub fn csc2_pi(z: C64) -> C64 {
    let w = z * PI;
    if w.im.abs() < 5.0 {
        let sn = w.sin();
        return (sn * sn).inv();
    }
    let i = C64::i();
    let q = if w.im > 0.0 { (i * w * 2.0).exp() } else { (-i * w * 2.0).exp() };
    // csc^2 w = -4 q / (1 - q)^2 for q = e^{+-2iw}
    -q * 4.0 / ((C64::new(1.0, 0.0) - q) * (C64::new(1.0, 0.0) - q))
}

/// Principal-branch `ln Gamma(z)`, analytic off the non-positive real axis.
pub fn log_gamma(z: C64) -> Result<C64> {
    if let Some(n) = nonpositive_integer(z) {
        return Err(gamma_pole_error(z, n));
    }
    // Upward recurrence keeps the branch continuous with the positive axis.
    let mut w = z;
    let mut acc = C64::new(0.0, 0.0);
    while w.re < SHIFT_TARGET {
        acc += w.ln();
        w += 1.0;
    }
    check_finite(stirling(w) - acc, "log_gamma")
}

fn stirling(w: C64) -> C64 {
    let mut s = (w - 0.5) * w.ln() - w + LN_SQRT_2PI;
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut p = inv;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let n = 2.0 * (k as f64 + 1.0);
        s += p * (b / (n * (n - 1.0)));
        p *= inv2;
    }
    s
}

/// Complex Gamma function.
pub fn gamma(z: C64) -> Result<C64> {
    Ok(log_gamma(z)?.exp())
}

/// Digamma `psi(z)`.
pub fn digamma(z: C64) -> Result<C64> {
    if let Some(n) = nonpositive_integer(z) {
        return Err(gamma_pole_error(z, n));
    }
    if z.re < 0.5 {
        let one = C64::new(1.0, 0.0);
        return check_finite(digamma(one - z)? - cot_pi(z) * PI, "digamma");
    }
    let mut w = z;
    let mut acc = C64::new(0.0, 0.0);
    while w.re < SHIFT_TARGET {
        acc += w.inv();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut s = w.ln() - inv * 0.5;
    let mut p = inv2;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let n = 2.0 * (k as f64 + 1.0);
        s -= p * (b / n);
        p *= inv2;
    }
    check_finite(s - acc, "digamma")
}

/// Trigamma `psi'(z)`.
pub fn trigamma(z: C64) -> Result<C64> {
    polygamma(1, z)
}

/// Polygamma of order 1 or 2.
pub fn polygamma(order: u32, z: C64) -> Result<C64> {
    if order == 0 {
        return digamma(z);
    }
    if order > 2 {
        return Err(Error::Domain(format!("polygamma order {order} not supported")));
    }
    if let Some(n) = nonpositive_integer(z) {
        return Err(gamma_pole_error(z, n));
    }
    let one = C64::new(1.0, 0.0);
    if z.re < 0.5 {
        // psi1(1-z) + psi1(z) = pi^2 csc^2(pi z)
        // psi2(1-z) - psi2(z) = 2 pi^3 cot(pi z) csc^2(pi z)
        let cs = csc2_pi(z);
        return if order == 1 {
            check_finite(cs * (PI * PI) - polygamma(1, one - z)?, "trigamma")
        } else {
            check_finite(polygamma(2, one - z)? - cot_pi(z) * cs * (2.0 * PI * PI * PI), "polygamma")
        };
    }
    let mut w = z;
    let mut acc = C64::new(0.0, 0.0);
    while w.re < SHIFT_TARGET {
        let inv = w.inv();
        acc += if order == 1 { inv * inv } else { inv * inv * inv * 2.0 };
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let s = if order == 1 {
        let mut s = inv + inv2 * 0.5;
        let mut p = inv2 * inv;
        for b in BERNOULLI.iter() {
            s += p * *b;
            p *= inv2;
        }
        s
    } else {
        let mut s = -inv2 - inv2 * inv;
        let mut p = inv2 * inv2;
        for (k, b) in BERNOULLI.iter().enumerate() {
            let n = 2.0 * (k as f64 + 1.0);
            s -= p * (b * (n + 1.0));
            p *= inv2;
        }
        s
    };
    check_finite(if order == 1 { s + acc } else { s - acc }, "polygamma")
}

/// Where the multiplier is singular or removable.
#[derive(Debug, Clone, Copy, PartialEq)]
enum WPoint {
    Regular,
    Pole(f64),
    Removable(f64),
}

const POLE_GUARD: f64 = 1e-6;
const SERIES_ZONE: f64 = 1e-3;

fn classify(s: C64) -> WPoint {
    // Poles at 4n (n >= 1) and -2(2n+1); removable points at -4n (n >= 0).
    let even = (s.re / 2.0).round() * 2.0;
    let d = (s - c(even, 0.0)).norm();
    if d >= SERIES_ZONE {
        return WPoint::Regular;
    }
    let k = even as i64;
    if k > 0 && k % 4 == 0 {
        if d < POLE_GUARD {
            WPoint::Pole(even)
        } else {
            WPoint::Regular
        }
    } else if k < 0 && k % 4 != 0 {
        if d < POLE_GUARD {
            WPoint::Pole(even)
        } else {
            WPoint::Regular
        }
    } else if k <= 0 {
        WPoint::Removable(even)
    } else {
        WPoint::Regular
    }
}

fn w_pole_error(s: C64, p: f64) -> Error {
    Error::Pole { value: format!("{s}"), pole: format!("{p}"), distance: (s - c(p, 0.0)).norm() }
}

/// Taylor coefficients of W about 0 (index k multiplies s^k).
fn w_series_zero() -> [f64; 9] {
    let mut a = [0.0; 9];
    for k in 1..9 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        a[k] = -2.0 * sign * ZETA[k + 1] / 2f64.powi(k as i32);
        if k % 2 == 1 {
            a[k] += 8.0 * ZETA[k + 1] / 4f64.powi(k as i32 + 1);
        }
    }
    a
}

/// Taylor coefficients of W about 2.
fn w_series_two() -> [f64; 9] {
    let mut b = [0.0; 9];
    let q = PI / 4.0;
    // tan y = y + y^3/3 + 2y^5/15 + 17y^7/315
    let tan = [0.0, 1.0, 0.0, 1.0 / 3.0, 0.0, 2.0 / 15.0, 0.0, 17.0 / 315.0, 0.0];
    for k in 1..9 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        b[k] = -2.0 * sign * ZETA[k + 1] / 2f64.powi(k as i32) + PI * tan[k] * q.powi(k as i32);
    }
    b
}

fn poly(coef: &[f64; 9], e: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for k in (1..9).rev() {
        acc = (acc + coef[k]) * e;
    }
    acc
}

fn poly_prime(coef: &[f64; 9], e: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for k in (1..9).rev() {
        acc = acc * e + coef[k] * k as f64;
    }
    acc
}

fn w_raw(s: C64) -> Result<C64> {
    let v = -digamma(s * 0.5)? * 2.0 - cot_pi(s * 0.25) * PI - 2.0 * EULER_GAMMA;
    check_finite(v, "eval_W")
}

fn w_prime_raw(s: C64) -> Result<C64> {
    let v = csc2_pi(s * 0.25) * (PI * PI / 4.0) - trigamma(s * 0.5)?;
    check_finite(v, "eval_W_prime")
}

fn w_second_raw(s: C64) -> Result<C64> {
    let v = -csc2_pi(s * 0.25) * cot_pi(s * 0.25) * (PI * PI * PI / 8.0) - polygamma(2, s * 0.5)? * 0.5;
    check_finite(v, "eval_W_second")
}

/// Mean-value evaluation at a removable point away from 0.
fn circle_mean<F: Fn(C64) -> Result<C64>>(f: F, s: C64, center: f64) -> Result<C64> {
    let r = 0.05;
    let n = 64;
    let z0 = c(center, 0.0);
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..n {
        let th = 2.0 * PI * (k as f64 + 0.5) / n as f64;
        let z = z0 + C64::from_polar(r, th);
        // Cauchy integral formula for f(s) with s inside the circle.
        acc += f(z)? * (z - z0) / (z - s);
    }
    Ok(acc / n as f64)
}

/// The Mellin multiplier `W(s) = -2 gamma - 2 psi(s/2) - pi cot(pi s / 4)`.
pub fn eval_w(s: C64) -> Result<C64> {
    match classify(s) {
        WPoint::Pole(p) => Err(w_pole_error(s, p)),
        WPoint::Removable(p) if p == 0.0 => Ok(poly(&w_series_zero(), s)),
        WPoint::Removable(p) => circle_mean(w_raw, s, p),
        WPoint::Regular => {
            let e = s - c(2.0, 0.0);
            if e.norm() < SERIES_ZONE {
                Ok(poly(&w_series_two(), e))
            } else {
                w_raw(s)
            }
        }
    }
}

/// `W'(s) = (pi^2/4) csc^2(pi s/4) - psi'(s/2)`.
pub fn eval_w_prime(s: C64) -> Result<C64> {
    match classify(s) {
        WPoint::Pole(p) => Err(w_pole_error(s, p)),
        WPoint::Removable(p) if p == 0.0 => Ok(poly_prime(&w_series_zero(), s)),
        WPoint::Removable(p) => circle_mean(w_prime_raw, s, p),
        WPoint::Regular => {
            let e = s - c(2.0, 0.0);
            if e.norm() < SERIES_ZONE {
                Ok(poly_prime(&w_series_two(), e))
            } else {
                w_prime_raw(s)
            }
        }
    }
}

/// `W''(s)`.
pub fn eval_w_second(s: C64) -> Result<C64> {
    match classify(s) {
        WPoint::Pole(p) => Err(w_pole_error(s, p)),
        WPoint::Removable(p) => circle_mean(w_second_raw, s, p),
        WPoint::Regular => w_second_raw(s),
    }
}

/// Convenience wrapper for real arguments.
pub fn eval_w_real(x: f64) -> Result<f64> {
    Ok(eval_w(c(x, 0.0))?.re)
}

/// Residual against the printed large-|s| asymptote `-2 log|s/2| - gamma`.
pub fn asymptote_check(s: C64) -> Result<f64> {
    let w = eval_w(s)?;
    Ok((w - c(-2.0 * (s.norm() / 2.0).ln() - EULER_GAMMA, 0.0)).norm())
}

/// Residual against `-2 log|s/2| - 2 gamma`, the constant the multiplier actually approaches.
pub fn asymptote_check_two_gamma(s: C64) -> Result<f64> {
    let w = eval_w(s)?;
    Ok((w - c(-2.0 * (s.norm() / 2.0).ln() - 2.0 * EULER_GAMMA, 0.0)).norm())
}

/// Residue of W at `p` by circle quadrature.
pub fn residue_w(p: f64, radius: f64) -> Result<C64> {
    Ok(integrate_circle(eval_w, c(p, 0.0), radius, 32)?.value)
}

/// Zeros and poles of W on the real axis.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PoleZeroTable {
    pub w_poles_pos: Vec<f64>,
    pub w_poles_neg: Vec<f64>,
    pub w_zeros_pos: Vec<f64>,
    pub w_zeros_neg: Vec<f64>,
    pub trivial_zeros: [f64; 2],
}

/// Bracket and bisect the real zeros of W up to index `n_max`.
pub fn locate_w_roots(n_max: usize) -> Result<PoleZeroTable> {
    if n_max < 1 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    let f = |x: f64| eval_w_real(x).unwrap_or(f64::NAN);
    let shrink = 1e-4;
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut poles_pos = Vec::new();
    let mut poles_neg = Vec::new();
    for n in 1..=n_max {
        let hi = 4.0 * (n as f64 + 1.0);
        pos.push(find_root_real(f, hi - 1.0, hi - shrink, 1e-12)?);
        poles_pos.push(4.0 * n as f64);
    }
    // W > 0 on (-2, 0), so the negative zeros start in (-6, -5).
    poles_neg.push(-2.0);
    for n in 1..=n_max {
        let lo = -2.0 * (2.0 * n as f64 + 1.0);
        neg.push(find_root_real(f, lo + shrink, lo + 1.0, 1e-12)?);
        poles_neg.push(lo);
    }
    Ok(PoleZeroTable {
        w_poles_pos: poles_pos,
        w_poles_neg: poles_neg,
        w_zeros_pos: pos,
        w_zeros_neg: neg,
        trivial_zeros: [0.0, 2.0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cot_matches_direct_formula() {
        for &(re, im) in &[(0.3, 0.2), (0.7, -1.1), (-0.4, 3.0)] {
            let z = c(re, im);
            let direct = (z * PI).cos() / (z * PI).sin();
            assert!((cot_pi(z) - direct).norm() < 1e-13 * direct.norm().max(1.0));
        }
    }

    #[test]
    fn w_series_matches_closed_form_off_the_zone() {
        let s = c(2e-3, 1e-3);
        let a = poly(&w_series_zero(), s);
        let b = w_raw(s).unwrap();
        assert!((a - b).norm() < 1e-12);
        let e = c(2e-3, -1e-3);
        let a = poly(&w_series_two(), e);
        let b = w_raw(c(2.0, 0.0) + e).unwrap();
        assert!((a - b).norm() < 1e-12);
    }
}

/// `ζ(k)` for integer `k ≥ 2`.
fn zeta_int(k: usize) -> f64 {
    if k < ZETA.len() {
        ZETA[k]
    } else {
        let k = k as i32;
        1.0 + 2f64.powi(-k) + 3f64.powi(-k) + 4f64.powi(-k)
    }
}

/// `(e^w - 1)/w`, accurate for small `w`.
fn exprel(w: C64) -> C64 {
    if w.norm() < 1e-2 {
        let mut term = c(1.0, 0.0);
        let mut sum = term;
        for k in 2..10 {
            term = term * w / k as f64;
            sum += term;
        }
        sum
    } else {
        (w.exp() - 1.0) / w
    }
}

/// `E_p(z)` for `|z| < 1` and `p = 1 - eps`, `|eps| < 0.1`, without the
/// cancellation between `Γ(1-p) z^{p-1}` and the `k = 0` series term.
fn expint_near_one(eps: f64, z: C64) -> C64 {
    // ln Γ(1+ε)/ε = -γ + Σ_{k≥2} (-1)^k ζ(k) ε^{k-1}/k.
    let mut g = -EULER_GAMMA;
    let mut pow = 1.0;
    for k in 2..24 {
        pow *= eps;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        g += sign * zeta_int(k) * pow / k as f64;
    }
    let slope = c(g, 0.0) - z.ln();
    let mut out = slope * exprel(slope * eps);
    // -Σ_{k≥1} (-z)^k / (k! (k + ε)).
    let mut term = c(1.0, 0.0);
    for k in 1..200 {
        term = term * (-z) / k as f64;
        let add = term / (k as f64 + eps);
        out -= add;
        if add.norm() < 1e-17 * out.norm().max(1e-300) {
            break;
        }
    }
    out
}

/// Generalized exponential integral `E_p(z) = ∫_1^∞ e^{-zu} u^{-p} du` for
/// real `p > 0` and `Re z ≥ 0`, `z ≠ 0`; `E_p(0) = 1/(p-1)` for `p > 1`.
pub fn exp_integral_e(p: f64, z: C64) -> Result<C64> {
    if !(p > 0.0) || z.re < 0.0 {
        return Err(Error::Domain(format!("E_p(z) needs p > 0 and Re z ≥ 0, got p = {p}, z = {z}")));
    }
    if z.norm() == 0.0 {
        if p > 1.0 {
            return Ok(c(1.0 / (p - 1.0), 0.0));
        }
        return Err(Error::Domain(format!("E_p(0) diverges for p = {p} ≤ 1")));
    }
    if z.norm() >= 1.0 {
        // Modified Lentz evaluation of the continued fraction.
        let tiny = 1e-300;
        let mut b = z + p;
        let mut cc = c(1.0 / tiny, 0.0);
        let mut d = b.inv();
        let mut h = d;
        for i in 1..20_000 {
            let a = -(i as f64) * (p - 1.0 + i as f64);
            b += 2.0;
            d = a * d + b;
            if d.norm() < tiny {
                d = c(tiny, 0.0);
            }
            d = d.inv();
            cc = b + a / cc;
            if cc.norm() < tiny {
                cc = c(tiny, 0.0);
            }
            let del = cc * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                return Ok(h * (-z).exp());
            }
        }
        return Err(Error::Quadrature(format!("continued fraction for E_{p}({z}) did not converge")));
    }
    let n = p.round();
    if n >= 1.0 && (p - n).abs() < 0.1 {
        // Start near p = 1 and recur upward: E_{q+1} = (e^{-z} - z E_q)/q.
        let q0 = p - n + 1.0;
        let mut e = expint_near_one(1.0 - q0, z);
        let ez = (-z).exp();
        let mut q = q0;
        for _ in 1..(n as usize) {
            e = (ez - z * e) / q;
            q += 1.0;
        }
        return Ok(e);
    }
    let mut out = z.powf(p - 1.0) * gamma(c(1.0 - p, 0.0))?;
    let mut term = c(1.0, 0.0);
    for k in 0..200 {
        if k > 0 {
            term = term * (-z) / k as f64;
        }
        let add = term / (1.0 - p + k as f64);
        out -= add;
        if k > 2 && add.norm() < 1e-17 * out.norm().max(1e-300) {
            break;
        }
    }
    Ok(out)
}
