//! Collision kernel `K`, transport kernel `H`, hyperbolic kernel `M`, and the
//! quadrature identities tying them to the multiplier `W`.

use crate::complexfn::eval_w;
use crate::contour::adaptive_gk;
use crate::error::{Error, Result};
use crate::{Real, C64};

fn cst<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("constant representable")
}

/// Sample point of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> KernelPoint<T> {
    pub fn new(x: T, y: T) -> Result<Self> {
        if !(x > T::zero() && y > T::zero()) {
            return Err(Error::Domain("kernel arguments must be positive".into()));
        }
        Ok(KernelPoint { x, y })
    }
}

/// `K(x, y) = (1/|x²−y²| − 1/(x²+y²)) y/x`, evaluated as `2 min(x,y)² y / (x |x⁴ − y⁴|)`.
pub fn eval_k<T: Real>(x: T, y: T) -> Result<T> {
    if !(x > T::zero() && y > T::zero()) {
        return Err(Error::Domain("kernel arguments must be positive".into()));
    }
    if x == y {
        return Err(Error::Diagonal(x.to_f64().unwrap_or(f64::NAN)));
    }
    let m = x.min(y);
    let gap = (x - y).abs() * (x + y) * (x * x + y * y);
    // Divide in steps so tiny gaps do not overflow intermediate products.
    let two = cst::<T>(2.0);
    Ok(two * (m / x) * (m * y / gap))
}

/// `H(r)`: positive on (0,1), negative on (1,∞), log-singular at 1.
pub fn eval_h<T: Real>(r: T) -> Result<T> {
    if !(r > T::zero()) {
        return Err(Error::Domain("H needs r > 0".into()));
    }
    let one = T::one();
    if r == one {
        return Err(Error::Pole { value: "1".into(), pole: "1".into(), distance: 0.0 });
    }
    let r2 = r * r;
    if r < one {
        Ok((r2.ln_1p() - (-r2).ln_1p()) / r)
    } else {
        let q = one / (r2 * r2);
        Ok((-q).ln_1p() / r)
    }
}

/// `ln sinh(a)` for a > 0 without overflow.
fn ln_sinh<T: Real>(a: T) -> T {
    if a > T::one() {
        a + (-(cst::<T>(-2.0) * a).exp_m1()).ln() - cst::<T>(std::f64::consts::LN_2)
    } else {
        a.sinh().ln()
    }
}

/// The full hyperbolic kernel `M(x, y)`, provided for comparison with `K`.
pub fn eval_m<T: Real>(x: T, y: T) -> Result<T> {
    if !(x > T::zero() && y > T::zero()) {
        return Err(Error::Domain("kernel arguments must be positive".into()));
    }
    if x == y {
        return Err(Error::Diagonal(x.to_f64().unwrap_or(f64::NAN)));
    }
    let x2 = x * x;
    let y2 = y * y;
    let d = (x - y).abs() * (x + y);
    let s = x2 + y2;
    let prefactor = (y / x).powi(3);
    let base = ln_sinh(x2) - ln_sinh(y2);
    let first = (base - ln_sinh(d)).exp();
    let second = (base - ln_sinh(s)).exp();
    Ok(prefactor * (first - second))
}

/// `±∫K(x,y)dy` over `[z,∞)` when z > x and over `[0,z]` (negated) when z < x.
pub fn k_tail_integral(x: f64, z: f64) -> Result<f64> {
    if !(x > 0.0 && z > 0.0) || x == z {
        return Err(Error::Domain("need x, z > 0 with x ≠ z".into()));
    }
    let tol = 1e-13;
    if z > x {
        // y = x + (z - x) e^w flattens the near-diagonal singularity.
        let g = |w: f64| {
            let gap = (z - x) * w.exp();
            let y = x + gap;
            C64::new(eval_k(x, y).map(|k| k * gap).unwrap_or(0.0), 0.0)
        };
        let r = adaptive_gk(g, 0.0, 60.0, 8, tol, 1e-300, 5000)?;
        Ok(r.value.re)
    } else {
        // y = x - (x - z) e^w, w from 0 to ln(x/(x-z)).
        let w_max = (x / (x - z)).ln();
        let g = |w: f64| {
            let gap = (x - z) * w.exp();
            let y = x - gap;
            if y <= 0.0 {
                return C64::new(0.0, 0.0);
            }
            C64::new(eval_k(x, y).map(|k| k * gap).unwrap_or(0.0), 0.0)
        };
        let r = adaptive_gk(g, 0.0, w_max, 8, tol, 1e-300, 5000)?;
        Ok(-r.value.re)
    }
}

/// Residual of `H(x/z) = 2z·(±∫K)`.
///
/// The transport kernel equals `2z` times the one-sided integral of `K`; the
/// factor follows from integrating the closed form of `K`.
pub fn check_h_from_k(x: f64, z: f64) -> Result<f64> {
    let h = eval_h(x / z)?;
    let q = k_tail_integral(x, z)?;
    Ok((h - 2.0 * z * q).abs())
}

/// Residual of the identity taken literally, `H(x/z) = ±∫K`, without the `2z` factor.
pub fn check_h_from_k_literal(x: f64, z: f64) -> Result<f64> {
    let h = eval_h(x / z)?;
    let q = k_tail_integral(x, z)?;
    Ok((h - q).abs())
}

/// `H(1 - e^{-w})` without cancellation near r = 1.
fn h_below_one(w: f64) -> f64 {
    let r = -(-w).exp_m1();
    if r < 0.5 {
        return eval_h(r).unwrap_or(0.0);
    }
    let e = (-w).exp();
    // 1 - r² = e (2 - e)
    let ln_one_minus = -w + (2.0 - e).ln();
    ((r * r).ln_1p() - ln_one_minus) / r
}

/// `H(1 + e^{-w})` without cancellation near r = 1.
fn h_above_one(w: f64) -> f64 {
    let e = (-w).exp();
    let r = 1.0 + e;
    if r > 2.0 {
        return eval_h(r).unwrap_or(0.0);
    }
    // 1 - r^{-4} = (r-1)(r+1)(r²+1)/r⁴
    let l = -w + ((r + 1.0) * (r * r + 1.0)).ln() - 4.0 * r.ln();
    l / r
}

/// `∫₀^∞ r^s H(r) dr`, split at 1 with `r = 1 ∓ e^{-w}`.
pub fn mellin_h(s: C64) -> Result<C64> {
    if !(s.re > -2.0 && s.re < 4.0) {
        return Err(Error::Domain(format!("Mellin integral of H diverges at Re s = {}", s.re)));
    }
    let tol = 1e-13;
    let lower = |w: f64| {
        if w <= 0.0 {
            return C64::new(0.0, 0.0);
        }
        let lnr = (-(-w).exp_m1()).ln();
        (s * lnr).exp() * (h_below_one(w) * (-w).exp())
    };
    let a = adaptive_gk(lower, 0.0, 45.0, 16, tol, 1e-300, 20_000)?;
    let reach = 45.0 / (4.0 - s.re).min(1.0);
    let upper = |w: f64| {
        let lnr = (-w).exp().ln_1p();
        (s * lnr).exp() * (h_above_one(w) * (-w).exp())
    };
    let b = adaptive_gk(upper, -reach, 45.0, 32, tol, 1e-300, 20_000)?;
    Ok(a.value + b.value)
}

/// `|W(s) + s ∫₀^∞ r^s H(r) dr|`.
pub fn check_w_mellin(s: C64) -> Result<f64> {
    let w = eval_w(s)?;
    let m = mellin_h(s)?;
    let res = (w + s * m).norm();
    if !res.is_finite() {
        return Err(Error::Quadrature(format!("Mellin identity residual not finite at {s}")));
    }
    Ok(res)
}
