//! Quadrature on vertical lines, circles and real intervals, plus bracketed root finding.

use crate::error::{Error, Result};
use crate::C64;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Decay of the integrand beyond the truncation height, declared by the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    /// `|f(c+iv)| ~ A e^{-rate |v|}`.
    Exponential { rate: f64 },
    /// `|f(c+iv)| ~ A |v|^{-exponent}` with exponent > 1.
    Power { exponent: f64 },
    /// Integrand vanishes beyond the truncation height.
    Compact,
}

/// Description of a truncated vertical-line integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub abscissa: f64,
    pub half_height: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_refinements: usize,
    pub tail: TailModel,
    /// Frequency of an oscillating factor, used to cap panel widths.
    pub frequency: Option<f64>,
}

impl ContourSpec {
    pub fn new(abscissa: f64, half_height: f64) -> Self {
        ContourSpec {
            abscissa,
            half_height,
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_refinements: 20_000,
            tail: TailModel::Exponential { rate: 1.0 },
            frequency: None,
        }
    }

    pub fn with_tol(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_tail(mut self, tail: TailModel) -> Self {
        self.tail = tail;
        self
    }

    pub fn with_frequency(mut self, omega: f64) -> Self {
        self.frequency = if omega > 0.0 { Some(omega) } else { None };
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.half_height > 0.0) || !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::Domain("contour needs positive height and tolerances".into()));
        }
        if !self.abscissa.is_finite() {
            return Err(Error::Domain("contour abscissa must be finite".into()));
        }
        if let TailModel::Power { exponent } = self.tail {
            if exponent <= 1.0 {
                return Err(Error::Domain(format!("power tail exponent {exponent} must exceed 1")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: C64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub truncation_tail: f64,
}

struct Panel {
    a: f64,
    b: f64,
    value: C64,
    err: f64,
    fmax: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err).then(other.a.total_cmp(&self.a))
    }
}

fn gk15<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut fmax = fc.norm();
    let mut fv = [C64::new(0.0, 0.0); 14];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        fmax = fmax.max(f1.norm()).max(f2.norm());
        kron += (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut resasc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[2 * j] - mean).norm() + (fv[2 * j + 1] - mean).norm());
    }
    resasc *= half.abs();
    let value = kron * half;
    let diff = ((kron - gauss) * half).norm();
    let err = if resasc > 0.0 && diff > 0.0 {
        resasc * (200.0 * diff / resasc).powf(1.5).min(1.0)
    } else {
        diff
    };
    let err = err.max(50.0 * f64::EPSILON * value.norm());
    Panel { a, b, value, err, fmax }
}

/// Adaptive Gauss-Kronrod on `[a, b]` seeded with `initial` equal panels.
pub fn adaptive_gk<F: FnMut(f64) -> C64>(
    mut f: F,
    a: f64,
    b: f64,
    initial: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: C64::new(0.0, 0.0), error_estimate: 0.0, evaluations: 0, truncation_tail: 0.0 });
    }
    let n0 = initial.max(1);
    let mut heap = BinaryHeap::new();
    let mut evals = 0usize;
    for k in 0..n0 {
        let pa = a + (b - a) * k as f64 / n0 as f64;
        let pb = a + (b - a) * (k + 1) as f64 / n0 as f64;
        heap.push(gk15(&mut f, pa, pb));
        evals += 15;
    }
    let total = |h: &BinaryHeap<Panel>| -> (C64, f64) {
        let mut panels: Vec<&Panel> = h.iter().collect();
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        let mut v = C64::new(0.0, 0.0);
        let mut e = 0.0;
        for p in panels {
            v += p.value;
            e += p.err;
        }
        (v, e)
    };
    let mut splits = 0usize;
    let (mut value, mut err) = total(&heap);
    while err > (rel_tol * value.norm()).max(abs_tol) {
        if splits >= max_subdivisions {
            return Err(Error::Quadrature(format!(
                "error {err:e} above tolerance after {splits} subdivisions on [{a}, {b}]"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            return Err(Error::Quadrature("panel width below machine resolution".into()));
        }
        let left = gk15(&mut f, worst.a, mid);
        let right = gk15(&mut f, mid, worst.b);
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        evals += 30;
        splits += 1;
        if splits % 64 == 0 {
            let t = total(&heap);
            value = t.0;
            err = t.1;
        }
    }
    let (value, err) = total(&heap);
    Ok(QuadResult { value, error_estimate: err, evaluations: evals, truncation_tail: 0.0 })
}

fn panels_with_max<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64) -> f64 {
    gk15(f, a, b).fmax
}

/// `∫ f(c + iv) i dv` over `[-V, V]` by adaptive panel subdivision.
pub fn integrate_vertical<F: FnMut(C64) -> C64>(mut f: F, spec: &ContourSpec) -> Result<QuadResult> {
    spec.validate()?;
    let c = spec.abscissa;
    let v = spec.half_height;
    let mut g = |y: f64| f(C64::new(c, y));
    let mut panels = 16usize;
    if let Some(omega) = spec.frequency {
        let cap = PI / (4.0 * omega);
        panels = panels.max((2.0 * v / cap).ceil() as usize);
    }
    let mut res = adaptive_gk(&mut g, -v, v, panels, spec.rel_tol, spec.abs_tol, spec.max_refinements)?;
    res.value *= C64::i();

    let width = 2.0 * v / panels as f64;
    let edge_hi = panels_with_max(&mut g, v - width, v);
    let edge_lo = panels_with_max(&mut g, -v, -v + width);
    let mid_hi = panels_with_max(&mut g, 0.5 * v - width, 0.5 * v);
    let mid_lo = panels_with_max(&mut g, -0.5 * v, -0.5 * v + width);
    res.evaluations += 60;
    let (tail, ratio) = match spec.tail {
        TailModel::Exponential { rate } => (
            (edge_hi + edge_lo) / rate,
            (-rate * (0.5 * v - width)).exp(),
        ),
        TailModel::Power { exponent } => (
            (edge_hi + edge_lo) * v / (exponent - 1.0),
            ((v - width) / (0.5 * v)).powf(-exponent),
        ),
        TailModel::Compact => (0.0, 1.0),
    };
    if !matches!(spec.tail, TailModel::Compact) {
        let slack = 10.0;
        let floor = spec.abs_tol;
        if edge_hi > slack * mid_hi * ratio + floor || edge_lo > slack * mid_lo * ratio + floor {
            return Err(Error::TailModel(format!(
                "edge magnitude {:e} exceeds envelope {:e}",
                edge_hi.max(edge_lo),
                slack * mid_hi.max(mid_lo) * ratio
            )));
        }
    }
    res.truncation_tail = tail;
    Ok(res)
}

/// `(1/2πi) ∮ f(z) dz` on a circle by the trapezoid rule with doubling.
pub fn integrate_circle<F: FnMut(C64) -> Result<C64>>(
    mut f: F,
    center: C64,
    radius: f64,
    n_min: usize,
) -> Result<QuadResult> {
    if !(radius > 0.0) {
        return Err(Error::Domain("circle radius must be positive".into()));
    }
    let cap = 1usize << 16;
    let mut n = n_min.max(8).next_power_of_two();
    let node = |k: usize, n: usize| center + C64::from_polar(radius, 2.0 * PI * k as f64 / n as f64);
    let mut sum = C64::new(0.0, 0.0);
    let mut scale = 0.0;
    for k in 0..n {
        let z = node(k, n);
        let t = f(z)? * (z - center);
        sum += t;
        scale += t.norm();
    }
    let mut prev = sum / n as f64;
    let mut evals = n;
    loop {
        let n2 = 2 * n;
        if n2 > cap {
            return Err(Error::Quadrature(format!("circle rule did not stagnate by n = {n}")));
        }
        for k in (1..n2).step_by(2) {
            let z = node(k, n2);
            let t = f(z)? * (z - center);
            sum += t;
            scale += t.norm();
        }
        evals += n;
        n = n2;
        let cur = sum / n as f64;
        let diff = (cur - prev).norm();
        let mag = cur.norm().max(scale / n as f64);
        if diff <= 1e-12 * mag {
            return Ok(QuadResult { value: cur, error_estimate: diff, evaluations: evals, truncation_tail: 0.0 });
        }
        prev = cur;
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn find_root_real<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = f(a);
    let fb = f(b);
    if !(fa.is_finite() && fb.is_finite()) || fa * fb > 0.0 {
        return Err(Error::Bracket { a, b });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Tanh-sinh quadrature of `f` on `(0, len)`, tolerant of an integrable endpoint singularity at 0.
///
/// The integrand receives the exact offset from the left endpoint.
pub fn integrate_tanh_sinh<F: FnMut(f64) -> f64>(mut f: F, len: f64, rel_tol: f64) -> Result<f64> {
    let t_max = 4.5;
    let mut h = 0.5;
    let weight = |t: f64| {
        let u = 0.5 * PI * t.sinh();
        let x = len / (1.0 + (-2.0 * u).exp());
        let w = len * 0.5 * PI * t.cosh() / (2.0 * u.cosh() * u.cosh());
        (x, w)
    };
    let eval_at = |t: f64, f: &mut F| -> f64 {
        let (x, w) = weight(t);
        if x <= 0.0 || x >= len || !w.is_finite() || w == 0.0 {
            0.0
        } else {
            f(x) * w
        }
    };
    let mut sum = eval_at(0.0, &mut f);
    let mut k = 1;
    while k as f64 * h <= t_max {
        let t = k as f64 * h;
        sum += eval_at(t, &mut f) + eval_at(-t, &mut f);
        k += 1;
    }
    let mut prev = sum * h;
    for _level in 0..8 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            let t = k as f64 * h;
            sum += eval_at(t, &mut f) + eval_at(-t, &mut f);
            k += 2;
        }
        let cur = sum * h;
        if (cur - prev).abs() <= rel_tol * cur.abs().max(1e-300) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature("tanh-sinh rule did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_integrates_polynomial_exactly() {
        let r = adaptive_gk(|x| C64::new(x.powi(5), 0.0), 0.0, 2.0, 1, 1e-12, 1e-300, 10).unwrap();
        assert!((r.value.re - 64.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_handles_inverse_sqrt() {
        let v = integrate_tanh_sinh(|x| 1.0 / x.sqrt(), 1.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
    }
}
