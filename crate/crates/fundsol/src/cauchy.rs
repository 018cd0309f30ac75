//! Superposition solution `u(t, x) = ∫ f0(y) Λ(t/y, x/y) dy/y` of the initial value problem.
//!
//! All targets share one composite Gauss–Legendre rule in `ln y`, so each `y` node costs a
//! single time slice. Where `y ≈ x` and `t/y` is small the integrand behaves like
//! `|ln(x/y)|^{2t/y−1}`; an explicit local model of that behaviour is subtracted at the nodes
//! and integrated separately with endpoint-singular quadrature.

use std::path::Path;

use serde::Serialize;

use crate::complexfn::{gamma, EULER_GAMMA};
use crate::contour::adaptive_gk;
use crate::error::{Error, Result};
use crate::kinetic::LogGrid;
use crate::lambda::{delta_pairing, eval_dlambda_dt, RadialProfile, TestFunction, TimeSlice, DIRECT_MIN_T};
use crate::C64;

/// Initial data with compact support in `(0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDatum {
    /// Linear interpolation of samples, zero outside `[ys[0], ys[last]]`.
    Sampled { ys: Vec<f64>, values: Vec<f64> },
    /// `height · exp(1 − 1/(1 − r²))`, `r = (y − center)/radius`.
    AnalyticBump { center: f64, radius: f64, height: f64 },
    /// `height` on `[a + ramp, b − ramp]`, smooth ramps to zero at `a` and `b`.
    IndicatorSmoothed { a: f64, b: f64, ramp: f64, height: f64 },
}

fn smooth_step(z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if z >= 1.0 {
        return 1.0;
    }
    let p = (-1.0 / z).exp();
    let q = (-1.0 / (1.0 - z)).exp();
    p / (p + q)
}

impl InitialDatum {
    pub fn sampled(ys: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if ys.len() < 2 || ys.len() != values.len() {
            return Err(Error::Domain(format!("need ≥ 2 samples with matching lengths, got {} and {}", ys.len(), values.len())));
        }
        if !(ys[0] > 0.0) || ys.windows(2).any(|w| !(w[1] > w[0])) || !ys[ys.len() - 1].is_finite() {
            return Err(Error::Domain("sample abscissae must be positive, finite, and increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("sample values must be finite".into()));
        }
        Ok(InitialDatum::Sampled { ys, values })
    }

    pub fn bump(center: f64, radius: f64, height: f64) -> Result<Self> {
        if !(radius > 0.0 && center - radius > 0.0 && (center + radius).is_finite() && height.is_finite()) {
            return Err(Error::Domain(format!("bump support ({}, {}) must lie in (0, ∞)", center - radius, center + radius)));
        }
        Ok(InitialDatum::AnalyticBump { center, radius, height })
    }

    pub fn indicator(a: f64, b: f64, ramp: f64, height: f64) -> Result<Self> {
        if !(a > 0.0 && b > a && b.is_finite() && ramp > 0.0 && 2.0 * ramp <= b - a && height.is_finite()) {
            return Err(Error::Domain(format!("indicator needs 0 < a < b and 0 < 2·ramp ≤ b − a, got {a}, {b}, {ramp}")));
        }
        Ok(InitialDatum::IndicatorSmoothed { a, b, ramp, height })
    }

    /// Parse a `y,f0` CSV with a header line.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Config("empty initial-data file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["y", "f0"] {
            return Err(Error::Config(format!("initial-data header must be `y,f0`, got `{header}`")));
        }
        let (mut ys, mut values) = (Vec::new(), Vec::new());
        for (n, line) in lines.enumerate() {
            let mut it = line.split(',').map(str::trim);
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|s| s.parse().ok()).ok_or_else(|| Error::Config(format!("bad initial-data row {}: `{line}`", n + 2)))
            };
            ys.push(parse(it.next())?);
            values.push(parse(it.next())?);
        }
        Self::sampled(ys, values)
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv_str(&text)
    }

    pub fn value(&self, y: f64) -> f64 {
        match self {
            InitialDatum::Sampled { ys, values } => {
                if y < ys[0] || y > ys[ys.len() - 1] {
                    return 0.0;
                }
                let j = ys.partition_point(|&v| v <= y).clamp(1, ys.len() - 1);
                let (a, b) = (ys[j - 1], ys[j]);
                values[j - 1] + (values[j] - values[j - 1]) * (y - a) / (b - a)
            }
            InitialDatum::AnalyticBump { center, radius, height } => {
                let r = (y - center) / radius;
                if r.abs() >= 1.0 {
                    0.0
                } else {
                    height * (1.0 - 1.0 / (1.0 - r * r)).exp()
                }
            }
            InitialDatum::IndicatorSmoothed { a, b, ramp, height } => {
                height * smooth_step((y - a) / ramp) * smooth_step((b - y) / ramp)
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            InitialDatum::Sampled { ys, .. } => (ys[0], ys[ys.len() - 1]),
            InitialDatum::AnalyticBump { center, radius, .. } => (center - radius, center + radius),
            InitialDatum::IndicatorSmoothed { a, b, .. } => (*a, *b),
        }
    }

    /// Points where the datum is not smooth, inside its support.
    fn kinks(&self) -> Vec<f64> {
        match self {
            InitialDatum::Sampled { ys, .. } => ys[1..ys.len() - 1].to_vec(),
            InitialDatum::AnalyticBump { .. } => Vec::new(),
            InitialDatum::IndicatorSmoothed { a, b, ramp, .. } => vec![a + ramp, b - ramp],
        }
    }

    /// `f0(·/a)/a`, which keeps the L¹ norm.
    pub fn scaled(&self, a: f64) -> Self {
        match self {
            InitialDatum::Sampled { ys, values } => InitialDatum::Sampled {
                ys: ys.iter().map(|y| y * a).collect(),
                values: values.iter().map(|v| v / a).collect(),
            },
            InitialDatum::AnalyticBump { center, radius, height } => {
                InitialDatum::AnalyticBump { center: center * a, radius: radius * a, height: height / a }
            }
            InitialDatum::IndicatorSmoothed { a: lo, b, ramp, height } => {
                InitialDatum::IndicatorSmoothed { a: lo * a, b: b * a, ramp: ramp * a, height: height / a }
            }
        }
    }

    pub fn l1_norm(&self) -> f64 {
        let (a, b) = self.support();
        let mut pts = vec![a];
        pts.extend(self.kinks());
        pts.push(b);
        pts.windows(2)
            .map(|w| {
                adaptive_gk(|y| C64::new(self.value(y).abs(), 0.0), w[0], w[1], 16, 1e-12, 1e-300, 2000)
                    .map(|r| r.value.re)
                    .unwrap_or(f64::NAN)
            })
            .sum()
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            InitialDatum::Sampled { values, .. } => values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            InitialDatum::AnalyticBump { height, .. } => height.abs(),
            InitialDatum::IndicatorSmoothed { height, .. } => height.abs(),
        }
    }
}

impl TestFunction for InitialDatum {
    fn value(&self, x: f64) -> f64 {
        InitialDatum::value(self, x)
    }

    fn support(&self) -> (f64, f64) {
        InitialDatum::support(self)
    }
}

/// Controls of the superposition quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperpositionControls {
    /// Panels per unit of `ln y`.
    pub panels_per_log: f64,
    /// Lower bound on the panel count over the whole support.
    pub min_panels: usize,
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Width in `ln(x/y)` of the Gaussian window on the local model.
    pub window: f64,
    pub threads: Option<usize>,
}

impl Default for SuperpositionControls {
    fn default() -> Self {
        SuperpositionControls { panels_per_log: 40.0, min_panels: 8, order: 8, window: 0.3, threads: None }
    }
}

/// The local model is used for `t/y` below this value; above it the singularity is mild.
const MODEL_MAX_TAU: f64 = 0.9;

/// Leading behaviour of `Λ(τ, e^X)` near `X = 0`, minus its value-one counterpart, times a window:
/// `a(τ)(|X|^{2τ−1} − 1) e^{−X} exp(−(X/δ)²)`, written to stay finite at `τ = 1/2`.
pub fn local_model(tau: f64, log_x: f64, window: f64) -> f64 {
    if !(tau < MODEL_MAX_TAU) || log_x == 0.0 || (log_x / window).abs() > 7.0 {
        return 0.0;
    }
    let l = log_x.abs().ln();
    let z = (2.0 * tau - 1.0) * l;
    let phi = if z.abs() < 1e-12 { 1.0 } else { z.exp_m1() / z };
    let a = (EULER_GAMMA.exp() / 2.0).powf(-2.0 * tau);
    let g = gamma(C64::new(2.0 - 2.0 * tau, 0.0)).map(|g| g.re).unwrap_or(f64::NAN);
    let amp = a * g * (std::f64::consts::PI * tau).sin() / std::f64::consts::PI;
    amp * (-l) * phi * (-log_x).exp() * (-(log_x / window).powi(2)).exp()
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Nodes `y_k` and weights for `∫ g(y) dy` over the support, panel-uniform in `ln y`.
fn y_rule(t: f64, f0: &InitialDatum, c: &SuperpositionControls) -> Result<Vec<(f64, f64)>> {
    if !(c.panels_per_log > 0.0 && c.order >= 2 && c.window > 0.0 && c.min_panels >= 1) {
        return Err(Error::Config("superposition controls need positive panel density and count, order ≥ 2, window > 0".into()));
    }
    let (a, b) = f0.support();
    let mut cuts = vec![a, b, t, t / MODEL_MAX_TAU];
    cuts.extend(f0.kinks());
    cuts.retain(|&y| y >= a && y <= b);
    cuts.sort_by(|p, q| p.total_cmp(q));
    cuts.dedup_by(|p, q| (*p - *q).abs() <= 1e-14 * q.abs());
    let gl = gauss_legendre(c.order);
    let span = (b / a).ln();
    let mut rule = Vec::new();
    for w in cuts.windows(2) {
        let (la, lb) = (w[0].ln(), w[1].ln());
        let floor = (c.min_panels as f64 * (lb - la) / span).ceil().max(1.0);
        let panels = ((lb - la) * c.panels_per_log).ceil().max(floor) as usize;
        let h = (lb - la) / panels as f64;
        for p in 0..panels {
            let mid = la + h * (p as f64 + 0.5);
            for &(u, wt) in &gl {
                let y = (mid + 0.5 * h * u).exp();
                rule.push((y, 0.5 * h * wt * y));
            }
        }
    }
    Ok(rule)
}

fn thread_count(c: &SuperpositionControls) -> usize {
    c.threads.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)).max(1)
}

/// Deterministic parallel map over the rule nodes; per-node vectors are summed in node order.
fn sum_over_nodes<F>(rule: &[(f64, f64)], len: usize, threads: usize, node: F) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> Result<Vec<f64>> + Sync,
{
    let chunk = rule.len().div_ceil(threads).max(1);
    let parts: Vec<Result<Vec<Vec<f64>>>> = std::thread::scope(|s| {
        let handles: Vec<_> = rule
            .chunks(chunk)
            .map(|part| {
                let node = &node;
                s.spawn(move || part.iter().map(|&(y, w)| node(y, w)).collect::<Result<Vec<_>>>())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut acc = vec![0.0; len];
    for part in parts {
        for v in part? {
            for (a, b) in acc.iter_mut().zip(v) {
                *a += b;
            }
        }
    }
    Ok(acc)
}

/// `∫ f0(y) S(t/y, ln(x/y)) dy/y` for the windowed local model `S`.
fn model_integral(t: f64, x: f64, f0: &InitialDatum, c: &SuperpositionControls) -> Result<f64> {
    let (a, b) = f0.support();
    let reach = (7.0 * c.window).exp();
    let lo = a.max(t / MODEL_MAX_TAU).max(x / reach);
    let hi = b.min(x * reach);
    if !(hi > lo) {
        return Ok(0.0);
    }
    let g = |y: f64, lx: f64| f0.value(y) * local_model(t / y, lx, c.window) / y;
    let smooth = |p: f64, q: f64| -> Result<f64> {
        let mut pts = vec![p];
        pts.extend(f0.kinks().into_iter().filter(|&k| k > p && k < q));
        pts.push(q);
        let mut s = 0.0;
        for w in pts.windows(2) {
            s += adaptive_gk(|y| C64::new(g(y, (x / y).ln()), 0.0), w[0], w[1], 16, 1e-10, 1e-14, 4000)?.value.re;
        }
        Ok(s)
    };
    if x <= lo || x >= hi {
        return smooth(lo, hi);
    }
    // Offsets d = e^w from the singular point; the integrand decays like e^{2(t/x)w}.
    let side = |len: f64, above: bool| -> Result<f64> {
        let top = len.ln();
        let bottom = (top - 40.0 / (2.0 * t / x)).max(-700.0);
        let f = |w: f64| {
            let d = w.exp();
            let (y, lx) = if above { (x + d, -(d / x).ln_1p()) } else { (x - d, -(-d / x).ln_1p()) };
            C64::new(g(y, lx) * d, 0.0)
        };
        Ok(adaptive_gk(f, bottom, top, 32, 1e-10, 1e-14, 8000)?.value.re)
    };
    Ok(side(x - lo, false)? + side(hi - x, true)?)
}

/// Values of `u(t, ·)` at arbitrary targets.
pub fn solve_many(t: f64, xs: &[f64], f0: &InitialDatum, c: &SuperpositionControls) -> Result<Vec<f64>> {
    if !(t > 0.0 && t.is_finite()) || xs.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::Domain("superposition needs t > 0 and x > 0".into()));
    }
    let rule = y_rule(t, f0, c)?;
    let threads = thread_count(c);
    let nodes = sum_over_nodes(&rule, xs.len(), threads, |y, w| {
        let fy = f0.value(y);
        if fy == 0.0 {
            return Ok(vec![0.0; xs.len()]);
        }
        let tau = t / y;
        let slice = TimeSlice::new(tau)?;
        xs.iter()
            .map(|&x| {
                let lx = (x / y).ln();
                if lx == 0.0 && tau <= 0.5 {
                    return Ok(0.0);
                }
                let lam = slice.eval_auto(lx)?.value;
                Ok(w * fy * (lam - local_model(tau, lx, c.window)) / y)
            })
            .collect()
    })?;
    nodes.into_iter().zip(xs).map(|(v, &x)| Ok(v + model_integral(t, x, f0, c)?)).collect()
}

/// `u(t, x)` for one target.
pub fn solve_u(t: f64, x: f64, f0: &InitialDatum) -> Result<f64> {
    Ok(solve_many(t, &[x], f0, &SuperpositionControls::default())?[0])
}

/// `u(t, ·)` on the grid nodes.
pub fn solve_profile(t: f64, grid: &LogGrid, f0: &InitialDatum) -> Result<RadialProfile> {
    solve_profile_with(t, grid, f0, &SuperpositionControls::default())
}

pub fn solve_profile_with(t: f64, grid: &LogGrid, f0: &InitialDatum, c: &SuperpositionControls) -> Result<RadialProfile> {
    let values = solve_many(t, &grid.nodes, f0, c)?;
    RadialProfile::new(grid.nodes.clone(), values, t)
}

/// `∂_t u(t, x) = ∫ f0(z) ∂_tΛ(t/z, x/z) dz/z²`.
pub fn apply_l_via_green(t: f64, x: f64, f0: &InitialDatum) -> Result<f64> {
    apply_l_via_green_with(t, x, f0, &SuperpositionControls::default())
}

/// [`apply_l_via_green`] with explicit controls; no local model is subtracted, so targets
/// inside the support at small `t/x` converge slowly.
pub fn apply_l_via_green_with(t: f64, x: f64, f0: &InitialDatum, c: &SuperpositionControls) -> Result<f64> {
    if !(t > 0.0 && x > 0.0 && t.is_finite() && x.is_finite()) {
        return Err(Error::Domain("superposition needs t > 0 and x > 0".into()));
    }
    let rule = y_rule(t, f0, c)?;
    let v = sum_over_nodes(&rule, 1, thread_count(c), |z, w| {
        let fz = f0.value(z);
        if fz == 0.0 {
            return Ok(vec![0.0]);
        }
        let tau = t / z;
        let d = if tau > DIRECT_MIN_T { TimeSlice::new(tau)?.d_dt((x / z).ln())?.0 } else { eval_dlambda_dt(tau, x / z)? };
        Ok(vec![w * fz * d / (z * z)])
    })?;
    Ok(v[0])
}

/// `φ(y ·)` restricted to the dilated support.
struct Dilated<'a, P: TestFunction> {
    phi: &'a P,
    y: f64,
}

impl<P: TestFunction> TestFunction for Dilated<'_, P> {
    fn value(&self, x: f64) -> f64 {
        self.phi.value(self.y * x)
    }

    fn support(&self) -> (f64, f64) {
        let (a, b) = self.phi.support();
        (a / self.y, b / self.y)
    }
}

/// `⟨u(t), φ⟩ = ∫ f0(y) ⟨Λ(t/y), φ(y ·)⟩ dy`.
pub fn pairing<P: TestFunction + Sync>(t: f64, f0: &InitialDatum, phi: &P, c: &SuperpositionControls) -> Result<f64> {
    if t == 0.0 {
        let (a, b) = phi.support();
        let (p, q) = f0.support();
        let (lo, hi) = (a.max(p), b.min(q));
        if hi <= lo {
            return Ok(0.0);
        }
        return Ok(adaptive_gk(|y| C64::new(f0.value(y) * phi.value(y), 0.0), lo, hi, 16, 1e-12, 1e-300, 4000)?.value.re);
    }
    let rule = y_rule(t, f0, c)?;
    let v = sum_over_nodes(&rule, 1, thread_count(c), |y, w| {
        let fy = f0.value(y);
        if fy == 0.0 {
            return Ok(vec![0.0]);
        }
        Ok(vec![w * fy * delta_pairing(t / y, &Dilated { phi, y })?])
    })?;
    Ok(v[0])
}

/// `∫ |u(t, x)| dx` from `points` log-spaced values spanning four decades beyond the support,
/// with the flat inner tail and the `x^{−5}` outer tail added in closed form.
pub fn l1_norm(t: f64, f0: &InitialDatum, points: usize, c: &SuperpositionControls) -> Result<f64> {
    let (a, b) = f0.support();
    let (lo, hi) = ((a.min(t) * 1e-4).ln(), (b.max(t) * 1e4).ln());
    let xs: Vec<f64> = (0..points).map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp()).collect();
    let u = solve_many(t, &xs, f0, c)?;
    let h = (hi - lo) / (points - 1) as f64;
    let body: f64 = (0..points - 1).map(|i| 0.5 * h * (xs[i] * u[i].abs() + xs[i + 1] * u[i + 1].abs())).sum();
    Ok(body + xs[0] * u[0].abs() + xs[points - 1] * u[points - 1].abs() / 4.0)
}
