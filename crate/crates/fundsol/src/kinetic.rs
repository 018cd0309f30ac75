//! Direct discretization of the collision operator on a geometric grid and
//! explicit time integration: the independent oracle for superposition solutions.
//!
//! Profiles are continuous and piecewise linear between nodes. For a node `x_i`,
//! `∫(u(y) − u(x_i))K(x_i, y)dy = Σ_{j≠i} W_ij (u_j − u_i) − d_i u_i`, where
//! `W_ij = ∫φ_j K(x_i, ·)` for the hat functions `φ_j`. The only hats touching the
//! diagonal vanish there, so every cell integrand is analytic and Gauss–Legendre
//! is exact to rounding.

use std::sync::OnceLock;

use serde::Serialize;

use crate::complexfn::eval_w;
use crate::contour::adaptive_gk;
use crate::error::{Error, Result};
use crate::kernels::eval_k;
use crate::lambda::RadialProfile;
use crate::{Real, C64};

/// Geometric grid `x_i = x_min ρ^i`, `i < n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub nodes: Vec<f64>,
}

impl LogGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min > 0.0 && x_max > x_min && x_max.is_finite()) || n < 16 {
            return Err(Error::Domain(format!("grid needs 0 < x_min < x_max and n ≥ 16, got {x_min}, {x_max}, {n}")));
        }
        let l = (x_max / x_min).ln();
        let mut nodes: Vec<f64> = (0..n).map(|i| x_min * (l * i as f64 / (n - 1) as f64).exp()).collect();
        nodes[n - 1] = x_max;
        Ok(LogGrid { x_min, x_max, n, nodes })
    }

    /// Common ratio of adjacent nodes.
    pub fn ratio(&self) -> f64 {
        (self.x_max / self.x_min).powf(1.0 / (self.n - 1) as f64)
    }
}

/// Continuation of a profile beyond one end of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TailPolicy {
    /// Linear decay to zero over one ghost cell, zero beyond.
    Zero,
    /// `u(y) = u_end (y/x_end)^p`.
    Power(f64),
}

/// Tails at both ends; the default is homogeneous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tails {
    pub lower: TailPolicy,
    pub upper: TailPolicy,
}

impl Default for Tails {
    fn default() -> Self {
        Tails { lower: TailPolicy::Zero, upper: TailPolicy::Zero }
    }
}

impl Tails {
    pub fn constant() -> Self {
        Tails { lower: TailPolicy::Power(0.0), upper: TailPolicy::Power(0.0) }
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
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
        out.push((0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn rules() -> &'static (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    static R: OnceLock<(Vec<(f64, f64)>, Vec<(f64, f64)>)> = OnceLock::new();
    R.get_or_init(|| (gauss_legendre(8), gauss_legendre(20)))
}

/// `∫_a^b f` by Gauss–Legendre.
fn gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, fine: bool) -> f64 {
    let r = if fine { &rules().1 } else { &rules().0 };
    (b - a) * r.iter().map(|(u, w)| w * f(a + (b - a) * u)).sum::<f64>()
}

fn k(x: f64, y: f64) -> f64 {
    eval_k(x, y).unwrap_or(0.0)
}

/// `∫_z^∞ K(x, y) dy` for `z > x`.
fn k_above(x: f64, z: f64) -> f64 {
    let q = (x / z) * (x / z);
    ((1.0 + q) / (1.0 - q)).ln() / (2.0 * x)
}

/// `∫_0^z K(x, y) dy` for `z < x`.
fn k_below(x: f64, z: f64) -> f64 {
    -(-(z / x).powi(4)).ln_1p() / (2.0 * x)
}

/// `∫ g(y) K(x, y) dy` over `y = x_end e^{±w}`, `w > 0`.
fn tail_integral<G: Fn(f64) -> f64>(g: G, x: f64, x_end: f64, upward: bool) -> Result<f64> {
    let sgn = if upward { 1.0 } else { -1.0 };
    let f = |w: f64| {
        let y = x_end * (sgn * w).exp();
        if y == x {
            return C64::new(0.0, 0.0);
        }
        C64::new(g(y) * k(x, y) * y, 0.0)
    };
    Ok(adaptive_gk(f, 0.0, 80.0, 16, 1e-12, 1e-300, 4000)?.value.re)
}

/// Precomputed collision operator on a grid.
#[derive(Debug, Clone)]
pub struct CollisionOperator<T> {
    pub grid: LogGrid,
    pub tails: Tails,
    /// Row-major `W_ij`, zero on the diagonal.
    weights: Vec<T>,
    /// Loss coefficient `d_i` of `u_i`.
    loss: Vec<T>,
    threads: usize,
}

impl<T: Real> CollisionOperator<T> {
    pub fn new(grid: LogGrid, tails: Tails) -> Result<Self> {
        if let TailPolicy::Power(p) = tails.lower {
            if !(p > -4.0) {
                return Err(Error::Domain(format!("lower tail exponent {p} must exceed −4")));
            }
        }
        if let TailPolicy::Power(p) = tails.upper {
            if !(p < 2.0) {
                return Err(Error::Domain(format!("upper tail exponent {p} must be below 2")));
            }
        }
        let n = grid.n;
        let x = &grid.nodes;
        let rho = grid.ratio();
        let mut w = vec![0.0f64; n * n];
        let mut loss = vec![0.0f64; n];
        for i in 0..n {
            let xi = x[i];
            let row = &mut w[i * n..(i + 1) * n];
            for c in 0..n - 1 {
                let (a, b) = (x[c], x[c + 1]);
                let h = b - a;
                let fine = (c as i64 - i as i64).abs() <= 3;
                if c != i {
                    row[c] += gl(|y| (b - y) / h * k(xi, y), a, b, fine);
                }
                if c + 1 != i {
                    row[c + 1] += gl(|y| (y - a) / h * k(xi, y), a, b, fine);
                }
            }
            // Lower continuation.
            let x0 = x[0];
            match tails.lower {
                TailPolicy::Zero => {
                    let g0 = x0 / rho;
                    let h = x0 - g0;
                    if i != 0 {
                        row[0] += gl(|y| (y - g0) / h * k(xi, y), g0, x0, true);
                    }
                    loss[i] += gl(|y| (x0 - y) / h * k(xi, y), g0, x0, true) + k_below(xi, g0);
                }
                TailPolicy::Power(p) => {
                    if i != 0 {
                        row[0] += tail_integral(|y| (y / x0).powf(p), xi, x0, false)?;
                    }
                    if p != 0.0 {
                        loss[i] += tail_integral(|y| 1.0 - (y / x0).powf(p), xi, x0, false)?;
                    }
                }
            }
            // Upper continuation.
            let xn = x[n - 1];
            match tails.upper {
                TailPolicy::Zero => {
                    let g1 = xn * rho;
                    let h = g1 - xn;
                    if i != n - 1 {
                        row[n - 1] += gl(|y| (g1 - y) / h * k(xi, y), xn, g1, true);
                    }
                    loss[i] += gl(|y| (y - xn) / h * k(xi, y), xn, g1, true) + k_above(xi, g1);
                }
                TailPolicy::Power(p) => {
                    if i != n - 1 {
                        row[n - 1] += tail_integral(|y| (y / xn).powf(p), xi, xn, true)?;
                    }
                    if p != 0.0 {
                        loss[i] += tail_integral(|y| 1.0 - (y / xn).powf(p), xi, xn, true)?;
                    }
                }
            }
            row[i] = 0.0;
        }
        let conv = |v: f64| T::from_f64(v).expect("weight representable");
        let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        Ok(CollisionOperator {
            grid,
            tails,
            weights: w.into_iter().map(conv).collect(),
            loss: loss.into_iter().map(conv).collect(),
            threads,
        })
    }

    /// Worker threads for [`Self::collision`]; results do not depend on it.
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    /// `∫(u(y) − u(x_i)) K(x_i, y) dy` at every node.
    pub fn collision(&self, u: &[T]) -> Vec<T> {
        let n = self.grid.n;
        assert_eq!(u.len(), n, "profile length must match the grid");
        let row = |i: usize| -> T {
            let w = &self.weights[i * n..(i + 1) * n];
            let ui = u[i];
            let mut acc = T::zero();
            for j in 0..n {
                acc = acc + w[j] * (u[j] - ui);
            }
            acc - self.loss[i] * ui
        };
        let mut out = vec![T::zero(); n];
        let chunk = n.div_ceil(self.threads);
        std::thread::scope(|s| {
            for (c, slot) in out.chunks_mut(chunk).enumerate() {
                let row = &row;
                s.spawn(move || {
                    for (k, v) in slot.iter_mut().enumerate() {
                        *v = row(c * chunk + k);
                    }
                });
            }
        });
        out
    }

    /// Generator of the evolution: the transport form, equal to twice [`Self::collision`].
    pub fn generator(&self, u: &[T]) -> Vec<T> {
        let two = T::one() + T::one();
        self.collision(u).into_iter().map(|v| v * two).collect()
    }
}

/// `∫_0^r H(ρ)/ρ dρ` for `r ≤ 1`.
fn h_primitive_below(r: f64) -> f64 {
    if r < 1e-4 {
        return 2.0 * r - r.powi(5) / 5.0;
    }
    let lm = if r < 1.0 { (-r).ln_1p() * (1.0 - r) / r } else { 0.0 };
    lm + r.ln_1p() * (1.0 + r) / r - (r * r).ln_1p() / r + 2.0 * r.atan()
}

/// `∫_r^∞ H(ρ)/ρ dρ` for `r ≥ 1`, written in `q = 1/r`.
fn h_primitive_above(r: f64) -> f64 {
    let q = 1.0 / r;
    if q < 1e-4 {
        return -q.powi(5) / 5.0;
    }
    let lm = if q < 1.0 { (q - 1.0) * (-q).ln_1p() } else { 0.0 };
    lm + (1.0 + q) * q.ln_1p() + q * (q * q).ln_1p() - 4.0 * q + 2.0 * q.atan()
}

/// `∫_0^r H(ρ)/ρ dρ` for all `r > 0`.
pub fn h_primitive(r: f64) -> f64 {
    if r <= 1.0 {
        h_primitive_below(r)
    } else {
        h_primitive_below(1.0) + h_primitive_above(1.0) - h_primitive_above(r)
    }
}

/// Transport form `∫ H(x/y) u′(y) dy/y` of a piecewise-linear profile, with the same tails.
pub fn apply_transport(grid: &LogGrid, tails: Tails, u: &[f64]) -> Result<Vec<f64>> {
    let n = grid.n;
    if u.len() != n {
        return Err(Error::Domain(format!("profile has {} values for {n} nodes", u.len())));
    }
    let x = &grid.nodes;
    let rho = grid.ratio();
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let xi = x[i];
        let cell = |a: f64, b: f64, slope: f64| slope * (h_primitive(xi / a) - h_primitive(xi / b));
        let mut acc = 0.0;
        for c in 0..n - 1 {
            acc += cell(x[c], x[c + 1], (u[c + 1] - u[c]) / (x[c + 1] - x[c]));
        }
        acc += match tails.lower {
            TailPolicy::Zero => cell(x[0] / rho, x[0], u[0] / (x[0] - x[0] / rho)),
            TailPolicy::Power(p) => power_transport(xi, x[0], u[0], p, false)?,
        };
        acc += match tails.upper {
            TailPolicy::Zero => cell(x[n - 1], x[n - 1] * rho, -u[n - 1] / (x[n - 1] * rho - x[n - 1])),
            TailPolicy::Power(p) => power_transport(xi, x[n - 1], u[n - 1], p, true)?,
        };
        *o = acc;
    }
    Ok(out)
}

/// `∫ H(x/y) u′(y) dy/y` over a power-law continuation `u = u_end (y/x_end)^p`.
fn power_transport(x: f64, x_end: f64, u_end: f64, p: f64, upward: bool) -> Result<f64> {
    if p == 0.0 || u_end == 0.0 {
        return Ok(0.0);
    }
    let sgn = if upward { 1.0 } else { -1.0 };
    // y = x_end e^{±w}: u′(y) dy/y = p u(y)/y dw in either orientation.
    let f = |w: f64| {
        let y = x_end * (sgn * w).exp();
        let r = x / y;
        if r == 1.0 {
            return C64::new(0.0, 0.0);
        }
        let h = crate::kernels::eval_h(r).unwrap_or(0.0);
        C64::new(h * p * u_end * (y / x_end).powf(p) / y, 0.0)
    };
    Ok(adaptive_gk(f, 0.0, 80.0, 16, 1e-12, 1e-300, 4000)?.value.re)
}

fn check_resolved(u: &[f64]) -> Result<()> {
    let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(i) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::Unresolved(i));
    }
    if let Some(i) = u.windows(2).position(|w| (w[1] - w[0]).abs() >= 0.5 * scale && scale > 0.0) {
        return Err(Error::Unresolved(i));
    }
    Ok(())
}

fn operator_for(profile: &RadialProfile, tails: Tails) -> Result<(LogGrid, CollisionOperator<f64>)> {
    let n = profile.grid.len();
    if n < 16 {
        return Err(Error::Domain("profiles need at least 16 nodes".into()));
    }
    let grid = LogGrid::new(profile.grid[0], profile.grid[n - 1], n)?;
    let tol = 1e-9 * grid.x_max;
    if grid.nodes.iter().zip(&profile.grid).any(|(a, b)| (a - b).abs() > tol) {
        return Err(Error::Domain("profile grid is not geometric".into()));
    }
    check_resolved(&profile.values)?;
    let op = CollisionOperator::new(grid.clone(), tails)?;
    Ok((grid, op))
}

/// Collision integral `∫(u(y) − u(x))K(x, y)dy` of a profile on a geometric grid.
pub fn apply_l(profile: &RadialProfile, tails: Tails) -> Result<RadialProfile> {
    let (grid, op) = operator_for(profile, tails)?;
    RadialProfile::new(grid.nodes, op.collision(&profile.values), profile.t_stamp)
}

/// `∫ u(x) x^{s−1} dx` of the piecewise-linear profile over its grid.
pub fn mellin_moment(profile: &RadialProfile, s: C64) -> C64 {
    let x = &profile.grid;
    let u = &profile.values;
    let mut acc = C64::new(0.0, 0.0);
    for c in 0..x.len().saturating_sub(1) {
        acc += linear_moment(x[c], x[c + 1], u[c], u[c + 1], s);
    }
    acc
}

/// Moment including the continuation beyond the grid; `None` when it diverges.
pub fn mellin_moment_with_tails(profile: &RadialProfile, s: C64, tails: Tails) -> Option<C64> {
    let x = &profile.grid;
    let u = &profile.values;
    let n = x.len();
    let rho = x[1] / x[0];
    let lower = match tails.lower {
        TailPolicy::Zero => linear_moment(x[0] / rho, x[0], 0.0, u[0], s),
        TailPolicy::Power(p) if s.re + p > 0.0 => (s * x[0].ln()).exp() * u[0] / (s + p),
        TailPolicy::Power(_) if u[0] == 0.0 => C64::new(0.0, 0.0),
        TailPolicy::Power(_) => return None,
    };
    let upper = match tails.upper {
        TailPolicy::Zero => linear_moment(x[n - 1], x[n - 1] * rho, u[n - 1], 0.0, s),
        TailPolicy::Power(p) if s.re + p < 0.0 => -(s * x[n - 1].ln()).exp() * u[n - 1] / (s + p),
        TailPolicy::Power(_) if u[n - 1] == 0.0 => C64::new(0.0, 0.0),
        TailPolicy::Power(_) => return None,
    };
    Some(lower + mellin_moment(profile, s) + upper)
}

/// `∫_a^b (linear interpolant of (a, ua), (b, ub)) y^{s−1} dy`.
fn linear_moment(a: f64, b: f64, ua: f64, ub: f64, s: C64) -> C64 {
    let m = (ub - ua) / (b - a);
    power_moment(a, b, s) * (ua - m * a) + power_moment(a, b, s + 1.0) * m
}

/// `∫_a^b y^{s−1} dy`.
fn power_moment(a: f64, b: f64, s: C64) -> C64 {
    let l = (b / a).ln();
    let z = s * l;
    let em1 = if z.norm() < 1e-3 { z * (1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0) } else { z.exp() - 1.0 };
    if s.norm() < 1e-12 {
        return C64::new(l, 0.0);
    }
    (s * a.ln()).exp() * em1 / s
}

/// Snapshot of an evolution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionState {
    pub tau: f64,
    pub profile: RadialProfile,
    /// Mellin moments at the requested `s`.
    pub moments: Vec<(C64, C64)>,
    /// `∫u dx` over the grid, for leak tracking.
    pub mass: f64,
    pub tails: Tails,
}

/// Time stepping controls.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveControls {
    pub rel_tol: f64,
    /// Absolute floor, relative to `max |u0|`.
    pub abs_floor: f64,
    pub snapshots: Vec<f64>,
    pub tails: Tails,
    pub moment_s: Vec<C64>,
    pub max_steps: usize,
    pub threads: Option<usize>,
}

impl Default for EvolveControls {
    fn default() -> Self {
        EvolveControls {
            rel_tol: 1e-7,
            abs_floor: 1e-10,
            snapshots: Vec::new(),
            tails: Tails::default(),
            moment_s: Vec::new(),
            max_steps: 2_000_000,
            threads: None,
        }
    }
}

// Dormand–Prince 5(4) tableau; the generator is autonomous so the nodes are not needed.
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `du/dτ = generator(u)` to each snapshot time with an embedded 5(4) pair.
pub fn evolve_values<T: Real>(op: &CollisionOperator<T>, u0: &[T], controls: &EvolveControls) -> Result<Vec<(f64, Vec<T>)>> {
    let mut snaps = controls.snapshots.clone();
    if snaps.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || snaps.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("snapshot times must be nonnegative and increasing".into()));
    }
    if snaps.is_empty() {
        return Ok(Vec::new());
    }
    let t_end = *snaps.last().expect("nonempty");
    let cst = |v: f64| T::from_f64(v).expect("representable");
    let scale = u0.iter().fold(0.0f64, |m, v| m.max(v.to_f64().unwrap_or(0.0).abs()));
    let atol = controls.abs_floor * scale.max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(snaps.len());
    let mut u = u0.to_vec();
    let mut t = 0.0f64;
    let mut dt = (t_end * 1e-3).max(1e-8);
    let mut k: Vec<Vec<T>> = vec![op.generator(&u)];
    snaps.reverse();
    while snaps.last() == Some(&0.0) {
        out.push((0.0, u.clone()));
        snaps.pop();
    }
    let mut steps = 0usize;
    while let Some(&target) = snaps.last() {
        if steps >= controls.max_steps {
            return Err(Error::StepCollapse { t, dt });
        }
        steps += 1;
        let h = dt.min(target - t);
        k.truncate(1);
        for stage in 1..7 {
            let a = &DP_A[stage];
            let y: Vec<T> = (0..u.len())
                .map(|i| {
                    let mut acc = T::zero();
                    for (j, kj) in k.iter().enumerate() {
                        if a[j] != 0.0 {
                            acc = acc + kj[i] * cst(a[j]);
                        }
                    }
                    u[i] + acc * cst(h)
                })
                .collect();
            k.push(op.generator(&y));
        }
        let mut err = 0.0f64;
        let mut next = Vec::with_capacity(u.len());
        for i in 0..u.len() {
            let mut inc = T::zero();
            let mut e = T::zero();
            for s in 0..7 {
                inc = inc + k[s][i] * cst(DP_B[s]);
                e = e + k[s][i] * cst(DP_E[s]);
            }
            let ui = u[i] + inc * cst(h);
            let sc = atol + controls.rel_tol * ui.to_f64().unwrap_or(0.0).abs().max(u[i].to_f64().unwrap_or(0.0).abs());
            err = err.max((e * cst(h)).to_f64().unwrap_or(f64::INFINITY).abs() / sc);
            next.push(ui);
        }
        if err <= 1.0 {
            t = if h == target - t { target } else { t + h };
            u = next;
            // First-same-as-last: the last stage is the derivative at the new point.
            let last = k.pop().expect("seven stages");
            k.clear();
            k.push(last);
            if t == target {
                out.push((t, u.clone()));
                snaps.pop();
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        dt = h * factor;
        if dt < 1e-12 * t_end {
            return Err(Error::StepCollapse { t, dt });
        }
    }
    Ok(out)
}

/// Evolve a profile on a geometric grid; states are recorded at `controls.snapshots`.
pub fn evolve(u0: &RadialProfile, controls: &EvolveControls) -> Result<Vec<EvolutionState>> {
    let (_, op) = operator_for(u0, controls.tails)?;
    let op = match controls.threads {
        Some(t) => op.with_threads(t),
        None => op,
    };
    let states = evolve_values(&op, &u0.values, controls)?;
    states
        .into_iter()
        .map(|(tau, values)| {
            let profile = RadialProfile::new(u0.grid.clone(), values, tau)?;
            let moments = controls.moment_s.iter().map(|&s| (s, mellin_moment(&profile, s))).collect();
            let mass = mellin_moment(&profile, C64::new(1.0, 0.0)).re;
            Ok(EvolutionState { tau, profile, moments, mass, tails: controls.tails })
        })
        .collect()
}

/// Residual of the Mellin multiplier law `d/dτ M(s) = W(s−1) M(s−1)` along a trajectory,
/// relative to `max |W(s−1)M(s−1)|`.
///
/// Interior states are differentiated by centred differences on possibly uneven spacing.
/// Moments include the continuation set by each state's tail policy.
pub fn multiplier_check(trajectory: &[EvolutionState], s: C64) -> Result<f64> {
    if !(s.re > 1.1 && s.re < 2.9) {
        return Err(Error::Domain(format!("multiplier check needs Re s in (1.1, 2.9), got {}", s.re)));
    }
    if trajectory.len() < 3 {
        return Err(Error::Domain("multiplier check needs at least three states".into()));
    }
    let first = &trajectory[0].profile;
    let total = first.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let boundary = first.values[0].abs().max(first.values[first.values.len() - 1].abs());
    if boundary > 1e-6 * total {
        return Err(Error::Truncation(boundary / total));
    }
    let w = eval_w(s - 1.0)?;
    let m = |st: &EvolutionState, z: C64| {
        mellin_moment_with_tails(&st.profile, z, st.tails).ok_or_else(|| Error::Divergence(format!("moment at {z} diverges with tails {:?}", st.tails)))
    };
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in 1..trajectory.len() - 1 {
        let (a, b, c) = (&trajectory[i - 1], &trajectory[i], &trajectory[i + 1]);
        let (h0, h1) = (b.tau - a.tau, c.tau - b.tau);
        let d = (m(c, s)? - m(b, s)?) * (h0 / (h1 * (h0 + h1))) + (m(b, s)? - m(a, s)?) * (h1 / (h0 * (h0 + h1)));
        let rhs = w * m(b, s - 1.0)?;
        scale = scale.max(rhs.norm());
        worst = worst.max((d - rhs).norm());
    }
    Ok(worst / scale.max(f64::MIN_POSITIVE))
}
