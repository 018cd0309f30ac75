//! The fundamental solution `Λ(t, x)`: inverse Mellin transform of the symbol
//! `F = √(2π)·U` along `Re s = 1`, evaluated by Filon quadrature on sampled
//! symbol profiles plus an analytic power-law tail.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::bfunc::{derived_constants, BEvaluator};
use crate::complexfn::{eval_w, exp_integral_e, gamma};
use crate::contour::{adaptive_gk, integrate_circle};
use crate::error::{Error, Result};
use crate::ufunc::{ProfileBasis, SymbolProfile};
use crate::C64;

/// Abscissa of the inverse Mellin line.
pub const ABSCISSA: f64 = 1.0;
/// Sample spacing along the line.
pub const STEP: f64 = 0.1;
/// Sampled height of the line before the analytic tail takes over.
pub const HEIGHT: f64 = 1000.0;
/// σ-line of the large-time remainder, right of the zeros of `B` at 3.
pub const REMAINDER_LINE: f64 = 3.5;
/// Dispatch threshold: above it the plain inverse Mellin integral converges fast enough.
pub const DIRECT_MIN_T: f64 = 0.55;

const ZERO: C64 = C64::new(0.0, 0.0);
const NODES: usize = 6;
/// Extra samples past the last panel needed by the interpolation stencil at step `2h`.
const STENCIL_PAD: usize = 8;

/// How `Λ` is evaluated at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Direct,
    LogRegularized,
    LargeTAsymptotic,
    SmallTSeries,
    NearOneScaling,
    Auto,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Direct => "direct",
            Regime::LogRegularized => "log_regularized",
            Regime::LargeTAsymptotic => "large_t_asymptotic",
            Regime::SmallTSeries => "small_t_series",
            Regime::NearOneScaling => "near_one_scaling",
            Regime::Auto => "auto",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "direct" => Regime::Direct,
            "log_regularized" => Regime::LogRegularized,
            "large_t_asymptotic" => Regime::LargeTAsymptotic,
            "small_t_series" => Regime::SmallTSeries,
            "near_one_scaling" => Regime::NearOneScaling,
            "auto" => Regime::Auto,
            _ => return Err(Error::Domain(format!("unknown regime {s:?}"))),
        })
    }
}

/// A point at which to evaluate `Λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaQuery {
    pub t: f64,
    pub x: f64,
    pub regime: Regime,
}

impl LambdaQuery {
    pub fn new(t: f64, x: f64) -> Self {
        LambdaQuery { t, x, regime: Regime::Auto }
    }
}

/// Value of `Λ` with an error estimate and the regime actually used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaValue {
    pub value: f64,
    pub err: f64,
    pub regime: Regime,
}

/// Sampled real function on a strictly increasing positive grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub t_stamp: f64,
}

impl RadialProfile {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, t_stamp: f64) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Domain(format!("grid has {} nodes but {} values", grid.len(), values.len())));
        }
        if grid.first().is_some_and(|g| !(*g > 0.0)) || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("profile grid must be positive and strictly increasing".into()));
        }
        Ok(RadialProfile { grid, values, t_stamp })
    }
}

fn basis() -> Result<&'static ProfileBasis> {
    static BASIS: OnceLock<std::result::Result<ProfileBasis, Error>> = OnceLock::new();
    BASIS
        .get_or_init(|| {
            ProfileBasis::with_lines(ABSCISSA, STEP, HEIGHT + STENCIL_PAD as f64 * STEP, &[REMAINDER_LINE])
        })
        .as_ref()
        .map_err(Clone::clone)
}

/// Monomial coefficients of the Lagrange basis on the nodes `-2..=3`.
fn lagrange() -> &'static [[f64; NODES]; NODES] {
    static L: OnceLock<[[f64; NODES]; NODES]> = OnceLock::new();
    L.get_or_init(|| {
        let mut out = [[0.0; NODES]; NODES];
        for (m, row) in out.iter_mut().enumerate() {
            let um = m as f64 - 2.0;
            let mut poly = vec![1.0];
            for i in (0..NODES).filter(|&i| i != m) {
                let ui = i as f64 - 2.0;
                let mut next = vec![0.0; poly.len() + 1];
                for (k, p) in poly.iter().enumerate() {
                    next[k + 1] += p / (um - ui);
                    next[k] -= p * ui / (um - ui);
                }
                poly = next;
            }
            row.copy_from_slice(&poly);
        }
        out
    })
}

/// `∫_0^1 u^n e^{-iθu} du` for `n < 6`.
fn moments(theta: f64) -> [C64; NODES] {
    let mut mu = [ZERO; NODES];
    if theta.abs() < 4.0 {
        let z = C64::new(0.0, -theta);
        for (n, m) in mu.iter_mut().enumerate() {
            let mut term = C64::new(1.0, 0.0);
            for k in 0..80 {
                let add = term / (n + k + 1) as f64;
                *m += add;
                if k > 4 && add.norm() < 1e-18 * m.norm() {
                    break;
                }
                term = term * z / (k + 1) as f64;
            }
        }
    } else {
        let e = C64::new(0.0, -theta).exp();
        let it = C64::new(0.0, theta);
        mu[0] = (1.0 - e) / it;
        for n in 1..NODES {
            mu[n] = (mu[n - 1] * n as f64 - e) / it;
        }
    }
    mu
}

fn filon_weights(theta: f64) -> [C64; NODES] {
    let mu = moments(theta);
    let l = lagrange();
    let mut w = [ZERO; NODES];
    for m in 0..NODES {
        for n in 0..NODES {
            w[m] += mu[n] * l[m][n];
        }
    }
    w
}

/// `∫_0^{panels·h} g(v) e^{-ivX} dv` from `g_k = g(kh)`, with `g(-v) = conj g(v)`.
fn filon(g: &[C64], h: f64, log_x: f64, panels: usize) -> C64 {
    let theta = h * log_x;
    let w = filon_weights(theta);
    let at = |k: i64| if k >= 0 { g[k as usize] } else { g[(-k) as usize].conj() };
    let mut acc = ZERO;
    let mut phase = C64::new(1.0, 0.0);
    let rot = C64::new(0.0, -theta).exp();
    for j in 0..panels as i64 {
        if j % 256 == 0 {
            phase = C64::new(0.0, -theta * j as f64).exp();
        }
        let mut p = ZERO;
        for (m, wm) in w.iter().enumerate() {
            p += wm * at(j + m as i64 - 2);
        }
        acc += phase * p;
        phase *= rot;
    }
    acc * h
}

/// Tail model `g(v) ≈ (V/v)^q (α + β V/v)` for `v ≥ V`.
struct PowerTail {
    v: f64,
    q: f64,
    alpha: C64,
    beta: C64,
}

impl PowerTail {
    /// Fit through `g(V)` and `g(rV)`.
    fn fit(g_end: C64, g_in: C64, v: f64, r: f64, q: f64) -> Self {
        let beta = (g_in * r.powf(q) - g_end) / (1.0 / r - 1.0);
        PowerTail { v, q, alpha: g_end - beta, beta }
    }

    fn integral_at(&self, q: f64, log_x: f64) -> Result<C64> {
        let z = C64::new(0.0, self.v * log_x);
        Ok((self.alpha * exp_integral_e(q, z)? + self.beta * exp_integral_e(q + 1.0, z)?) * self.v)
    }

    /// `∫_V^∞ g(v) e^{-ivX} dv`.
    fn integral(&self, log_x: f64) -> Result<C64> {
        self.integral_at(self.q, log_x)
    }

    /// `∫_V^∞ ln(v) g(v) e^{-ivX} dv`, using `ln v (V/v)^q = ln V (V/v)^q − ∂_q (V/v)^q`.
    fn log_integral(&self, log_x: f64) -> Result<C64> {
        let dq = 1e-4;
        let d = (self.integral_at(self.q + dq, log_x)? - self.integral_at(self.q - dq, log_x)?) / (2.0 * dq);
        Ok(self.integral(log_x)? * self.v.ln() - d)
    }
}

/// `∫_0^∞ g(v) e^{-ivX} dv` with its error estimate.
///
/// With `log_f`, `g` is treated as `r − 2 ln(v) f` where `r` follows the power tail.
fn line_integral(g: &[C64], h: f64, panels: usize, q: f64, log_x: f64, log_f: Option<&[C64]>) -> Result<(C64, f64)> {
    let body = filon(g, h, log_x, panels);
    let coarse: Vec<C64> = g.iter().step_by(2).copied().collect();
    let body2 = filon(&coarse, 2.0 * h, log_x, panels / 2);
    let tail = |quarters: usize| -> Result<C64> {
        let k_in = panels * quarters / 4;
        let v = panels as f64 * h;
        let r = k_in as f64 / panels as f64;
        match log_f {
            None => PowerTail::fit(g[panels], g[k_in], v, r, q).integral(log_x),
            Some(f) => {
                let res = |k: usize| g[k] + f[k] * (2.0 * (k as f64 * h).ln());
                let rt = PowerTail::fit(res(panels), res(k_in), v, r, q).integral(log_x)?;
                let ft = PowerTail::fit(f[panels], f[k_in], v, r, q).log_integral(log_x)?;
                Ok(rt - ft * 2.0)
            }
        }
    };
    let t3 = tail(3)?;
    let t2 = tail(2)?;
    let err = (body - body2).norm() / 63.0 + (t3 - t2).norm();
    Ok((body + t3, err))
}

/// Symbol samples at one time, reusable for any `x`.
#[derive(Debug, Clone)]
pub struct TimeSlice {
    pub t: f64,
    profile: SymbolProfile,
    panels: usize,
}

impl TimeSlice {
    /// Slice of `F(t, ·)` on the standard line.
    pub fn new(t: f64) -> Result<Self> {
        Self::build(t, None)
    }

    /// Slice of the large-time remainder: the symbol with the pole of `1/B` at 3 removed.
    pub fn remainder(t: f64) -> Result<Self> {
        Self::build(t, Some(REMAINDER_LINE))
    }

    fn build(t: f64, line: Option<f64>) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("Λ needs t > 0, got {t}")));
        }
        let basis = basis()?;
        // Past v_cut even v·|∂F| is below rounding: shorten the sum.
        let v_cut = if t > 2.0 { 10f64.powf(16.0 / (2.0 * t - 2.0)).max(20.0) } else { f64::INFINITY };
        let k_cap = basis.k_max.min((v_cut / STEP).ceil().min(1e9) as usize + STENCIL_PAD);
        let panels = (k_cap - STENCIL_PAD) / 4 * 4;
        let profile = match line {
            None => basis.profile_upto(t, panels + STENCIL_PAD)?,
            Some(beta) => basis.profile_on_line(t, beta, panels + STENCIL_PAD)?,
        };
        Ok(TimeSlice { t, profile, panels })
    }

    fn prefactor(&self, log_x: f64) -> f64 {
        (-self.profile.c * log_x).exp() / PI
    }

    fn noise(&self) -> f64 {
        self.profile.err * self.panels as f64 * self.profile.h
    }

    fn integral(&self, g: &[C64], q: f64, log_x: f64, log_f: Option<&[C64]>) -> Result<(C64, f64)> {
        line_integral(g, self.profile.h, self.panels, q, log_x, log_f)
    }

    /// `Λ(t, e^X)` from the plain inverse Mellin integral; needs `t > 1/2`.
    pub fn direct(&self, log_x: f64) -> Result<(f64, f64)> {
        if !(self.t > 0.5) {
            return Err(Error::Regime(format!("direct inverse Mellin integral diverges for t = {} ≤ 1/2", self.t)));
        }
        let (i, e) = self.integral(&self.profile.f, 2.0 * self.t, log_x, None)?;
        let pre = self.prefactor(log_x);
        Ok((pre * i.re, pre * (e + self.noise())))
    }

    /// `X·Λ(t, e^X)` from the `∂_s F` integral; valid for every `t > 0`.
    pub fn log_times_lambda(&self, log_x: f64) -> Result<(f64, f64)> {
        let (i, e) = self.integral(&self.profile.f_s, 2.0 * self.t + 1.0, log_x, None)?;
        let pre = self.prefactor(log_x);
        Ok((pre * i.re, pre * (e + self.noise())))
    }

    /// `X·Λ(t, e^X)` with the numerical value at `X = 0` (exactly zero in theory) subtracted.
    pub fn log_times_lambda_centered(&self, log_x: f64) -> Result<(f64, f64)> {
        let q = 2.0 * self.t + 1.0;
        let (i, e) = self.integral(&self.profile.f_s, q, log_x, None)?;
        let (i0, e0) = self.integral(&self.profile.f_s, q, 0.0, None)?;
        let pre = self.prefactor(log_x);
        Ok((pre * (i - i0).re, pre * (e + e0)))
    }

    /// `∂_tΛ(t, e^X)` from the `∂_t F` integral; needs `t > 1/2`.
    pub fn d_dt(&self, log_x: f64) -> Result<(f64, f64)> {
        if !(self.t > 0.5) {
            return Err(Error::Regime(format!("∂_t integral diverges for t = {} ≤ 1/2", self.t)));
        }
        let (i, e) = self.integral(&self.profile.f_t, 2.0 * self.t, log_x, Some(&self.profile.f))?;
        let pre = self.prefactor(log_x);
        Ok((pre * i.re, pre * (e + self.noise())))
    }

    /// `∂_xΛ(t, e^X)` from the `−s F` integral; needs `t > 1`.
    pub fn d_dx(&self, log_x: f64) -> Result<(f64, f64)> {
        if !(self.t > 1.0) {
            return Err(Error::Regime(format!("∂_x integral needs t > 1, got {}", self.t)));
        }
        let c = self.profile.c;
        let h = self.profile.h;
        let g: Vec<C64> =
            self.profile.f.iter().enumerate().map(|(k, f)| -C64::new(c, k as f64 * h) * f).collect();
        let (i, e) = self.integral(&g, 2.0 * self.t - 1.0, log_x, None)?;
        let pre = self.prefactor(log_x) * (-log_x).exp();
        Ok((pre * i.re, pre * (e + self.noise() * (1.0 + HEIGHT))))
    }

    /// `Λ(t, e^X)` in a concrete regime (not `Auto` or the asymptotic ones).
    pub fn eval(&self, log_x: f64, regime: Regime) -> Result<LambdaValue> {
        let (value, err) = match regime {
            Regime::Direct => self.direct(log_x)?,
            Regime::LogRegularized => {
                if log_x == 0.0 {
                    return Err(Error::Regime("log-regularized path is undefined at x = 1".into()));
                }
                let (v, e) = self.log_times_lambda(log_x)?;
                (v / log_x, e / log_x.abs())
            }
            Regime::NearOneScaling => {
                if self.t > 0.5 {
                    self.direct(log_x)?
                } else if log_x == 0.0 {
                    (f64::INFINITY, 0.0)
                } else {
                    let (v, e) = self.log_times_lambda_centered(log_x)?;
                    (v / log_x, e / log_x.abs())
                }
            }
            other => return Err(Error::Regime(format!("time slices do not evaluate regime {}", other.as_str()))),
        };
        Ok(LambdaValue { value, err, regime })
    }

    /// `Λ(t, e^X)` with the regime picked by [`resolve_regime`].
    pub fn eval_auto(&self, log_x: f64) -> Result<LambdaValue> {
        self.eval(log_x, resolve_regime(self.t, log_x))
    }
}

/// Slice for time `t`, memoized over the most recent times.
pub fn slice(t: f64) -> Result<Arc<TimeSlice>> {
    cached_slice(t, false)
}

/// Remainder slice for time `t`, memoized like [`slice`].
pub fn remainder_slice(t: f64) -> Result<Arc<TimeSlice>> {
    cached_slice(t, true)
}

fn cached_slice(t: f64, remainder: bool) -> Result<Arc<TimeSlice>> {
    type Cache = Mutex<VecDeque<(u64, bool, Arc<TimeSlice>)>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(VecDeque::new()));
    let key = t.to_bits();
    if let Some((_, _, s)) = cache.lock().expect("slice cache").iter().find(|(k, r, _)| *k == key && *r == remainder) {
        return Ok(s.clone());
    }
    let s = Arc::new(if remainder { TimeSlice::remainder(t)? } else { TimeSlice::new(t)? });
    let mut c = cache.lock().expect("slice cache");
    if c.len() >= 16 {
        c.pop_front();
    }
    c.push_back((key, remainder, s.clone()));
    Ok(s)
}

/// Deterministic regime choice from `t` and `X = ln x`.
pub fn resolve_regime(t: f64, log_x: f64) -> Regime {
    if t > DIRECT_MIN_T {
        Regime::Direct
    } else if log_x.exp_m1().abs() >= (-1.0 / t).exp() {
        Regime::LogRegularized
    } else {
        Regime::NearOneScaling
    }
}

/// Leading small-time behaviour `t·|X|^{2t−1}` of `Λ` near `x = 1`.
pub fn near_one_leading(t: f64, log_x: f64) -> f64 {
    t * log_x.abs().powf(2.0 * t - 1.0)
}

fn check_point(t: f64, x: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite() && x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("Λ needs t > 0 and x > 0, got t = {t}, x = {x}")));
    }
    Ok(())
}

/// `Λ(t, x)` in the requested regime.
pub fn eval_lambda(q: &LambdaQuery) -> Result<LambdaValue> {
    check_point(q.t, q.x)?;
    eval_lambda_log(q.t, q.x.ln(), q.regime)
}

/// `Λ(t, e^X)`; the log variable keeps resolution at `|x − 1|` far below machine epsilon.
pub fn eval_lambda_log(t: f64, log_x: f64, regime: Regime) -> Result<LambdaValue> {
    if !(t > 0.0 && t.is_finite() && log_x.is_finite()) {
        return Err(Error::Domain(format!("Λ needs t > 0 and finite log x, got t = {t}, X = {log_x}")));
    }
    let regime = if regime == Regime::Auto { resolve_regime(t, log_x) } else { regime };
    match regime {
        Regime::LargeTAsymptotic => {
            let x = log_x.exp();
            let v = t.powi(-3) * eval_q1(x / t)? + eval_q2(t, x / t)?;
            Ok(LambdaValue { value: v, err: 1e-10 * v.abs().max(1e-6), regime })
        }
        Regime::SmallTSeries => {
            let v = eval_lambda_series(t, log_x.exp(), SERIES_TERMS)?;
            Ok(LambdaValue { value: v, err: 1e-10 * v.abs(), regime })
        }
        _ => slice(t)?.eval(log_x, regime),
    }
}

/// Residue constants of the large-time expansion in library normalization,
/// next to the closed forms as printed in the literature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LargeTimeConstants {
    /// `−Res(1/B, 3)`.
    pub c1: f64,
    /// `B(1)`.
    pub b1: f64,
    /// `B(5)`.
    pub b5: f64,
    /// `Res(1/B, 4)`.
    pub rho4: f64,
    /// `Res(B, 0) = −B(1)/W′(0)`.
    pub res_b0: f64,
    /// `Res(B, −1)`.
    pub res_b_minus1: f64,
    /// `W′(0)`.
    pub w_prime0: f64,
    /// `lim_{θ→0} Q₁(θ) = 2c₁ Res(B, 0)`.
    pub q1_at_zero: f64,
    /// `lim t⁴Q₂(t, θ)` as `θ → 0`, without the `b₁(t)` correction: `−6 Res(1/B,4) Res(B,0)`.
    pub q2_near_zero: f64,
    /// `lim t⁴θ⁵Q₂(t, θ)` as `θ → ∞`: `Res(1/B,4) B(5)`.
    pub q2_far: f64,
    /// `lim t⁴ ∂_xΛ(t, x)` as `x/t → 0`: `6c₁ Res(B, −1)`.
    pub dx_near_zero: f64,
    /// Printed form `2c₁B(1)/W′(0)` of the `Q₁` limit.
    pub printed_q1_at_zero: f64,
    /// Printed `c₂` with its explicit `1/√(2π)` removed: `−6 Res(1/B,4) B(1)/W′(0)`.
    pub printed_c2: f64,
    /// Printed `c₃` with its explicit `1/√(2π)` removed: `B(5) Res(1/B,4)`.
    pub printed_c3: f64,
}

/// Constants of the large-time expansion, computed once.
pub fn large_time_constants() -> Result<LargeTimeConstants> {
    static CONST: OnceLock<std::result::Result<LargeTimeConstants, Error>> = OnceLock::new();
    CONST
        .get_or_init(|| {
            let led = derived_constants()?;
            let ev = BEvaluator::shared();
            let w_prime0 = crate::complexfn::eval_w_prime(ZERO)?.re;
            let res_b_minus1 = ev.residue_b(-1.0)?.re;
            let c1 = -led.rho3.re;
            let (b1, b5, rho4, res_b0) = (led.b1.re, led.b5.re, led.rho4.re, led.res_b0.re);
            Ok(LargeTimeConstants {
                c1,
                b1,
                b5,
                rho4,
                res_b0,
                res_b_minus1,
                w_prime0,
                q1_at_zero: 2.0 * c1 * res_b0,
                q2_near_zero: -6.0 * rho4 * res_b0,
                q2_far: rho4 * b5,
                dx_near_zero: 6.0 * c1 * res_b_minus1,
                printed_q1_at_zero: 2.0 * c1 * b1 / w_prime0,
                printed_c2: -6.0 * rho4 * b1 / w_prime0,
                printed_c3: b5 * rho4,
            })
        })
        .clone()
}

const Q1_STEP: f64 = 0.05;
const Q1_HEIGHT: f64 = 50.0;
/// Lines for `Q₁`: left one for `θ ≤ 1`, right one for `θ > 1`; `B(s)Γ(3−s)` is analytic between.
const Q1_LINES: [f64; 2] = [0.5, 4.5];

/// `B(s)Γ(3−s)` sampled on both `Q₁` lines.
fn q1_samples() -> Result<&'static [Vec<C64>; 2]> {
    static S: OnceLock<std::result::Result<[Vec<C64>; 2], Error>> = OnceLock::new();
    S.get_or_init(|| {
        let ev = BEvaluator::shared();
        let n = (Q1_HEIGHT / Q1_STEP).round() as usize;
        let line = |c: f64| -> Result<Vec<C64>> {
            (0..=n)
                .map(|k| {
                    let s = C64::new(c, k as f64 * Q1_STEP);
                    Ok(ev.eval_b(s)? * gamma(3.0 - s)?)
                })
                .collect()
        };
        Ok([line(Q1_LINES[0])?, line(Q1_LINES[1])?])
    })
    .as_ref()
    .map_err(Clone::clone)
}

/// Large-time profile `Q₁(θ) = c₁ (1/2πi) ∫ θ^{−s} B(s) Γ(3−s) ds`.
pub fn eval_q1(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("Q₁ needs θ > 0, got {theta}")));
    }
    q1_on_line(theta, usize::from(theta > 1.0))
}

fn q1_on_line(theta: f64, idx: usize) -> Result<f64> {
    let c1 = large_time_constants()?.c1;
    let c = Q1_LINES[idx];
    let l = theta.ln();
    let mut acc = ZERO;
    for (k, g) in q1_samples()?[idx].iter().enumerate() {
        let w = if k == 0 { 0.5 } else { 1.0 };
        acc += g * (-C64::new(c, k as f64 * Q1_STEP) * l).exp() * w;
    }
    Ok(c1 * Q1_STEP / PI * acc.re)
}

/// Large-time remainder `Q₂(t, θ) = Λ(t, tθ) − t⁻³Q₁(θ)`, evaluated directly on the shifted σ-line.
pub fn eval_q2(t: f64, theta: f64) -> Result<f64> {
    if !(t > 1.0 && theta > 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("Q₂ needs t > 1 and θ > 0, got t = {t}, θ = {theta}")));
    }
    Ok(remainder_slice(t)?.direct((t * theta).ln())?.0)
}

/// Correction `b₁(t) = Res(B, 0)·(1/2πi)∫_{Re σ = 4.5} Γ(σ) t^{−σ} / B(σ) dσ` to the small-θ limit of `Q₂`.
pub fn eval_b1(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("b₁ needs t > 0, got {t}")));
    }
    let ev = BEvaluator::shared();
    let lt = t.ln();
    let mut acc = ZERO;
    let n = (Q1_HEIGHT / Q1_STEP).round() as usize;
    for k in 0..=n {
        let s = C64::new(Q1_LINES[1], k as f64 * Q1_STEP);
        let w = if k == 0 { 0.5 } else { 1.0 };
        acc += gamma(s)? * (-s * lt).exp() / ev.eval_b(s)? * w;
    }
    Ok(large_time_constants()?.res_b0 * Q1_STEP / PI * acc.re)
}

/// `Q₁(θ)` on the left and on the right contour; the two agree since `B(s)Γ(3−s)` is analytic between.
pub fn eval_q1_both_lines(theta: f64) -> Result<(f64, f64)> {
    Ok((q1_on_line(theta, 0)?, q1_on_line(theta, 1)?))
}

/// Default truncation of the small-time series.
pub const SERIES_TERMS: usize = 7;
const SERIES_RADIUS: f64 = 0.3;

/// `L_k(x)`: minus the residues of `x^{−s} Π_{j=1..k} W(s−j)` at the integers `m ≥ 2`.
pub fn series_coefficient(k: usize, x: f64) -> Result<f64> {
    if !(x > 1.0) {
        return Err(Error::Domain(format!("series coefficients need x > 1, got {x}")));
    }
    let lx = x.ln();
    let m_max = (40.0 / lx).ceil() as usize + k + 8;
    if m_max > 4000 {
        return Err(Error::Divergence(format!("x = {x} is too close to 1 for the residue sum")));
    }
    let mut acc = 0.0;
    for m in 2..=m_max {
        let r = integrate_circle(
            |s| {
                let mut p = (-s * lx).exp();
                for j in 1..=k {
                    p *= eval_w(s - j as f64)?;
                }
                Ok(p)
            },
            C64::new(m as f64, 0.0),
            SERIES_RADIUS,
            64,
        )?;
        acc -= r.value.re;
    }
    Ok(acc)
}

/// `Λ(t, x) ≈ Σ_{k=1..n} t^k/k! L_k(x)` for `x > 1`.
pub fn eval_lambda_series(t: f64, x: f64, n_terms: usize) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) || n_terms == 0 {
        return Err(Error::Domain(format!("series needs 0 < t < 1 and n ≥ 1, got t = {t}, n = {n_terms}")));
    }
    let mut sum = 0.0f64;
    let mut prev = [f64::INFINITY; 2];
    let mut coef = 1.0;
    for k in 1..=n_terms {
        coef *= t / k as f64;
        let term = coef * series_coefficient(k, x)?;
        // Single coefficients can be small by accident; compare against the last two.
        if k >= 4 && term.abs() > prev[0].max(prev[1]) && term.abs() > 1e-14 * sum.abs() {
            return Err(Error::Divergence(format!("term {k} grew to {term:e} at t = {t}, x = {x}")));
        }
        prev = [prev[1], term.abs()];
        sum += term;
    }
    Ok(sum)
}

/// `Res(1/B, −n)` at a zero of `B`.
pub fn inverse_b_residue(n: u32) -> Result<f64> {
    Ok(BEvaluator::shared().residue_inv_b(-(n as f64))?.re)
}

/// `μ(t) = Σ_{n≥6} Res(1/B, −n) tⁿ`, truncated before its smallest term.
///
/// The residues grow faster than geometrically, so the sum is asymptotic and is cut
/// where the terms start growing again.
pub fn eval_mu(t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("μ needs 0 < t < 1, got {t}")));
    }
    let mut sum = 0.0f64;
    let mut prev = f64::INFINITY;
    for n in 6..60u32 {
        let term = inverse_b_residue(n)? * t.powi(n as i32);
        if term.abs() > prev || term.abs() < 1e-17 * sum.abs() {
            break;
        }
        sum += term;
        prev = term.abs();
    }
    Ok(sum)
}

/// `∂_tΛ(t, x)`: contour value for `t > 0.55`, central difference in `t` below.
pub fn eval_dlambda_dt(t: f64, x: f64) -> Result<f64> {
    check_point(t, x)?;
    let lx = x.ln();
    if t > DIRECT_MIN_T {
        return Ok(slice(t)?.d_dt(lx)?.0);
    }
    if lx == 0.0 {
        return Err(Error::Regime("∂_tΛ is singular at x = 1 for small t".into()));
    }
    let dt = (1e-4f64).min(0.1 * t);
    let at = |tt: f64| -> Result<f64> { Ok(TimeSlice::new(tt)?.eval_auto(lx)?.value) };
    Ok((at(t + dt)? - at(t - dt)?) / (2.0 * dt))
}

/// `∂_xΛ(t, x)` for `t > 1`.
pub fn eval_dlambda_dx(t: f64, x: f64) -> Result<f64> {
    check_point(t, x)?;
    Ok(slice(t)?.d_dx(x.ln())?.0)
}

/// Green kernel `G(t, x; y) = y⁻¹ Λ(t/y, x/y)`.
pub fn eval_g(t: f64, x: f64, y: f64) -> Result<f64> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::Domain(format!("G needs y > 0, got {y}")));
    }
    Ok(eval_lambda(&LambdaQuery::new(t / y, x / y))?.value / y)
}

/// Runs `f` inside an adaptive rule, keeping the first error.
fn fallible_gk<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    let mut first_err = None;
    let r = adaptive_gk(
        |u| match f(u) {
            Ok(v) => C64::new(v, 0.0),
            Err(e) => {
                first_err.get_or_insert(e);
                ZERO
            }
        },
        a,
        b,
        4,
        rel_tol,
        abs_tol,
        400,
    );
    if let Some(e) = first_err {
        return Err(e);
    }
    Ok(r?.value.re)
}

/// `∫_a^b g(X, Λ(t, e^X)) dX` where `[a, b]` may touch `X = 0`.
///
/// For `t ≤ 0.55` the pieces next to 0 use `X = ±ℓ u^m`, `m = 1/(2t)`, which turns the
/// `|X|^{2t−1}` singularity into a smooth integrand in `u`.
fn integrate_over_log<G: Fn(f64, f64) -> f64>(ts: &TimeSlice, a: f64, b: f64, g: &G, rel_tol: f64) -> Result<f64> {
    const SINGULAR_WIDTH: f64 = 0.5;
    let lam = |x: f64| -> Result<f64> { Ok(ts.eval_auto(x)?.value) };
    let plain = |a: f64, b: f64| fallible_gk(|x| Ok(g(x, lam(x)?)), a, b, rel_tol, 1e-14);
    if ts.t > DIRECT_MIN_T || a >= SINGULAR_WIDTH || b <= -SINGULAR_WIDTH {
        let mut breaks = vec![a];
        if a < 0.0 && b > 0.0 {
            breaks.push(0.0);
        }
        breaks.push(b);
        return breaks.windows(2).map(|w| plain(w[0], w[1])).sum();
    }
    let m = 1.0 / (2.0 * ts.t);
    let near = |sign: f64, len: f64| {
        fallible_gk(
            |u| {
                if u == 0.0 {
                    return Ok(0.0);
                }
                let x = sign * len * u.powf(m);
                Ok(g(x, lam(x)?) * len * m * u.powf(m - 1.0))
            },
            0.0,
            1.0,
            rel_tol,
            1e-14,
        )
    };
    let mut total = 0.0;
    if a < 0.0 {
        let len = (-a).min(SINGULAR_WIDTH);
        total += near(-1.0, len)?;
        if -a > len {
            total += plain(a, -len)?;
        }
    }
    if b > 0.0 {
        let len = b.min(SINGULAR_WIDTH);
        total += near(1.0, len)?;
        if b > len {
            total += plain(len, b)?;
        }
    }
    Ok(total)
}

/// Lower cut in `x` for norms; below it `Λ(t, ·)` is replaced by its value at the cut.
const X_FLOOR: f64 = 1e-3;

/// `‖Λ(t)‖₁ = ∫|Λ(t, x)| dx`.
pub fn l1_norm_lambda(t: f64) -> Result<f64> {
    check_point(t, 1.0)?;
    let ts = slice(t)?;
    let lo = X_FLOOR.ln();
    let hi = (1e3 * t.max(1.0)).ln();
    let body = integrate_over_log(&ts, lo, hi, &|x: f64, l: f64| l.abs() * x.exp(), 1e-7)?;
    let floor = X_FLOOR * ts.eval_auto(lo)?.value.abs();
    Ok(body + floor)
}

/// `∫ Λ(t, x) x^{s−1} dx` for real `s ≥ 1`; equals `√(2π) U(t, s)`.
pub fn mellin_of_lambda(t: f64, s: f64) -> Result<f64> {
    check_point(t, 1.0)?;
    if !(s >= 1.0 && s < 4.0) {
        return Err(Error::Domain(format!("Mellin check needs 1 ≤ s < 4, got {s}")));
    }
    let ts = slice(t)?;
    let lo = X_FLOOR.ln();
    let hi = (1e4 * t.max(1.0)).ln();
    let body = integrate_over_log(&ts, lo, hi, &|x: f64, l: f64| l * (s * x).exp(), 1e-9)?;
    let floor = X_FLOOR.powf(s) / s * ts.eval_auto(lo)?.value;
    Ok(body + floor)
}

/// `∫_0^∞ |Q₂(t, θ)| dθ`.
pub fn q2_l1(t: f64) -> Result<f64> {
    if !(t > 1.0) {
        return Err(Error::Domain(format!("Q₂ needs t > 1, got {t}")));
    }
    let ts = remainder_slice(t)?;
    let lo = (1e-4 * t).ln();
    let hi = (1e3 * t).ln();
    let body = fallible_gk(|x| Ok(ts.direct(x)?.0.abs() * x.exp()), lo, hi, 1e-7, 1e-15)?;
    let floor = lo.exp() * ts.direct(lo)?.0.abs();
    Ok((body + floor) / t)
}

/// `∫_0^∞ |G(t, x; y)| dy = ∫_0^∞ |Λ(τ, (x/t)τ)| dτ/τ`.
pub fn green_l1(t: f64, x: f64) -> Result<f64> {
    check_point(t, x)?;
    let a = x / t;
    let tau_star = 1.0 / a;
    let lam = |tau: f64, log_x: f64| -> Result<f64> { Ok(TimeSlice::new(tau)?.eval_auto(log_x)?.value.abs() / tau) };
    // Below τ_lo the argument a·τ is under X_FLOOR and Λ is negligible there.
    let tau_lo = (X_FLOOR / a).min(0.5 * tau_star);
    let left = crate::contour::integrate_tanh_sinh(
        |u| lam(tau_star - u, (-u / tau_star).ln_1p()).unwrap_or(f64::NAN),
        tau_star - tau_lo,
        1e-5,
    )?;
    let tau_mid = 2.0 * tau_star + 1.0;
    let right = crate::contour::integrate_tanh_sinh(
        |u| lam(tau_star + u, (u / tau_star).ln_1p()).unwrap_or(f64::NAN),
        tau_mid - tau_star,
        1e-5,
    )?;
    // τ = 1/w on the outer piece; dτ/τ = dw/w.
    let outer = fallible_gk(
        |w| {
            if w == 0.0 {
                return Ok(0.0);
            }
            let tau = 1.0 / w;
            Ok(lam(tau, (a * tau).ln())? * tau / w)
        },
        0.0,
        1.0 / tau_mid,
        1e-6,
        1e-14,
    )?;
    let total = left + right + outer;
    if !total.is_finite() {
        return Err(Error::Quadrature(format!("∫|G| dy did not converge at t = {t}, x = {x}")));
    }
    Ok(total)
}

/// Smooth test function with compact support in `(0, ∞)`.
pub trait TestFunction {
    fn value(&self, x: f64) -> f64;
    fn support(&self) -> (f64, f64);
}

/// `exp(1 − 1/(1 − r²))` with `r = (x − center)/radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: f64,
    pub radius: f64,
}

impl TestFunction for Bump {
    fn value(&self, x: f64) -> f64 {
        let r = (x - self.center) / self.radius;
        if r.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - r * r)).exp()
        }
    }

    fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }
}

/// `⟨Λ(t), φ⟩`; at `t = 0` the limit value `φ(1)`.
pub fn delta_pairing<P: TestFunction>(t: f64, phi: &P) -> Result<f64> {
    let (a, b) = phi.support();
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(Error::Domain(format!("test function support ({a}, {b}) must lie in (0, ∞)")));
    }
    if t == 0.0 {
        return Ok(phi.value(1.0));
    }
    check_point(t, 1.0)?;
    let ts = slice(t)?;
    integrate_over_log(&ts, a.ln(), b.ln(), &|x: f64, l: f64| l * phi.value(x.exp()) * x.exp(), 1e-8)
}

/// `Λ(t, ·)` on `points` log-spaced nodes of `[x_min, x_max]`.
pub fn lambda_profile(t: f64, x_min: f64, x_max: f64, points: usize) -> Result<Vec<(f64, LambdaValue)>> {
    if !(x_min > 0.0 && x_max > x_min && points >= 2) {
        return Err(Error::Domain(format!("profile needs 0 < xmin < xmax and ≥ 2 points, got {x_min}, {x_max}, {points}")));
    }
    let ts = slice(t)?;
    let (l0, l1) = (x_min.ln(), x_max.ln());
    (0..points)
        .map(|i| {
            let lx = l0 + (l1 - l0) * i as f64 / (points - 1) as f64;
            Ok((lx.exp(), ts.eval_auto(lx)?))
        })
        .collect()
}

/// Bound constants of `Λ` measured by [`calibrate_lambda`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaConstants {
    /// `sup (1 + t²)‖Λ(t)‖₁`.
    pub l1: f64,
    /// `sup ∫|G(t, x; y)| dy`.
    pub green: f64,
    /// `sup t⁴ ∫|Q₂(t, θ)| dθ`.
    pub q2_l1: f64,
    /// `sup t⁴ |∂_tΛ(t, x)|` over `x < t/2`.
    pub dt_near: f64,
    /// `sup x⁴ |∂_tΛ(t, x)|` over `x > 2t`.
    pub dt_far: f64,
    /// `sup t⁴ (x/t)⁴ |∂_xΛ(t, x)|` over `x ≫ t`.
    pub dx_far: f64,
}

/// Times of the `‖Λ(t)‖₁` calibration.
pub const L1_CALIBRATION_T: [f64; 8] = [0.1, 0.3, 0.7, 1.5, 3.0, 6.0, 12.0, 24.0];
/// `(t, x)` points of the `∫|G| dy` calibration.
pub const GREEN_CALIBRATION: [(f64, f64); 6] = [(0.1, 1.0), (1.0, 1.0), (3.0, 1.0), (0.5, 2.0), (2.0, 0.5), (1.0, 5.0)];

/// Measure [`LambdaConstants`] on calibration grids disjoint from the test points,
/// scaled by [`crate::ufunc::CALIBRATION_MARGIN`].
pub fn calibrate_lambda() -> Result<LambdaConstants> {
    let mut l1 = 0.0f64;
    for t in L1_CALIBRATION_T {
        l1 = l1.max(l1_norm_lambda(t)? * (1.0 + t * t));
    }
    let mut green = 0.0f64;
    for (t, x) in GREEN_CALIBRATION {
        green = green.max(green_l1(t, x)?);
    }
    let mut q2 = 0.0f64;
    for t in [3.0f64, 4.0, 6.0] {
        q2 = q2.max(q2_l1(t)? * t.powi(4));
    }
    let (mut dt_near, mut dt_far, mut dx_far) = (0.0f64, 0.0f64, 0.0f64);
    for t in [2.0f64, 3.0, 4.0] {
        for r in [0.1, 0.2, 0.3, 0.4, 0.45] {
            dt_near = dt_near.max(t.powi(4) * eval_dlambda_dt(t, r * t)?.abs());
        }
        for r in [2.5, 4.0, 8.0, 16.0] {
            dt_far = dt_far.max((r * t).powi(4) * eval_dlambda_dt(t, r * t)?.abs());
        }
        for r in [10.0f64, 20.0, 30.0] {
            dx_far = dx_far.max(t.powi(4) * r.powi(4) * eval_dlambda_dx(t, r * t)?.abs());
        }
    }
    let m = crate::ufunc::CALIBRATION_MARGIN;
    Ok(LambdaConstants { l1: m * l1, green: m * green, q2_l1: m * q2, dt_near: m * dt_near, dt_far: m * dt_far, dx_far: m * dx_far })
}
