//! The Mellin symbol `U(t, s)` of the fundamental solution, its derivatives,
//! the Laplace-side function `V(z, s)`, and the decay envelopes.
//!
//! `U(t, s) = B(s)/√(2π) · (1/2πi) ∫_{Re σ = β} t^{-(σ-s)} Γ(σ-s) / B(σ) dσ`
//! with `β > Re s`. Moving the line left of `Re s` crosses the pole of `Γ` at
//! `σ = s` and gives the small-time form `U = 1/√(2π) + (same integral on β' < Re s)`.
//! Both integrals are summed by the trapezoid rule, which converges
//! geometrically because the integrand is analytic in a strip around the line
//! and decays like `e^{-π|Im σ|/2}`.

use crate::bfunc::BEvaluator;
use crate::complexfn::{digamma, eval_w, log_gamma, trigamma, EULER_GAMMA};
use crate::error::{Error, Result};
use crate::C64;
use std::f64::consts::PI;

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
/// Base of the decay envelope `e^{-2t log|b s|}`.
pub fn envelope_base() -> f64 {
    (0.5 * EULER_GAMMA).exp() / 2.0
}

/// Below this time the small-time form is used.
pub const SMALL_T: f64 = 0.05;
/// Step of the σ-line trapezoid rule for point values.
const POINT_STEP: f64 = 0.05;
/// Half width of the σ window; `Γ` has decayed by `e^{-π·30/2}` at its edge.
const SIGMA_HALF_WIDTH: f64 = 30.0;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A value of `U` with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolSample {
    pub t: f64,
    pub s: C64,
    pub value: C64,
    pub err: f64,
}

/// Which integral representation of `U` to use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Representation {
    /// Line right of `Re s`.
    Large { beta: f64 },
    /// Line left of `Re s`, with the residue `1/√(2π)` added.
    Small { beta: f64 },
}

impl Representation {
    pub fn beta(&self) -> f64 {
        match *self {
            Representation::Large { beta } | Representation::Small { beta } => beta,
        }
    }

    /// Default representation for `(t, Re s)`.
    pub fn auto(t: f64, re_s: f64) -> Self {
        if t < SMALL_T {
            Representation::Small { beta: (re_s - 0.5).max(0.5 * re_s) }
        } else if t >= 1.0 && re_s + 1.5 <= 2.6 {
            Representation::Large { beta: re_s + 1.5 }
        } else {
            Representation::Large { beta: (re_s + 0.5).min(0.5 * (re_s + 3.0)) }
        }
    }

    fn validate(&self, s: C64) -> Result<()> {
        match *self {
            Representation::Large { beta } => {
                if !(beta > s.re && beta < 3.0) {
                    return Err(Error::Domain(format!("line {beta} must lie in (Re s, 3) = ({}, 3)", s.re)));
                }
            }
            Representation::Small { beta } => {
                if !(beta > 0.0 && beta > s.re - 1.0 && beta < s.re) {
                    return Err(Error::Domain(format!("line {beta} must lie in (max(0, Re s - 1), Re s) for Re s = {}", s.re)));
                }
            }
        }
        Ok(())
    }
}

/// Trapezoid sums over the σ-line: `[J, ∂_s J, ∂²_s J, ∂_t J]` where
/// `J = (1/2π) ∫ t^{-(σ-s)} Γ(σ-s)/B(σ) dv`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SigmaSums {
    pub j: C64,
    pub js: C64,
    pub jss: C64,
    pub jt: C64,
}

/// Weights `t^{-w} Γ(w)` with `ln t - ψ(w)` and `ψ'(w)` at `w = σ - s`.
#[derive(Debug, Clone, Copy)]
struct GammaWeight {
    a: C64,
    l_minus_psi: C64,
    trig: C64,
    w: C64,
}

fn gamma_weight(t: f64, w: C64, derivs: bool) -> Result<GammaWeight> {
    let lt = t.ln();
    let a = (log_gamma(w)? - w * lt).exp();
    if !derivs {
        return Ok(GammaWeight { a, l_minus_psi: C64::default(), trig: C64::default(), w });
    }
    Ok(GammaWeight { a, l_minus_psi: c(lt, 0.0) - digamma(w)?, trig: trigamma(w)?, w })
}

fn accumulate(sums: &mut SigmaSums, g: &GammaWeight, inv_b: C64, t: f64, derivs: bool) {
    let base = g.a * inv_b;
    sums.j += base;
    if derivs {
        sums.js += base * g.l_minus_psi;
        sums.jss += base * (g.l_minus_psi * g.l_minus_psi + g.trig);
        sums.jt += base * (-g.w / t);
    }
}

fn scale(sums: SigmaSums, f: f64) -> SigmaSums {
    SigmaSums { j: sums.j * f, js: sums.js * f, jss: sums.jss * f, jt: sums.jt * f }
}

/// σ-line sums for a single `s` with step `h`.
fn point_sums(ev: &BEvaluator, t: f64, s: C64, beta: f64, h: f64, derivs: bool) -> Result<SigmaSums> {
    let n = (SIGMA_HALF_WIDTH / h).ceil() as i64;
    ev.reserve(s.im.abs() + SIGMA_HALF_WIDTH + 1.0)?;
    let mut sums = SigmaSums::default();
    for k in -n..=n {
        let sigma = c(beta, s.im + k as f64 * h);
        let g = gamma_weight(t, sigma - s, derivs)?;
        accumulate(&mut sums, &g, ev.eval_b(sigma)?.inv(), t, derivs);
    }
    Ok(scale(sums, h / (2.0 * PI)))
}

/// `U` and its derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolJet {
    pub u: C64,
    pub du_ds: C64,
    pub d2u_ds2: C64,
    pub du_dt: C64,
    pub err: f64,
}

fn assemble(b: &crate::bfunc::BJet, sums: &SigmaSums, small: bool) -> SymbolJet {
    let k = b.value / SQRT_2PI;
    let mut u = k * sums.j;
    if small {
        u += 1.0 / SQRT_2PI;
    }
    let du_ds = k * (b.dlog * sums.j + sums.js);
    let d2u_ds2 = k * ((b.d2log + b.dlog * b.dlog) * sums.j + b.dlog * sums.js * 2.0 + sums.jss);
    SymbolJet { u, du_ds, d2u_ds2, du_dt: k * sums.jt, err: 0.0 }
}

fn check_args(t: f64, s: C64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t = {t} must be a finite nonnegative number")));
    }
    if !(s.re > 0.0 && s.re < 2.0 - 1e-6) {
        return Err(Error::Domain(format!("Re s = {} must lie in (0, 2)", s.re)));
    }
    Ok(())
}

/// `U` and derivatives with an explicit representation.
pub fn eval_u_jet_with(t: f64, s: C64, rep: Representation) -> Result<SymbolJet> {
    check_args(t, s)?;
    if t == 0.0 {
        return Ok(SymbolJet { u: c(1.0 / SQRT_2PI, 0.0), du_ds: C64::default(), d2u_ds2: C64::default(), du_dt: C64::default(), err: 0.0 });
    }
    rep.validate(s)?;
    let ev = BEvaluator::shared();
    let bj = ev.eval_b_jet(s)?;
    let small = matches!(rep, Representation::Small { .. });
    let fine = assemble(&bj, &point_sums(ev, t, s, rep.beta(), POINT_STEP, true)?, small);
    let coarse = assemble(&bj, &point_sums(ev, t, s, rep.beta(), 2.0 * POINT_STEP, false)?, small);
    Ok(SymbolJet { err: (fine.u - coarse.u).norm(), ..fine })
}

/// `U` and derivatives with the default representation.
pub fn eval_u_jet(t: f64, s: C64) -> Result<SymbolJet> {
    eval_u_jet_with(t, s, Representation::auto(t, s.re))
}

/// `U(t, s)` from a line right of `Re s`.
pub fn eval_u(t: f64, s: C64) -> Result<SymbolSample> {
    let rep = match Representation::auto(t, s.re) {
        r @ Representation::Large { .. } => r,
        Representation::Small { .. } => Representation::Large { beta: (s.re + 0.5).min(0.5 * (s.re + 3.0)) },
    };
    eval_u_with_line(t, s, rep.beta())
}

/// `U(t, s)` from the line `Re σ = beta > Re s`.
pub fn eval_u_with_line(t: f64, s: C64, beta: f64) -> Result<SymbolSample> {
    if !(s.re < 2.0 - 1e-6) {
        return Err(Error::Domain(format!("no admissible line: Re s = {} ≥ 2", s.re)));
    }
    let j = eval_u_jet_with(t, s, Representation::Large { beta })?;
    Ok(SymbolSample { t, s, value: j.u, err: j.err })
}

/// `U(t, s)` from the small-time form on the line `Re σ = beta < Re s`.
pub fn eval_u_small_t_with_line(t: f64, s: C64, beta: f64) -> Result<SymbolSample> {
    let j = eval_u_jet_with(t, s, Representation::Small { beta })?;
    Ok(SymbolSample { t, s, value: j.u, err: j.err })
}

/// `U(t, s)` from the small-time form with the default line.
pub fn eval_u_small_t(t: f64, s: C64) -> Result<SymbolSample> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Domain(format!("small-time form needs t in [0, 1), got {t}")));
    }
    eval_u_small_t_with_line(t, s, (s.re - 0.5).max(0.5 * s.re))
}

/// `∂U/∂s`.
pub fn eval_du_ds(t: f64, s: C64) -> Result<C64> {
    Ok(eval_u_jet(t, s)?.du_ds)
}

/// `|central difference of ∂U/∂t − W(s−1) U(t, s−1)|`.
pub fn check_u_ode(t: f64, s: C64, dt: f64) -> Result<f64> {
    if !(s.re > 1.0 && s.re < 2.0) {
        return Err(Error::Domain(format!("the delay equation is checked for Re s in (1, 2), got {}", s.re)));
    }
    if !(dt > 0.0 && t > dt) {
        return Err(Error::Domain("need 0 < dt < t".into()));
    }
    let rep = Representation::auto(t, s.re);
    let up = eval_u_jet_with(t + dt, s, rep)?.u;
    let dn = eval_u_jet_with(t - dt, s, rep)?.u;
    let lhs = (up - dn) / (2.0 * dt);
    let rhs = eval_w(s - 1.0)? * eval_u_jet(t, s - 1.0)?.u;
    Ok((lhs - rhs).norm())
}

/// `e^{-2t log|b s|}`.
pub fn envelope(t: f64, s: C64) -> f64 {
    (-2.0 * t * (envelope_base() * s.norm()).ln()).exp()
}

/// `log(-z)` with `Arg(-z) ∈ (-2π, 0]`.
pub fn log_minus_z(z: C64) -> Result<C64> {
    if z.norm() == 0.0 {
        return Err(Error::Domain("log(-z) at z = 0".into()));
    }
    let mut arg = (-z).arg();
    if arg > 0.0 {
        arg -= 2.0 * PI;
    }
    Ok(c(z.norm().ln(), arg))
}

/// Precomputed σ-line for `V(·, s)`, reusable across `z`.
///
/// `V(z, s) = B(s)/(√(2π) z) ∫_{Re σ = β} e^{(σ-s) log(-z)} / (B(σ)(1 - e^{2πi(s-σ)})) dσ`
/// is the Laplace transform of `U(·, s)`: with `w = σ - s` the integrand equals
/// `z^w / (2i sin πw)`, and `∫ e^{-zt} t^{-w} Γ(w) dt = π z^{w-1} / sin(πw)`.
/// There is no `1/(2πi)` in front of the integral, and a line below `Re s`
/// misses the residue at `σ = s`, which contributes `1/(√(2π) z)`.
#[derive(Debug, Clone)]
pub struct LaplaceLine {
    pub s: C64,
    pub beta: f64,
    nodes: Vec<C64>,
    weights: Vec<C64>,
}

/// Step and half width of the σ-line for `V`.
const V_STEP: f64 = 0.05;
const V_HALF_WIDTH: f64 = 55.0;

impl LaplaceLine {
    /// Line at `beta` with `Re s - 1 < beta < Re s`.
    pub fn with_line(s: C64, beta: f64) -> Result<Self> {
        if !(s.re > 0.0 && s.re < 2.0) {
            return Err(Error::Domain(format!("V needs Re s in (0, 2), got {}", s.re)));
        }
        if !(beta > s.re - 1.0 && beta < s.re && beta > -1.0) {
            return Err(Error::Domain(format!("line {beta} must satisfy Re s - 1 < beta < Re s")));
        }
        let ev = BEvaluator::shared();
        ev.reserve(s.im.abs() + V_HALF_WIDTH + 1.0)?;
        let bs = ev.eval_b(s)?;
        let n = (V_HALF_WIDTH / V_STEP).ceil() as i64;
        let two_pi_i = c(0.0, 2.0 * PI);
        let mut nodes = Vec::with_capacity(2 * n as usize + 1);
        let mut weights = Vec::with_capacity(2 * n as usize + 1);
        for k in -n..=n {
            let sigma = c(beta, s.im + k as f64 * V_STEP);
            let e = (two_pi_i * (s - sigma)).exp();
            let kernel = if e.norm() < 1.0 { (c(1.0, 0.0) - e).inv() } else { -(e.inv()) / (c(1.0, 0.0) - e.inv()) };
            // Poles of B are zeros of the integrand.
            let inv_b = match ev.eval_b(sigma) {
                Ok(b) => b.inv(),
                Err(Error::Pole { .. }) => C64::default(),
                Err(e) => return Err(e),
            };
            weights.push(bs / SQRT_2PI * c(0.0, V_STEP) * kernel * inv_b);
            nodes.push(sigma - s);
        }
        Ok(LaplaceLine { s, beta, nodes, weights })
    }

    pub fn new(s: C64) -> Result<Self> {
        Self::with_line(s, s.re - 0.45)
    }

    /// `V(z, s)` for `Re z > 0`.
    pub fn eval(&self, z: C64) -> Result<C64> {
        if !(z.re > 0.0) {
            return Err(Error::Domain(format!("V needs Re z > 0, got {}", z.re)));
        }
        let lz = log_minus_z(z)?;
        let mut acc = C64::default();
        for (w, d) in self.weights.iter().zip(&self.nodes) {
            acc += w * (d * lz).exp();
        }
        Ok((acc + 1.0 / SQRT_2PI) / z)
    }
}

/// `V(z, s)`.
pub fn eval_v(z: C64, s: C64) -> Result<C64> {
    LaplaceLine::new(s)?.eval(z)
}

/// `|z V(z, s) − W(s−1) V(z, s−1) − 1/√(2π)|`.
pub fn check_v_functional(z: C64, s: C64) -> Result<f64> {
    if !(s.re > 1.0 && s.re < 2.0) {
        return Err(Error::Domain(format!("the functional equation of V is checked for Re s in (1, 2), got {}", s.re)));
    }
    let lhs = z * eval_v(z, s)?;
    let rhs = eval_w(s - 1.0)? * eval_v(z, s - 1.0)? + 1.0 / SQRT_2PI;
    Ok((lhs - rhs).norm())
}

/// `U(t, s)` by numerical inversion of the Laplace transform on `Re z = d`.
///
/// The known large-`z` terms `1/(√(2π) z)` and `W(s−1)/(√(2π) z²)` are inverted
/// in closed form; the remainder decays like `|z|^{-3}` and is summed on `|Im z| ≤ 400`.
pub fn bromwich_u(t: f64, s: C64, d: f64) -> Result<C64> {
    if !(t > 0.0 && d > 0.0) {
        return Err(Error::Domain("Laplace inversion needs t > 0 and d > 0".into()));
    }
    let line = LaplaceLine::new(s)?;
    let w1 = eval_w(s - 1.0)?;
    let step = 0.1_f64.min(0.5 / t.max(1.0));
    let reach = 400.0;
    let n = (reach / step).ceil() as i64;
    let mut acc = C64::default();
    for k in -n..=n {
        let z = c(d, k as f64 * step);
        let r = line.eval(z)? - (c(1.0, 0.0) + w1 / z) / (SQRT_2PI * z);
        acc += r * (z * t).exp();
    }
    Ok((c(1.0, 0.0) + w1 * t) / SQRT_2PI + acc * step / (2.0 * PI))
}

/// Samples of `F = √(2π) U` and its derivatives on the line `Re s = c`,
/// `s_k = c + i k h` for `k = 0..=k_max`.
#[derive(Debug, Clone)]
pub struct SymbolProfile {
    pub t: f64,
    pub c: f64,
    pub h: f64,
    pub f: Vec<C64>,
    pub f_s: Vec<C64>,
    pub f_t: Vec<C64>,
    /// Rough error bound of the sampled values.
    pub err: f64,
}

/// `t`-independent data for symbol profiles on `Re s = c`.
#[derive(Debug, Clone)]
pub struct ProfileBasis {
    pub c: f64,
    pub h: f64,
    pub k_max: usize,
    b_jets: Vec<crate::bfunc::BJet>,
    /// `1/B(β + i j h)` for `j = 0..=k_max + n` on each line.
    lines: Vec<(f64, Vec<C64>)>,
}

impl ProfileBasis {
    /// Basis for `0 ≤ Im s ≤ v_max` with step `h`.
    pub fn new(abscissa: f64, h: f64, v_max: f64) -> Result<Self> {
        Self::with_lines(abscissa, h, v_max, &[])
    }

    /// Basis with additional σ-lines right of `abscissa`, e.g. beyond zeros of `B`.
    pub fn with_lines(abscissa: f64, h: f64, v_max: f64, extra: &[f64]) -> Result<Self> {
        if !(abscissa > 0.0 && abscissa < 1.5) {
            return Err(Error::Domain(format!("profile abscissa {abscissa} must lie in (0, 1.5)")));
        }
        let ev = BEvaluator::shared();
        let k_max = (v_max / h).ceil() as usize;
        let n = (SIGMA_HALF_WIDTH / h).ceil() as usize;
        ev.reserve(k_max as f64 * h + SIGMA_HALF_WIDTH + 2.0)?;
        let b_jets = (0..=k_max).map(|k| ev.eval_b_jet(c(abscissa, k as f64 * h))).collect::<Result<Vec<_>>>()?;
        let mut lines = Vec::new();
        let mut betas = Self::betas(abscissa);
        for &b in extra {
            if !(b > abscissa && b < 5.0) || betas.iter().any(|x| (x - b).abs() < 1e-12) {
                return Err(Error::Domain(format!("extra line {b} must lie in ({abscissa}, 5) and be new")));
            }
            betas.push(b);
        }
        for beta in betas {
            let inv = (0..=k_max + n).map(|j| ev.eval_b(c(beta, j as f64 * h)).map(|b| b.inv())).collect::<Result<Vec<_>>>()?;
            lines.push((beta, inv));
        }
        Ok(ProfileBasis { c: abscissa, h, k_max, b_jets, lines })
    }

    fn betas(c: f64) -> Vec<f64> {
        let mut v = vec![(c - 0.5).max(0.5 * c), c + 0.5];
        if c + 1.5 <= 2.6 {
            v.push(c + 1.5);
        }
        v
    }

    /// Largest sampled `Im s`.
    pub fn v_max(&self) -> f64 {
        self.k_max as f64 * self.h
    }

    /// Profile of `F`, `∂_s F`, `∂_t F` at time `t > 0`.
    pub fn profile(&self, t: f64) -> Result<SymbolProfile> {
        self.profile_upto(t, self.k_max)
    }

    /// Profile on the default line, sampled for `k ≤ k_end`.
    pub fn profile_upto(&self, t: f64, k_end: usize) -> Result<SymbolProfile> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("profile needs t > 0, got {t}")));
        }
        self.profile_on_line(t, Representation::auto(t, self.c).beta(), k_end)
    }

    /// Profile from the stored line `beta`; a line left of `c` uses the small-time form.
    /// Lines right of a zero of `B` give the symbol with that residue removed.
    pub fn profile_on_line(&self, t: f64, beta: f64, k_end: usize) -> Result<SymbolProfile> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("profile needs t > 0, got {t}")));
        }
        let small = beta < self.c;
        let (beta, inv) = self
            .lines
            .iter()
            .find(|(b, _)| (*b - beta).abs() < 1e-12)
            .ok_or_else(|| Error::Domain(format!("line {beta} is not stored in this basis")))?;
        let k_end = k_end.min(self.k_max);
        let h = self.h;
        let n = (SIGMA_HALF_WIDTH / h).ceil() as i64;
        let d = beta - self.c;
        let weights = (-n..=n).map(|m| gamma_weight(t, c(d, m as f64 * h), true)).collect::<Result<Vec<_>>>()?;
        let inv_at = |j: i64| if j >= 0 { inv[j as usize] } else { inv[(-j) as usize].conj() };
        let mut f = Vec::with_capacity(k_end + 1);
        let mut f_s = Vec::with_capacity(k_end + 1);
        let mut f_t = Vec::with_capacity(k_end + 1);
        for k in 0..=k_end as i64 {
            let mut sums = SigmaSums::default();
            for (i, g) in weights.iter().enumerate() {
                accumulate(&mut sums, g, inv_at(k + i as i64 - n), t, true);
            }
            let jet = assemble(&self.b_jets[k as usize], &scale(sums, h / (2.0 * PI)), small);
            f.push(jet.u * SQRT_2PI);
            f_s.push(jet.du_ds * SQRT_2PI);
            f_t.push(jet.du_dt * SQRT_2PI);
        }
        // Geometric convergence of the trapezoid rule: error ≈ e^{-2π·dist/h},
        // where dist is the distance from the line to the nearest pole.
        let pole_gap = [3.0, 4.0, 5.0].iter().map(|z| (z - beta).abs()).fold(d.abs(), f64::min);
        let dist = pole_gap.min(0.5);
        let err = (-2.0 * PI * dist / h).exp() * t.powf(-d.abs()).max(1.0) * 10.0;
        Ok(SymbolProfile { t, c: self.c, h, f, f_s, f_t, err })
    }
}

/// Envelope constants measured by [`calibrate_envelopes`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnvelopeConstants {
    /// `|U(1, s)| ≤ C e^{-2 log|bs|}` for `|s| ≥ 10`, measured at `|s| = 10`.
    pub point: f64,
    /// `|U(t, s)| ≤ C_T e^{-2t log|bs|}` on the `T = 1` grid.
    pub grid: f64,
    /// `(1+|s|)|∂_s U| ≤ C t e^{-2t log|bs|}` on the same grid.
    pub derivative: f64,
    /// `|U(t, 1) − 1/√(2π)| ≤ C t^{1/2}` for `t ∈ [0.01, 0.05]` on the line `0.5`.
    pub small_t: f64,
}

/// Safety factor applied to measured envelope ratios.
pub const CALIBRATION_MARGIN: f64 = 1.1;

/// The `10 × 10` grid `t ∈ [0.1, 1]`, `|Im s| ∈ [5, 200]` (geometric) at `Re s = 1`.
pub fn envelope_grid() -> Vec<(f64, C64)> {
    let mut out = Vec::with_capacity(100);
    for i in 0..10 {
        let t = 0.1 * (i + 1) as f64;
        for j in 0..10 {
            out.push((t, c(1.0, 5.0 * 40f64.powf(j as f64 / 9.0))));
        }
    }
    out
}

/// Measure the envelope constants, scaled by [`CALIBRATION_MARGIN`].
pub fn calibrate_envelopes() -> Result<EnvelopeConstants> {
    let s10 = c(1.0, 99f64.sqrt());
    let point = eval_u(1.0, s10)?.value.norm() / envelope(1.0, s10);
    let (mut grid, mut derivative) = (0.0f64, 0.0f64);
    for (t, s) in envelope_grid() {
        let jet = eval_u_jet(t, s)?;
        grid = grid.max(jet.u.norm() / envelope(t, s));
        derivative = derivative.max((1.0 + s.norm()) * jet.du_ds.norm() / (t * envelope(t, s)));
    }
    let mut small_t = 0.0f64;
    for t in [0.01, 0.02, 0.03, 0.04, 0.05] {
        let u = eval_u_small_t_with_line(t, c(1.0, 0.0), 0.5)?.value;
        small_t = small_t.max((u - 1.0 / SQRT_2PI).norm() / t.sqrt());
    }
    let m = CALIBRATION_MARGIN;
    Ok(EnvelopeConstants { point: m * point, grid: m * grid, derivative: m * derivative, small_t: m * small_t })
}
