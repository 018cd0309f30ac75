//! The auxiliary function `B(s)`: a vertical-line representation on the strip
//! `0 < Re s < 2`, continuation by `B(s) = -W(s-1) B(s-1)`, residues of `1/B`,
//! and the constants derived from them.
//!
//! On a line `Re ρ = β` the representation reads
//! `log B(s) = i ∫ g(β+iv) [k(s-β-iv) - m(β+iv)] dv` with `g = log(-W)`,
//! `k(w) = 1/(1-e^{2πiw})` and `m(ρ) = 1/(1+e^{-2πiρ})`. Away from `v = 0` and
//! `v = Im s` the bracket tends to `[v < Im s] - [v < 0]`, so the integral is a
//! plain integral of `g` between `0` and `Im s` plus two localized windows.
//! The fast path stores `g` on a uniform grid and sums the trapezoid rule with
//! prefix sums outside the windows.
//!
//! The representation changes by `-g(1/2)` when `β` crosses `1/2` (a pole of
//! `m`), and by `-g(3/2)` at `3/2`. Values are normalized to the `β < 1/2` line.

use crate::complexfn::{eval_w, eval_w_prime, eval_w_second, gamma};
use crate::contour::{adaptive_gk, integrate_circle};
use crate::error::{Error, Result};
use crate::C64;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::{OnceLock, RwLock};

/// Abscissas of the precomputed lines.
pub const LINE_ABSCISSAS: [f64; 3] = [0.2, 0.7, 1.2];
/// Grid step of the stored `log(-W)` samples.
pub const LINE_STEP: f64 = 0.02;
/// Half width of the windows where the kernel is summed exactly.
const WINDOW: f64 = 8.0;
/// Minimal distance between `Re s` and the kernel poles on the chosen line.
const MIN_GAP: f64 = 0.2;
/// Real parts handled by the stored lines.
const FAST_LO: f64 = 0.4;
const FAST_HI: f64 = 1.9;
/// Radius of the Cauchy circles used around integer points.
const INTEGER_RADIUS: f64 = 0.02;
/// Guard radius around poles.
pub const POLE_GUARD: f64 = 1e-6;
/// Nominal tolerance recorded with cached values.
pub const NOMINAL_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `log(-W(ρ))`, principal branch.
pub fn log_minus_w(rho: C64) -> Result<C64> {
    let w = eval_w(rho)?;
    if w.norm() == 0.0 {
        return Err(Error::Pole { value: format!("{rho}"), pole: "zero of W".into(), distance: 0.0 });
    }
    Ok((-w).ln())
}

/// `k(w) = 1/(1-e^{2πiw})` with its first two derivatives, overflow free.
fn kernel_k(w: C64, derivs: bool) -> [C64; 3] {
    let two_pi_i = c(0.0, 2.0 * PI);
    let (q, upper) = if w.im > 0.0 { ((two_pi_i * w).exp(), true) } else { ((-two_pi_i * w).exp(), false) };
    let one = c(1.0, 0.0);
    let inv = (one - q).inv();
    let k = if upper { inv } else { -q * inv };
    if !derivs {
        return [k, C64::default(), C64::default()];
    }
    let k1 = two_pi_i * q * inv * inv;
    let sign = if upper { 1.0 } else { -1.0 };
    let k2 = two_pi_i * two_pi_i * q * (one + q) * inv * inv * inv * sign;
    [k, k1, k2]
}

/// `m(ρ) = 1/(1+e^{-2πiρ})`, overflow free.
fn kernel_m(rho: C64) -> C64 {
    let two_pi_i = c(0.0, 2.0 * PI);
    if rho.im < 0.0 {
        (c(1.0, 0.0) + (-two_pi_i * rho).exp()).inv()
    } else {
        let d = (two_pi_i * rho).exp();
        d / (c(1.0, 0.0) + d)
    }
}

/// Offset restoring the `β < 1/2` normalization for a line at `beta`.
pub fn line_offset(beta: f64) -> Result<C64> {
    let mut off = C64::default();
    if beta > 0.5 {
        off += log_minus_w(c(0.5, 0.0))?;
    }
    if beta > 1.5 {
        off += log_minus_w(c(1.5, 0.0))?;
    }
    Ok(off)
}

fn check_line(beta: f64) -> Result<()> {
    let near_m_pole = (beta - 0.5).abs() < 1e-3 || (beta - 1.5).abs() < 1e-3;
    if !(beta > 0.0 && beta < 2.0) || near_m_pole {
        return Err(Error::Domain(format!("line abscissa {beta} must lie in (0,2) away from 1/2 and 3/2")));
    }
    Ok(())
}

/// `log B(s)` from the line at `beta` by adaptive quadrature.
///
/// Requires `beta < Re s < beta + 1`. Used for real parts the stored lines do
/// not cover and as an independent check of the fast path.
pub fn log_b_adaptive(s: C64, beta: f64) -> Result<C64> {
    check_line(beta)?;
    if !(s.re > beta && s.re < beta + 1.0) {
        return Err(Error::Domain(format!("need {beta} < Re s < {} (Re s = {})", beta + 1.0, s.re)));
    }
    let reach = 12.0;
    let lo = s.im.min(0.0) - reach;
    let hi = s.im.max(0.0) + reach;
    let mut err = None;
    let mut f = |v: f64| -> C64 {
        let rho = c(beta, v);
        match log_minus_w(rho) {
            Ok(g) => g * (kernel_k(s - rho, false)[0] - kernel_m(rho)),
            Err(e) => {
                err.get_or_insert(e);
                C64::default()
            }
        }
    };
    // Split at the two places where the bracket switches.
    let mut cuts = vec![lo, 0.0_f64.min(s.im), 0.0_f64.max(s.im), hi];
    cuts.dedup();
    let mut total = C64::default();
    for w in cuts.windows(2) {
        let pieces = ((w[1] - w[0]) / 4.0).ceil().max(1.0) as usize;
        total += adaptive_gk(&mut f, w[0], w[1], pieces, 1e-13, 1e-14, 50_000)?.value;
    }
    if let Some(e) = err {
        return Err(e);
    }
    Ok(c(0.0, 1.0) * total + line_offset(beta)?)
}

/// Samples of `log(-W)` on the line `Re ρ = beta`, `v = j·step` for `j ≥ 0`.
#[derive(Debug, Clone)]
pub struct BLine {
    pub beta: f64,
    pub step: f64,
    offset: C64,
    g: Vec<C64>,
    /// `prefix[j] = Σ_{i<j} g[i]`.
    prefix: Vec<C64>,
}

impl BLine {
    pub fn new(beta: f64, step: f64) -> Result<Self> {
        check_line(beta)?;
        let mut line = BLine { beta, step, offset: line_offset(beta)?, g: Vec::new(), prefix: vec![C64::default()] };
        line.ensure(WINDOW + 1.0)?;
        Ok(line)
    }

    /// Largest `|v|` covered.
    pub fn reach(&self) -> f64 {
        (self.g.len() as f64 - 1.0) * self.step
    }

    /// Extend the samples to cover `|v| ≤ vmax`.
    pub fn ensure(&mut self, vmax: f64) -> Result<()> {
        let need = (vmax / self.step).ceil() as usize + 2;
        if need <= self.g.len() {
            return Ok(());
        }
        // Grow geometrically so repeated requests stay cheap.
        let target = need.max(self.g.len() * 3 / 2);
        self.g.reserve(target - self.g.len());
        for j in self.g.len()..target {
            let g = log_minus_w(c(self.beta, j as f64 * self.step))?;
            if let Some(prev) = self.g.last() {
                if (g.im - prev.im).abs() >= PI {
                    return Err(Error::Quadrature(format!(
                        "arg(-W) jumps by {:.3} between nodes near v = {} on Re = {}",
                        g.im - prev.im,
                        j as f64 * self.step,
                        self.beta
                    )));
                }
            }
            let last = *self.prefix.last().expect("prefix starts with zero");
            self.g.push(g);
            self.prefix.push(last + g);
        }
        Ok(())
    }

    fn g_at(&self, j: i64) -> C64 {
        if j >= 0 {
            self.g[j as usize]
        } else {
            self.g[(-j) as usize].conj()
        }
    }

    /// `Σ_{a ≤ j < b} g_j` for any integer range.
    fn sum_range(&self, a: i64, b: i64) -> C64 {
        if a >= b {
            return C64::default();
        }
        let pos = |lo: i64, hi: i64| self.prefix[hi as usize] - self.prefix[lo as usize];
        let mut total = C64::default();
        if a < 0 {
            // g_{-i} = conj(g_i) for the negative indices.
            let nb = b.min(0);
            total += pos(1 - nb, 1 - a).conj();
        }
        if b > 0 {
            total += pos(a.max(0), b);
        }
        total
    }

    /// Whether `s` is admissible for this line.
    pub fn admits(&self, s: C64) -> bool {
        s.re - self.beta >= MIN_GAP && self.beta + 1.0 - s.re >= MIN_GAP
    }

    /// `[log B(s), d/ds log B, d²/ds² log B]`; derivatives only if requested.
    pub fn log_b(&self, s: C64, derivs: bool) -> Result<[C64; 3]> {
        if !self.admits(s) {
            return Err(Error::Domain(format!("Re s = {} too close to the kernel poles of line {}", s.re, self.beta)));
        }
        let h = self.step;
        let half = (WINDOW / h).ceil() as i64;
        let js = (s.im / h).round() as i64;
        let top = half.max(js.abs() + half) as usize;
        if top + 1 >= self.g.len() {
            return Err(Error::Domain(format!("line at {} not extended to |v| = {}", self.beta, s.im.abs() + WINDOW)));
        }
        let (a0, a1) = (-half, half + 1);
        let (s0, s1) = (js - half, js + half + 1);
        let mut window = C64::default();
        let mut d1 = C64::default();
        let mut d2 = C64::default();
        let mut term = |j: i64, in_s: bool| {
            let rho = c(self.beta, j as f64 * h);
            let g = self.g_at(j);
            let k = kernel_k(s - rho, derivs && in_s);
            window += g * (k[0] - kernel_m(rho));
            if derivs && in_s {
                d1 += g * k[1];
                d2 += g * k[2];
            }
        };
        let plateau;
        if s1 <= a0 || s0 >= a1 {
            for j in a0..a1 {
                term(j, false);
            }
            for j in s0..s1 {
                term(j, true);
            }
            // Between the windows the bracket is +1 for 0 < v < Im s and -1 for Im s < v < 0.
            plateau = if js > 0 { self.sum_range(a1, s0) } else { -self.sum_range(s1, a0) };
        } else {
            let lo = a0.min(s0);
            let hi = a1.max(s1);
            for j in lo..hi {
                term(j, j >= s0 && j < s1);
            }
            plateau = C64::default();
        }
        let i_h = c(0.0, h);
        Ok([i_h * (window + plateau) + self.offset, i_h * d1, i_h * d2])
    }
}

/// Pick the stored line best suited to `Re s`.
fn line_index(re: f64) -> Option<usize> {
    let mut best = None;
    let mut best_gap = MIN_GAP;
    for (i, &b) in LINE_ABSCISSAS.iter().enumerate() {
        let gap = (re - b).min(b + 1.0 - re);
        if gap >= best_gap {
            best_gap = gap;
            best = Some(i);
        }
    }
    best
}

/// Abscissa used by the adaptive path for `Re s` in `(0, 2)`.
fn adaptive_beta(re: f64) -> f64 {
    if re <= 0.8 {
        0.5 * re
    } else if re < 1.6 {
        re - 0.5
    } else {
        1.15 + 0.5 * (re - 1.6)
    }
}

/// Real part after the walk into `[FAST_LO, FAST_HI]`.
fn reduced_re(mut re: f64) -> f64 {
    while re > FAST_HI {
        re -= 1.0;
    }
    while re < FAST_LO {
        re += 1.0;
    }
    re
}

/// Value and first two log-derivatives of `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BJet {
    pub value: C64,
    /// `B'/B`.
    pub dlog: C64,
    /// `(log B)''`.
    pub d2log: C64,
}

type CacheKey = (i64, i64);

fn cache_key(s: C64) -> CacheKey {
    ((s.re * 1e12).round() as i64, (s.im * 1e12).round() as i64)
}

/// Evaluator of `B` with stored lines and a value cache.
#[derive(Debug)]
pub struct BEvaluator {
    lines: RwLock<Vec<BLine>>,
    cache: RwLock<HashMap<CacheKey, (C64, f64)>>,
}

impl BEvaluator {
    pub fn new() -> Result<Self> {
        let lines = LINE_ABSCISSAS.iter().map(|&b| BLine::new(b, LINE_STEP)).collect::<Result<Vec<_>>>()?;
        Ok(BEvaluator { lines: RwLock::new(lines), cache: RwLock::new(HashMap::new()) })
    }

    /// Process-wide evaluator.
    pub fn shared() -> &'static BEvaluator {
        static SHARED: OnceLock<BEvaluator> = OnceLock::new();
        SHARED.get_or_init(|| BEvaluator::new().expect("stored lines build"))
    }

    /// Extend every stored line to `|Im| ≤ vmax`.
    pub fn reserve(&self, vmax: f64) -> Result<()> {
        let need = vmax + WINDOW + 1.0;
        if self.lines.read().expect("lines lock").iter().all(|l| l.reach() >= need) {
            return Ok(());
        }
        let mut lines = self.lines.write().expect("lines lock");
        for l in lines.iter_mut() {
            l.ensure(need)?;
        }
        Ok(())
    }

    fn strip_fast(&self, s: C64, derivs: bool) -> Result<[C64; 3]> {
        let i = line_index(s.re).ok_or_else(|| Error::Domain(format!("no stored line admits Re s = {}", s.re)))?;
        self.reserve(s.im.abs())?;
        self.lines.read().expect("lines lock")[i].log_b(s, derivs)
    }

    /// `B(s)` for `0 < Re s < 2` from the line representation.
    pub fn eval_b_strip(&self, s: C64) -> Result<C64> {
        if !(s.re > 0.0 && s.re < 2.0) {
            return Err(Error::Domain(format!("strip evaluation needs 0 < Re s < 2, got {}", s.re)));
        }
        if s.re >= FAST_LO && line_index(s.re).is_some() {
            Ok(self.strip_fast(s, false)?[0].exp())
        } else {
            Ok(log_b_adaptive(s, adaptive_beta(s.re))?.exp())
        }
    }

    /// `B(s)` from the line at a caller-chosen abscissa.
    pub fn eval_b_strip_with(&self, s: C64, beta: f64) -> Result<C64> {
        Ok(log_b_adaptive(s, beta)?.exp())
    }

    /// Walk `s` into `[FAST_LO, FAST_HI]` with the functional equation.
    fn walk(&self, s: C64, derivs: bool) -> Result<BJet> {
        let mut z = s;
        let mut mult = c(1.0, 0.0);
        let mut d1 = C64::default();
        let mut d2 = C64::default();
        let mut log_terms = |arg: C64, sign: f64| -> Result<()> {
            if derivs {
                let w = eval_w(arg)?;
                let r1 = eval_w_prime(arg)? / w;
                let r2 = eval_w_second(arg)? / w - r1 * r1;
                d1 += r1 * sign;
                d2 += r2 * sign;
            }
            Ok(())
        };
        while z.re > FAST_HI {
            let w = eval_w(z - 1.0)?;
            mult *= -w;
            log_terms(z - 1.0, 1.0)?;
            z -= 1.0;
        }
        while z.re < FAST_LO {
            let w = eval_w(z)?;
            let dw = eval_w_prime(z)?;
            if w.norm() <= POLE_GUARD * dw.norm() {
                return Err(Error::Pole {
                    value: format!("{s}"),
                    pole: format!("{}", s - (z - w / dw)),
                    distance: (w / dw).norm(),
                });
            }
            mult /= -w;
            log_terms(z, -1.0)?;
            z += 1.0;
        }
        let [lb, b1, b2] = self.strip_fast(z, derivs)?;
        let value = mult * lb.exp();
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::Pole { value: format!("{s}"), pole: "unknown".into(), distance: 0.0 });
        }
        Ok(BJet { value, dlog: b1 + d1, d2log: b2 + d2 })
    }

    /// `B(s)` near an integer `n` by the Cauchy formula on a small circle,
    /// adding back the measured residue at `n`.
    fn near_integer(&self, s: C64, n: f64) -> Result<C64> {
        let center = c(n, 0.0);
        let res = integrate_circle(|z| self.walk(z, false).map(|j| j.value), center, INTEGER_RADIUS, 32)?.value;
        let dist = (s - center).norm();
        let scale = self.walk(center + INTEGER_RADIUS, false)?.value.norm().max(1.0);
        let is_pole = res.norm() > 1e-10 * scale;
        if is_pole && dist < POLE_GUARD {
            return Err(Error::Pole { value: format!("{s}"), pole: format!("{n}"), distance: dist });
        }
        if dist == 0.0 {
            return Ok(integrate_circle(|z| self.walk(z, false).map(|j| j.value / (z - center)), center, INTEGER_RADIUS, 32)?
                .value);
        }
        let regular = integrate_circle(|z| self.walk(z, false).map(|j| j.value / (z - s)), center, INTEGER_RADIUS, 32)?.value;
        Ok(if is_pole { regular + res / (s - center) } else { regular })
    }

    /// `B(s)` anywhere off its poles.
    pub fn eval_b(&self, s: C64) -> Result<C64> {
        let key = cache_key(s);
        if let Some(&(v, _)) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(v);
        }
        let n = s.re.round();
        let near_int = (s - c(n, 0.0)).norm() < 1e-3;
        let value = match self.walk(s, false) {
            Ok(j) => j.value,
            Err(Error::Pole { .. }) if near_int => self.near_integer(s, n)?,
            Err(e) => return Err(e),
        };
        let beta = line_index(reduced_re(s.re)).map_or(f64::NAN, |i| LINE_ABSCISSAS[i]);
        self.cache.write().expect("cache lock").insert(key, (value, beta));
        Ok(value)
    }

    /// `B(s)` with `B'/B` and `(log B)''`, for points where the walk is regular.
    pub fn eval_b_jet(&self, s: C64) -> Result<BJet> {
        self.walk(s, true)
    }

    /// `Res(1/B, sigma)` by circle quadrature.
    pub fn residue_inv_b(&self, sigma: f64) -> Result<C64> {
        let radius = if sigma < 0.5 { INTEGER_RADIUS } else { 0.1 };
        let center = c(sigma, 0.0);
        Ok(integrate_circle(|z| self.eval_b(z).map(|b| b.inv()), center, radius, 64)?.value)
    }

    /// `Res(B, sigma)` by circle quadrature.
    pub fn residue_b(&self, sigma: f64) -> Result<C64> {
        let radius = if sigma < 0.5 { INTEGER_RADIUS } else { 0.1 };
        Ok(integrate_circle(|z| self.eval_b(z), c(sigma, 0.0), radius, 64)?.value)
    }

    /// Number of cached values.
    pub fn cache_len(&self) -> usize {
        self.cache.read().expect("cache lock").len()
    }

    /// Write the cache as little-endian records
    /// `(re, im, beta, tol, val_re, val_im)`, sorted by key.
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let cache = self.cache.read().expect("cache lock");
        let mut keys: Vec<&CacheKey> = cache.keys().collect();
        keys.sort();
        let mut buf = Vec::with_capacity(keys.len() * 48);
        for k in keys {
            let (v, beta) = cache[k];
            for x in [k.0 as f64 * 1e-12, k.1 as f64 * 1e-12, beta, NOMINAL_TOL, v.re, v.im] {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        std::fs::File::create(path)?.write_all(&buf)?;
        Ok(())
    }

    /// Merge records from a cache file; returns the number of records read.
    pub fn load_cache(&self, path: &Path) -> Result<usize> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        if buf.len() % 48 != 0 {
            return Err(Error::Cache(format!("file length {} is not a multiple of 48", buf.len())));
        }
        let mut cache = self.cache.write().expect("cache lock");
        let read = |rec: &[u8], i: usize| f64::from_le_bytes(rec[8 * i..8 * i + 8].try_into().expect("8 bytes"));
        for rec in buf.chunks_exact(48) {
            let s = c(read(rec, 0), read(rec, 1));
            let v = c(read(rec, 4), read(rec, 5));
            if !(s.re.is_finite() && s.im.is_finite() && v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Cache("non-finite record".into()));
            }
            cache.insert(cache_key(s), (v, read(rec, 2)));
        }
        Ok(buf.len() / 48)
    }

    /// Residues and constants used by the large-time and large-x expansions.
    pub fn derived_constants(&self) -> Result<ResidueLedger> {
        let one = c(1.0, 0.0);
        let b1 = self.eval_b(one)?;
        let b5 = self.eval_b(c(5.0, 0.0))?;
        let w1 = eval_w(one)?;
        let wp2 = eval_w_prime(c(2.0, 0.0))?;
        let wp0 = eval_w_prime(C64::default())?;
        let sqrt_2pi = (2.0 * PI).sqrt();
        let rho3 = self.residue_inv_b(3.0)?;
        let rho4 = self.residue_inv_b(4.0)?;
        let res_b0 = self.residue_b(0.0)?;
        let mut p = Vec::new();
        let mut q = Vec::new();
        for n in 0..=5u32 {
            let center = c(-(n as f64), 0.0);
            let pn = integrate_circle(|z| Ok(gamma(z)? / self.eval_b(z)?), center, INTEGER_RADIUS, 64)?.value;
            let qn = integrate_circle(|z| Ok(gamma(z + 1.0)? / self.eval_b(z)?), center, INTEGER_RADIUS, 64)?.value;
            p.push(Cplx::from(pn));
            q.push(Cplx::from(qn));
        }
        Ok(ResidueLedger {
            b1: b1.into(),
            b5: b5.into(),
            rho3: rho3.into(),
            rho4: rho4.into(),
            res_b0: res_b0.into(),
            c1: (-(b1 * w1 * wp2).inv()).into(),
            c2: (-rho4 * 6.0 / sqrt_2pi * b1 / wp0).into(),
            c3: (b5 / sqrt_2pi * rho4).into(),
            p,
            q,
        })
    }
}

/// Serializable complex number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Cplx {
    fn from(z: C64) -> Self {
        Cplx { re: z.re, im: z.im }
    }
}

impl From<Cplx> for C64 {
    fn from(z: Cplx) -> Self {
        C64::new(z.re, z.im)
    }
}

/// Residues of `B` and `1/B` with the expansion constants built from them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidueLedger {
    pub b1: Cplx,
    pub b5: Cplx,
    /// `Res(1/B, 3)`.
    pub rho3: Cplx,
    /// `Res(1/B, 4)`.
    pub rho4: Cplx,
    /// `Res(B, 0)`.
    pub res_b0: Cplx,
    pub c1: Cplx,
    pub c2: Cplx,
    pub c3: Cplx,
    /// `Res(Γ(ω)/B(ω), -n)` for n = 0..=5.
    pub p: Vec<Cplx>,
    /// `Res(Γ(ω+1)/B(ω), -n)` for n = 0..=5.
    pub q: Vec<Cplx>,
}

/// `B(s)` from the shared evaluator.
pub fn eval_b(s: C64) -> Result<C64> {
    BEvaluator::shared().eval_b(s)
}

/// `B(s)` on the strip from the shared evaluator.
pub fn eval_b_strip(s: C64) -> Result<C64> {
    BEvaluator::shared().eval_b_strip(s)
}

/// `Res(1/B, sigma)` from the shared evaluator.
pub fn residue_inv_b(sigma: f64) -> Result<C64> {
    BEvaluator::shared().residue_inv_b(sigma)
}

/// Ledger from the shared evaluator.
pub fn derived_constants() -> Result<ResidueLedger> {
    BEvaluator::shared().derived_constants()
}
