//! Thin wrappers that turn library calls into CSV and JSON text.

use std::fmt::Write as _;
use std::path::Path;

use fundsol::bfunc::{derived_constants, eval_b, Cplx};
use fundsol::cauchy::{solve_profile_with, InitialDatum, SuperpositionControls};
use fundsol::complexfn::{digamma, eval_w, eval_w_prime, gamma, log_gamma, trigamma};
use fundsol::kernels::{eval_h, eval_k, eval_m};
use fundsol::kinetic::{evolve, EvolveControls, LogGrid, Tails};
use fundsol::lambda::{eval_lambda, lambda_profile, LambdaQuery, RadialProfile, Regime};
use fundsol::ufunc::{check_u_ode, eval_u};
use fundsol::C64;
use serde_json::json;

use crate::error::CliError;

/// Shortest decimal that reads back to the same `f64`.
pub fn fmt(x: f64) -> String {
    format!("{x:?}")
}

fn json_line(v: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

/// `xmin,xmax,n`.
pub fn parse_grid(spec: &str) -> Result<LogGrid, CliError> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let bad = || CliError::Usage(format!("--grid expects `xmin,xmax,n`, got `{spec}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let x_min: f64 = parts[0].parse().map_err(|_| bad())?;
    let x_max: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    Ok(LogGrid::new(x_min, x_max, n)?)
}

/// Comma-separated times.
pub fn parse_times(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|p| p.trim().parse().map_err(|_| CliError::Usage(format!("--snap expects comma-separated times, got `{spec}`"))))
        .collect()
}

pub fn special_eval(name: &str, re: f64, im: f64) -> Result<String, CliError> {
    let z = C64::new(re, im);
    let v = match name {
        "W" => eval_w(z)?,
        "Wp" => eval_w_prime(z)?,
        "gamma" => gamma(z)?,
        "loggamma" => log_gamma(z)?,
        "digamma" => digamma(z)?,
        "trigamma" => trigamma(z)?,
        _ => return Err(CliError::Usage(format!("unknown function `{name}`; expected W, Wp, gamma, loggamma, digamma, trigamma"))),
    };
    Ok(json_line(json!({ "fn": name, "s": Cplx::from(z), "value": Cplx::from(v) })))
}

pub fn kernel_eval(which: &str, x: f64, y: Option<f64>) -> Result<String, CliError> {
    let need_y = || y.ok_or_else(|| CliError::Usage(format!("kernel {which} needs --y")));
    let v = match which {
        "K" => eval_k(x, need_y()?)?,
        "M" => eval_m(x, need_y()?)?,
        "H" => eval_h(x)?,
        _ => return Err(CliError::Usage(format!("unknown kernel `{which}`; expected K, H, M"))),
    };
    Ok(json_line(json!({ "kernel": which, "x": x, "y": y, "value": v })))
}

pub fn bfunc_eval(re: f64, im: f64) -> Result<String, CliError> {
    let s = C64::new(re, im);
    Ok(json_line(json!({ "s": Cplx::from(s), "value": Cplx::from(eval_b(s)?) })))
}

pub fn bfunc_constants() -> Result<String, CliError> {
    Ok(json_line(serde_json::to_value(derived_constants()?).expect("ledger serializes")))
}

pub fn ufunc_eval(t: f64, re: f64, im: f64) -> Result<String, CliError> {
    let s = C64::new(re, im);
    let u = eval_u(t, s)?;
    Ok(json_line(json!({ "t": t, "s": Cplx::from(s), "value": Cplx::from(u.value), "err": u.err })))
}

pub fn ufunc_verify_ode(t: f64, re: f64, im: f64, dt: f64) -> Result<String, CliError> {
    let s = C64::new(re, im);
    Ok(json_line(json!({ "t": t, "s": Cplx::from(s), "dt": dt, "residual": check_u_ode(t, s, dt)? })))
}

pub fn lambda_eval(t: f64, x: f64, regime: &str) -> Result<String, CliError> {
    let regime: Regime = regime.parse()?;
    let v = eval_lambda(&LambdaQuery { t, x, regime })?;
    Ok(json_line(json!({ "t": t, "x": x, "lambda": v.value, "err": v.err, "regime": v.regime })))
}

/// CSV `t,x,lambda,err,regime`.
pub fn lambda_profile_csv(t: f64, x_min: f64, x_max: f64, points: usize) -> Result<String, CliError> {
    let mut out = String::from("t,x,lambda,err,regime\n");
    for (x, v) in lambda_profile(t, x_min, x_max, points)? {
        writeln!(out, "{},{},{},{},{}", fmt(t), fmt(x), fmt(v.value), fmt(v.err), v.regime.as_str()).expect("string write");
    }
    Ok(out)
}

fn parse_tails(name: &str) -> Result<Tails, CliError> {
    match name {
        "zero" => Ok(Tails::default()),
        "constant" => Ok(Tails::constant()),
        _ => Err(CliError::Usage(format!("unknown tails `{name}`; expected zero or constant"))),
    }
}

/// Final profile CSV `x,u` and trajectory CSV `t,x,u` of the direct solver.
pub struct DirectOutput {
    pub profile: String,
    pub trajectory: String,
}

pub fn direct_solve(grid: &LogGrid, f0: &Path, t_end: f64, snaps: &[f64], tails: &str, threads: usize) -> Result<DirectOutput, CliError> {
    let datum = InitialDatum::from_csv(f0)?;
    let u0 = RadialProfile::new(grid.nodes.clone(), grid.nodes.iter().map(|&x| datum.value(x)).collect(), 0.0)?;
    if !(t_end > 0.0) {
        return Err(CliError::Usage(format!("--t-end must be positive, got {t_end}")));
    }
    // The trajectory starts from the initial state.
    let mut times: Vec<f64> = snaps.iter().copied().filter(|&t| t > 0.0 && t < t_end).collect();
    times.extend([0.0, t_end]);
    times.sort_by(f64::total_cmp);
    times.dedup();
    let controls = EvolveControls { snapshots: times, tails: parse_tails(tails)?, threads: Some(threads), ..Default::default() };
    let states = evolve(&u0, &controls)?;
    let mut trajectory = String::from("t,x,u\n");
    for st in &states {
        for (x, u) in st.profile.grid.iter().zip(&st.profile.values) {
            writeln!(trajectory, "{},{},{}", fmt(st.tau), fmt(*x), fmt(*u)).expect("string write");
        }
    }
    let last = &states.last().expect("t_end is a snapshot").profile;
    Ok(DirectOutput { profile: profile_csv(last), trajectory })
}

fn profile_csv(p: &RadialProfile) -> String {
    let mut out = String::from("x,u\n");
    for (x, u) in p.grid.iter().zip(&p.values) {
        writeln!(out, "{},{}", fmt(*x), fmt(*u)).expect("string write");
    }
    out
}

pub fn cauchy_solve(t: f64, f0: &Path, grid: &LogGrid, threads: usize) -> Result<String, CliError> {
    let datum = InitialDatum::from_csv(f0)?;
    let c = SuperpositionControls { threads: Some(threads), ..Default::default() };
    Ok(profile_csv(&solve_profile_with(t, grid, &datum, &c)?))
}
