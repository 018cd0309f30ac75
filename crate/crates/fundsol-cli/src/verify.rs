//! Invariant suites behind `fundsol verify`.

use std::str::FromStr;

use fundsol::bfunc::eval_b;
use fundsol::calibration::frozen;
use fundsol::cauchy::{solve_profile_with, InitialDatum, SuperpositionControls};
use fundsol::complexfn::{asymptote_check, eval_w, residue_w};
use fundsol::kernels::check_w_mellin;
use fundsol::kinetic::{evolve, multiplier_check, EvolveControls, LogGrid, TailPolicy, Tails};
use fundsol::lambda::{
    delta_pairing, eval_lambda, eval_q1, eval_q2, green_l1, l1_norm_lambda, large_time_constants, near_one_leading, q2_l1,
    slice, Bump, LambdaQuery, RadialProfile, Regime, TestFunction,
};
use fundsol::ufunc::{bromwich_u, check_u_ode, check_v_functional, envelope, envelope_grid, eval_u, SQRT_2PI};
use fundsol::C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::CliError;

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `measured ≤ bound`.
    fn at_most(name: &str, measured: f64, bound: f64) -> Self {
        Check { name: name.into(), measured, bound, pass: measured <= bound }
    }

    /// Passes when `measured ≥ bound`.
    fn at_least(name: &str, measured: f64, bound: f64) -> Self {
        Check { name: name.into(), measured, bound, pass: measured >= bound }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Special,
    Bfunc,
    Ufunc,
    Lambda,
    Solver,
    All,
}

impl FromStr for Suite {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "special" => Suite::Special,
            "bfunc" => Suite::Bfunc,
            "ufunc" => Suite::Ufunc,
            "lambda" => Suite::Lambda,
            "solver" => Suite::Solver,
            "all" => Suite::All,
            _ => return Err(CliError::Usage(format!("unknown suite `{s}`"))),
        })
    }
}

/// Checks that fail by construction: the bound they test disagrees with the closed forms
/// the library is built on. Each has a unit test asserting the measured behaviour instead.
pub const KNOWN_FAILURES: [&str; 5] = [
    "special.asymptote_scaled",
    "bfunc.strip_modulus_min",
    "bfunc.strip_modulus_at_500",
    "lambda.q1_limit_printed",
    "lambda.q2_near_printed",
];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Run a suite; `threads` bounds the parallelism of the solver checks.
pub fn run(suite: Suite, threads: usize) -> Result<Vec<Check>, CliError> {
    Ok(match suite {
        Suite::Special => special()?,
        Suite::Bfunc => bfunc()?,
        Suite::Ufunc => ufunc()?,
        Suite::Lambda => lambda()?,
        Suite::Solver => solver(threads)?,
        Suite::All => {
            let mut all = special()?;
            all.extend(bfunc()?);
            all.extend(ufunc()?);
            all.extend(lambda()?);
            all.extend(solver(threads)?);
            all
        }
    })
}

/// The report as pretty JSON with a trailing newline.
pub fn to_json(report: &[Check]) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("checks serialize");
    s.push('\n');
    s
}

fn special() -> Result<Vec<Check>, CliError> {
    let mut out = vec![
        Check::at_most("special.w_at_0", eval_w(c(0.0, 0.0))?.norm(), 1e-10),
        Check::at_most("special.w_at_2", eval_w(c(2.0, 0.0))?.norm(), 1e-10),
        Check::at_most("special.residue_at_4", (residue_w(4.0, 0.1)?.norm() - 4.0).abs(), 1e-6),
        Check::at_most("special.residue_at_minus_2", (residue_w(-2.0, 0.1)?.norm() - 4.0).abs(), 1e-6),
    ];
    // |s| times the residual against the large-|s| form, over |Im s| ≥ 50.
    let mut worst = 0.0f64;
    for v in [50.0, 100.0, 200.0, 500.0, 1000.0] {
        for s in [c(1.0, v), c(0.5, -v)] {
            worst = worst.max(asymptote_check(s)? * s.norm());
        }
    }
    out.push(Check::at_most("special.asymptote_scaled", worst, 5.0));
    for (tag, s) in [("0.5", c(0.5, 0.0)), ("1", c(1.0, 0.0)), ("1.5", c(1.5, 0.0)), ("2", c(2.0, 0.0)), ("0.5+3i", c(0.5, 3.0))] {
        out.push(Check::at_most(&format!("special.mellin_identity_{tag}"), check_w_mellin(s)?, 1e-7));
    }
    Ok(out)
}

fn bfunc() -> Result<Vec<Check>, CliError> {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let s = c(rng.gen_range(1.001..1.999), rng.gen_range(-200.0..200.0));
        let l = eval_b(s)?;
        let r = -eval_w(s - 1.0)? * eval_b(s - 1.0)?;
        worst = worst.max((l - r).norm() / l.norm());
    }
    let b25 = eval_b(c(2.5, 0.0))?.norm();
    let mut out = vec![
        Check::at_most("bfunc.functional_equation", worst, 1e-8),
        Check::at_most("bfunc.zero_at_3", eval_b(c(3.0, 0.0))?.norm() / b25, 1e-6),
        Check::at_most("bfunc.zero_at_4", eval_b(c(4.0, 0.0))?.norm() / b25, 1e-6),
    ];
    let moduli: Vec<f64> =
        [5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0].iter().map(|&v| Ok(eval_b(c(1.0, v))?.norm())).collect::<Result<_, CliError>>()?;
    out.push(Check::at_least("bfunc.strip_modulus_min", moduli.iter().copied().fold(f64::INFINITY, f64::min), 0.2));
    out.push(Check::at_most("bfunc.strip_modulus_max", moduli.iter().copied().fold(0.0, f64::max), 5.0));
    out.push(Check::at_most("bfunc.strip_modulus_at_500", (moduli[moduli.len() - 1] - 1.0).abs(), 0.1));
    Ok(out)
}

fn ufunc() -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    // Linear extrapolation to t = 0 from t = 1e-3 and 1e-4.
    let mut worst = 0.0f64;
    for s in [c(1.0, 0.0), c(1.5, 2.0)] {
        let (a, b) = (eval_u(1e-3, s)?.value, eval_u(1e-4, s)?.value);
        let at0 = (10.0 * b - a) / 9.0;
        worst = worst.max((at0 - 1.0 / SQRT_2PI).norm());
    }
    out.push(Check::at_most("ufunc.small_time_limit", worst, 1e-6));
    let ode = [(0.5, c(1.5, 0.0)), (2.0, c(1.2, 5.0)), (1.0, c(1.5, 0.0)), (0.3, c(1.8, 2.0)), (1.5, c(1.3, -3.0)), (3.0, c(1.1, 10.0))];
    let mut worst = 0.0f64;
    for (t, s) in ode {
        worst = worst.max(check_u_ode(t, s, 1e-4)?);
    }
    out.push(Check::at_most("ufunc.delay_equation", worst, 1e-6));
    let mut worst = 0.0f64;
    for (t, s) in envelope_grid() {
        worst = worst.max(eval_u(t, s)?.value.norm() / envelope(t, s));
    }
    out.push(Check::at_most("ufunc.decay_envelope", worst, frozen().envelope.grid));
    let laplace = [(c(1.0, 0.0), c(1.5, 0.0)), (c(2.0, 3.0), c(1.2, 0.0)), (c(0.5, -1.0), c(1.7, 2.0)), (c(3.0, 0.5), c(1.05, -4.0)), (c(0.2, 6.0), c(1.9, 1.0))];
    let mut worst = 0.0f64;
    for (z, s) in laplace {
        worst = worst.max(check_v_functional(z, s)?);
    }
    out.push(Check::at_most("ufunc.laplace_functional_equation", worst, 1e-7));
    let mut worst = 0.0f64;
    for (s, d) in [(c(1.5, 0.0), [0.6, 1.2]), (c(1.2, 2.0), [0.3, 0.9])] {
        worst = worst.max((bromwich_u(1.0, s, d[0])? - bromwich_u(1.0, s, d[1])?).norm());
    }
    out.push(Check::at_most("ufunc.bromwich_line_independence", worst, 1e-6));
    Ok(out)
}

fn near_one_sup(t: f64) -> Result<f64, CliError> {
    let ts = slice(t)?;
    let mut sup = 0.0f64;
    for y in [-2.0, -1.5, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 1.5, 2.0] {
        let lx = (y * (-1.0 / t).exp()).ln_1p();
        sup = sup.max((ts.eval_auto(lx)?.value / near_one_leading(t, lx) - 1.0).abs());
    }
    Ok(sup)
}

fn lambda() -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    for t in [0.51, 0.55, 0.59] {
        let ts = slice(t)?;
        for x in [0.5f64, 2.0, 5.0] {
            let a = ts.eval(x.ln(), Regime::Direct)?;
            let b = ts.eval(x.ln(), Regime::LogRegularized)?;
            worst = worst.max((a.value - b.value).abs() / (a.err + b.err));
        }
    }
    out.push(Check::at_most("lambda.overlap_in_combined_error", worst, 1.0));
    let mut worst = 0.0f64;
    for t in [1.5f64, 2.0, 4.0] {
        for theta in [0.1, 1.0, 10.0] {
            let direct = eval_lambda(&LambdaQuery { t, x: t * theta, regime: Regime::Direct })?.value;
            worst = worst.max((direct - t.powi(-3) * eval_q1(theta)? - eval_q2(t, theta)?).abs());
        }
    }
    out.push(Check::at_most("lambda.large_time_decomposition", worst, 1e-6));
    let k = large_time_constants()?;
    out.push(Check::at_most("lambda.q1_limit_printed", (eval_q1(1e-3)? / k.printed_q1_at_zero - 1.0).abs(), 0.01));
    out.push(Check::at_most("lambda.q1_tail", (eval_q1(1e3)? / eval_q1(1.0)?).abs(), 1e-10));
    let t = 2.0f64;
    out.push(Check::at_most("lambda.q2_near_printed", (eval_q2(t, 1e-3)? / (k.printed_c2 * t.powi(-4)) - 1.0).abs(), 0.2));
    let far = k.printed_c3 * t.powi(-4) * 50f64.powi(-5);
    out.push(Check::at_most("lambda.q2_far_printed", (eval_q2(t, 50.0)? / far - 1.0).abs(), 0.2));
    out.push(Check::at_most("lambda.q2_l1", q2_l1(t)?, frozen().lambda.q2_l1 * t.powi(-4)));
    let sups = [near_one_sup(0.1)?, near_one_sup(0.05)?, near_one_sup(0.02)?];
    out.push(Check::at_most("lambda.near_one_sup", sups[2], 0.2));
    out.push(Check::at_most("lambda.near_one_decrease_ratio", (sups[1] / sups[0]).max(sups[2] / sups[1]), 1.0));
    let bump = Bump { center: 1.0, radius: 0.5 };
    let pairing = delta_pairing(0.02, &bump)?;
    out.push(Check::at_most("lambda.delta_pairing", (pairing - bump.value(1.0)).abs() / bump.value(1.0), 0.05));
    let mut worst = 0.0f64;
    for t in [0.2f64, 0.5, 1.0, 2.0, 4.0, 8.0] {
        worst = worst.max(l1_norm_lambda(t)? * (1.0 + t * t));
    }
    out.push(Check::at_most("lambda.l1_envelope", worst, frozen().lambda.l1));
    let mut worst = 0.0f64;
    for (t, x) in [(0.2, 1.0), (0.7, 1.5), (1.5, 0.8), (4.0, 1.0), (0.5, 3.0), (2.0, 2.0)] {
        worst = worst.max(green_l1(t, x)?);
    }
    out.push(Check::at_most("lambda.green_l1", worst, frozen().lambda.green));
    Ok(out)
}

/// `∫|p − q| dx` by the trapezoid rule on the shared nodes.
fn l1_gap(p: &RadialProfile, q: &[f64]) -> f64 {
    let d: Vec<f64> = p.values.iter().zip(q).map(|(a, b)| (a - b).abs()).collect();
    p.grid.windows(2).zip(d.windows(2)).map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1])).sum()
}

fn solver(threads: usize) -> Result<Vec<Check>, CliError> {
    let f0 = InitialDatum::bump(1.0, 0.5, 1.0)?;
    let norm = f0.l1_norm();
    let t = 0.3;
    let sc = SuperpositionControls { threads: Some(threads), ..Default::default() };
    let mut gaps = Vec::new();
    for n in [512, 1024] {
        let grid = LogGrid::new(1e-3, 1e3, n)?;
        let u0 = RadialProfile::new(grid.nodes.clone(), grid.nodes.iter().map(|&x| f0.value(x)).collect(), 0.0)?;
        let ec = EvolveControls { snapshots: vec![t], threads: Some(threads), ..Default::default() };
        let direct = evolve(&u0, &ec)?.pop().expect("one snapshot").profile;
        let sup = solve_profile_with(t, &grid, &f0, &sc)?;
        gaps.push(l1_gap(&direct, &sup.values) / norm);
    }
    let mut out = vec![
        Check::at_most("solver.cross_validation_512", gaps[0], 0.02),
        Check::at_most("solver.cross_validation_refinement", gaps[1] / gaps[0], 0.5),
    ];
    // A constant lower continuation carries the small-x plateau.
    let grid = LogGrid::new(1e-3, 1e3, 512)?;
    let u0 = RadialProfile::new(grid.nodes.clone(), grid.nodes.iter().map(|&x| f0.value(x)).collect(), 0.0)?;
    let tails = Tails { lower: TailPolicy::Power(0.0), upper: TailPolicy::Zero };
    let snapshots = (0..=6).map(|k| 0.05 * k as f64).collect();
    let traj = evolve(&u0, &EvolveControls { snapshots, tails, threads: Some(threads), ..Default::default() })?;
    for s in [1.5, 2.0, 2.5] {
        out.push(Check::at_most(&format!("solver.multiplier_law_{s:?}"), multiplier_check(&traj, c(s, 0.0))?, 0.01));
    }
    Ok(out)
}
