use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fundsol::bfunc::BEvaluator;
use fundsol_cli::commands::{self, parse_grid, parse_times};
use fundsol_cli::verify::{self, Suite};
use fundsol_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "fundsol", version, about = "Fundamental solution of a linearized three-wave kinetic equation")]
struct Cli {
    /// Configuration file; defaults to $FUNDSOL_CONFIG, then ./fundsol.conf.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Special functions.
    Special {
        #[command(subcommand)]
        op: SpecialOp,
    },
    /// Collision kernels.
    Kernel {
        #[command(subcommand)]
        op: KernelOp,
    },
    /// The multiplicative solution B.
    Bfunc {
        #[command(subcommand)]
        op: BfuncOp,
    },
    /// The Mellin symbol U.
    Ufunc {
        #[command(subcommand)]
        op: UfuncOp,
    },
    /// The fundamental solution.
    Lambda {
        #[command(subcommand)]
        op: LambdaOp,
    },
    /// Direct time stepping on a log grid.
    Direct {
        #[command(subcommand)]
        op: DirectOp,
    },
    /// Superposition solution of the initial value problem.
    Cauchy {
        #[command(subcommand)]
        op: CauchyOp,
    },
    /// Run an invariant suite and print a JSON report.
    Verify {
        /// special, bfunc, ufunc, lambda, solver, or all.
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SpecialOp {
    Eval {
        #[arg(long = "fn")]
        name: String,
        #[arg(long, allow_hyphen_values = true)]
        re: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        im: f64,
    },
}

#[derive(Subcommand)]
enum KernelOp {
    Eval {
        #[arg(long)]
        which: String,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: Option<f64>,
    },
}

#[derive(Subcommand)]
enum BfuncOp {
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        re: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        im: f64,
    },
    Constants,
}

#[derive(Subcommand)]
enum UfuncOp {
    Eval {
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        s_re: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        s_im: f64,
    },
    VerifyOde {
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        s_re: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        s_im: f64,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
    },
}

#[derive(Subcommand)]
enum LambdaOp {
    Eval {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value = "auto")]
        regime: String,
    },
    Profile {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        xmin: f64,
        #[arg(long)]
        xmax: f64,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DirectOp {
    Solve {
        /// `xmin,xmax,n`.
        #[arg(long)]
        grid: String,
        /// CSV with header `y,f0`.
        #[arg(long)]
        f0: PathBuf,
        #[arg(long)]
        t_end: f64,
        /// Extra snapshot times for the trajectory.
        #[arg(long)]
        snap: Option<String>,
        /// zero or constant.
        #[arg(long, default_value = "zero")]
        tails: String,
        /// Final profile CSV `x,u`; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trajectory CSV `t,x,u`.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CauchyOp {
    Solve {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        f0: PathBuf,
        #[arg(long, default_value = "1e-3,1e3,200")]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Write to the resolved path, or return the text for stdout.
fn emit(cfg: &RunConfig, out: Option<&Path>, text: String) -> Result<Option<String>, CliError> {
    match out {
        Some(p) => {
            let path = cfg.output_path(p);
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text)?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

/// Returns the stdout text and whether every check passed.
fn run(cli: Cli, cfg: &RunConfig) -> Result<(Option<String>, bool), CliError> {
    let text = match cli.command {
        Command::Special { op: SpecialOp::Eval { name, re, im } } => commands::special_eval(&name, re, im)?,
        Command::Kernel { op: KernelOp::Eval { which, x, y } } => commands::kernel_eval(&which, x, y)?,
        Command::Bfunc { op: BfuncOp::Eval { re, im } } => commands::bfunc_eval(re, im)?,
        Command::Bfunc { op: BfuncOp::Constants } => commands::bfunc_constants()?,
        Command::Ufunc { op: UfuncOp::Eval { t, s_re, s_im } } => commands::ufunc_eval(t, s_re, s_im)?,
        Command::Ufunc { op: UfuncOp::VerifyOde { t, s_re, s_im, dt } } => commands::ufunc_verify_ode(t, s_re, s_im, dt)?,
        Command::Lambda { op: LambdaOp::Eval { t, x, regime } } => commands::lambda_eval(t, x, &regime)?,
        Command::Lambda { op: LambdaOp::Profile { t, xmin, xmax, points, out } } => {
            return Ok((emit(cfg, out.as_deref(), commands::lambda_profile_csv(t, xmin, xmax, points)?)?, true));
        }
        Command::Direct { op: DirectOp::Solve { grid, f0, t_end, snap, tails, out, trajectory } } => {
            let snaps = snap.as_deref().map(parse_times).transpose()?.unwrap_or_default();
            let r = commands::direct_solve(&parse_grid(&grid)?, &f0, t_end, &snaps, &tails, cfg.threads)?;
            if let Some(p) = trajectory {
                emit(cfg, Some(&p), r.trajectory)?;
            }
            return Ok((emit(cfg, out.as_deref(), r.profile)?, true));
        }
        Command::Cauchy { op: CauchyOp::Solve { t, f0, grid, out } } => {
            return Ok((emit(cfg, out.as_deref(), commands::cauchy_solve(t, &f0, &parse_grid(&grid)?, cfg.threads)?)?, true));
        }
        Command::Verify { suite, out } => {
            let report = verify::run(suite.parse::<Suite>()?, cfg.threads)?;
            let pass = report.iter().all(|c| c.pass);
            return Ok((emit(cfg, out.as_deref(), verify::to_json(&report))?, pass));
        }
    };
    Ok((Some(text), true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::load(cli.config.as_deref()).and_then(|cfg| {
        if let Some(p) = cfg.cache_path.as_ref().filter(|p| p.exists()) {
            BEvaluator::shared().load_cache(p)?;
        }
        let r = run(cli, &cfg)?;
        if let Some(p) = &cfg.cache_path {
            BEvaluator::shared().save_cache(p)?;
        }
        Ok(r)
    });
    match result {
        Ok((text, pass)) => {
            if let Some(t) = text {
                print!("{t}");
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("fundsol: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
