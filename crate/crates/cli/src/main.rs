//! `rdna`: rate-distortion curves, matched JSCC simulations and
//! excess-distortion tables from the command line.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{resolve_seed, CliError, Grid, UsizeList, SEED_ENV};
use output::Format;

#[derive(Debug, Parser)]
#[command(name = "rdna", version, about = "Nonanticipative rate-distortion toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Random seed; defaults to $RDNA_SEED, then to a fixed constant.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Write here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// R^na(D), Gray's bound and the rate-loss bound for a BSMS(p).
    BsmsCurve(BsmsCurveArgs),
    /// Gaussian R^na(D) from a model file or scalar parameters.
    GaussRate(GaussRateArgs),
    /// Simulate a matched JSCC design.
    JsccSim(JsccSimArgs),
    /// Excess-distortion bounds, simulation and rate function for a BSMS.
    Excess(ExcessArgs),
    /// BSMS rate-loss bound on a grid, or its maximum.
    RateLoss(RateLossArgs),
}

#[derive(Debug, Args)]
struct BsmsCurveArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    d: Option<f64>,
    /// lo:hi:step
    #[arg(long)]
    d_grid: Option<Grid>,
}

#[derive(Debug, Args)]
struct ScalarModelArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    sigma_w: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma_v: f64,
}

#[derive(Debug, Args)]
struct GaussRateArgs {
    /// Model file (`dims = m k p d` followed by `A`, `B`, `C`, `N`).
    #[arg(long, conflicts_with = "alpha")]
    model: Option<PathBuf>,
    #[command(flatten)]
    scalar: ScalarModelArgs,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    d_grid: Option<Grid>,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Fb,
    Nfb,
    Iid,
    Vector,
    Sk,
}

#[derive(Debug, Args)]
struct JsccSimArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_w: f64,
    /// Channel noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    sigma_vc: f64,
    /// Source standard deviation for `iid` and `sk`.
    #[arg(long, default_value_t = 1.0)]
    sigma_x: f64,
    #[arg(long, default_value_t = 1.0)]
    power: f64,
    /// Simulated time steps (channel uses for `sk`).
    #[arg(long)]
    steps: Option<usize>,
    /// Independent repetitions (`sk` only).
    #[arg(long)]
    trials: Option<usize>,
    /// Model file for `vector`.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Target distortion for `vector`.
    #[arg(long)]
    d: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SamplingArg {
    Direct,
    Tilted,
}

#[derive(Debug, Args)]
struct ExcessArgs {
    #[arg(long)]
    p: f64,
    /// Design distortion D; the threshold is D + gamma.
    #[arg(long)]
    d: f64,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    /// Comma-separated block lengths.
    #[arg(long, default_value = "500,1000,1500,2000,2500,3000,3500,4000")]
    n: UsizeList,
    /// Monte Carlo trials per n; 0 omits the empirical columns.
    #[arg(long, default_value_t = 0)]
    trials: usize,
    #[arg(long, value_enum, default_value = "tilted")]
    sampling: SamplingArg,
    /// Tabulate the rate function on lo:hi:step instead.
    #[arg(long)]
    theta_grid: Option<Grid>,
}

#[derive(Debug, Args)]
struct RateLossArgs {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    d_grid: Option<Grid>,
}

/// Resolved global settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: &'static str,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = RunConfig {
        command: match cli.command {
            Command::BsmsCurve(_) => "bsms-curve",
            Command::GaussRate(_) => "gauss-rate",
            Command::JsccSim(_) => "jscc-sim",
            Command::Excess(_) => "excess",
            Command::RateLoss(_) => "rate-loss",
        },
        seed: resolve_seed(cli.seed, env_seed.as_deref())?,
        format: cli.format,
        out: cli.out,
    };
    let report = match cli.command {
        Command::BsmsCurve(a) => commands::bsms_curve(a.p, config::distortions(a.d, a.d_grid.as_ref())?)?,
        Command::GaussRate(a) => {
            let model = commands::load_model(a.model.as_deref(), a.scalar.alpha, a.scalar.sigma_w, a.scalar.c, a.scalar.sigma_v)?;
            let ds = config::distortions(a.d, a.d_grid.as_ref())?;
            commands::gauss_rate(&model, &ds, a.max_iter, a.tol)?
        }
        Command::JsccSim(a) => {
            let stream = rdna_core::RngStream::new(cfg.seed, 0);
            match a.mode {
                Mode::Fb | Mode::Nfb | Mode::Iid => {
                    let design = match a.mode {
                        Mode::Fb => rdna_core::jscc::design_feedback_scalar(a.alpha, a.sigma_w, a.sigma_vc, a.power)?,
                        Mode::Nfb => rdna_core::jscc::design_nofeedback_scalar(a.alpha, a.sigma_w, a.sigma_vc, a.power)?,
                        _ => rdna_core::jscc::design_iid(a.sigma_x, a.sigma_vc, a.power)?,
                    };
                    commands::jscc_scalar(&design, a.steps.unwrap_or(1_000_000), stream)?
                }
                Mode::Vector => {
                    let Some(path) = a.model.as_deref() else {
                        return config::usage("--mode vector needs --model");
                    };
                    let Some(d) = a.d else {
                        return config::usage("--mode vector needs --d");
                    };
                    let model = commands::load_model(Some(path), None, 0.0, 0.0, 0.0)?;
                    commands::jscc_vector(&model, d, a.steps.unwrap_or(100_000), stream)?
                }
                Mode::Sk => commands::jscc_sk(
                    a.sigma_x,
                    a.sigma_vc,
                    a.power,
                    a.steps.unwrap_or(5),
                    a.trials.unwrap_or(100_000),
                    stream,
                )?,
            }
        }
        Command::Excess(a) => match a.theta_grid {
            Some(g) => commands::excess_rate_function(a.p, a.d, &g.0)?,
            None => {
                let sampling = match a.sampling {
                    SamplingArg::Direct => rdna_core::excess::Sampling::Direct,
                    SamplingArg::Tilted => rdna_core::excess::Sampling::Tilted,
                };
                commands::excess_table(a.p, a.d, a.gamma, &a.n.0, a.trials, sampling, cfg.seed)?
            }
        },
        Command::RateLoss(a) => {
            let ds = match (a.d, a.d_grid.as_ref()) {
                (None, None) => None,
                (d, g) => Some(config::distortions(d, g)?),
            };
            commands::rate_loss(a.p, ds)?
        }
    };
    let mut report = report;
    if matches!(cfg.command, "jscc-sim" | "excess") {
        report.seed = Some(cfg.seed);
    }
    let text = report.render(cfg.format);
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rdna: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
