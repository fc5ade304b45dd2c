// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Exit;
use config::{ConfigError, Format, GammaRange, NlKind, RunConfig};

#[derive(Parser)]
#[command(name = "nlsvirial", version, about = "Ground states and virial diagnostics for Δu + Γf(u²)u = λu in 2D")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one ground state; writes report.json and profile.txt.
    Solve(Flags),
    /// Sweep Γ and check the asymptotic verdicts; writes sweep.csv, verdicts.json, energy.dat.
    Sweep(Flags),
    /// Run the scalar-inequality suite and estimate the threshold.
    Verify(Flags),
    /// Estimate the existence threshold T̂.
    #[command(name = "estimate-t")]
    EstimateT(Flags),
}

#[derive(Args, Debug)]
struct Flags {
    /// key = value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nl: Option<NlKind>,
    /// Power-law exponent.
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Comma-separated couplings.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    gammas: Option<Vec<f64>>,
    /// lo:hi:count, log-spaced.
    #[arg(long)]
    gamma_range: Option<GammaRange>,
    #[arg(long = "rmax", allow_negative_numbers = true)]
    r_max: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    format: Option<Format>,
    /// Samples per inequality family.
    #[arg(long)]
    samples: Option<usize>,
    /// Coefficient factor of the ln Γ lower bound.
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    /// Skip threshold estimation and use this T̂.
    #[arg(long = "t-hat", allow_negative_numbers = true)]
    t_hat: Option<f64>,
}

impl Flags {
    fn into_config(self) -> Result<RunConfig, ConfigError> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            nl: self.nl,
            p: self.p,
            gamma: self.gamma,
            gammas: self.gammas,
            gamma_range: self.gamma_range,
            r_max: self.r_max,
            n: self.n,
            dt: self.dt,
            tol: self.tol,
            max_iters: self.max_iters,
            out: self.out,
            workers: self.workers,
            format: self.format,
            samples: self.samples,
            sigma: self.sigma,
            t_hat: self.t_hat,
        };
        Ok(base.overlay(flags))
    }
}

fn run(cli: Cli) -> anyhow::Result<Exit> {
    match cli.command {
        Command::Solve(f) => commands::solve(&f.into_config()?),
        Command::Sweep(f) => commands::sweep(&f.into_config()?),
        Command::Verify(f) => commands::verify(&f.into_config()?),
        Command::EstimateT(f) => commands::estimate_t(&f.into_config()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Usage } else { Exit::Success };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let code = commands::classify(&e);
            eprintln!("error: {e:#}");
            code
        }
    };
    ExitCode::from(code as u8)
}
