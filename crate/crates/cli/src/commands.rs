//! The four subcommands. Each returns the process exit status on success;
//! errors are classified into exit codes by the caller.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use nlsvirial::model::{verify_scalar_inequalities, SampleSpec};
use nlsvirial::solver::{estimate_threshold, ground_state, SolveStatus};
use nlsvirial::sweep::{default_gammas, default_sigma, records_to_csv, run_sweep, summarize, SweepStatus, CSV_HEADER};
use nlsvirial::Nonlinearity;

use crate::config::{ConfigError, Format, RunConfig};

/// Stable exit-status contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    NumericalFailure = 1,
    NoGroundState = 2,
    VerdictFailure = 3,
    Usage = 64,
}

fn usage(key: &str, value: impl ToString, reason: &str) -> anyhow::Error {
    ConfigError::BadValue { key: key.into(), value: value.to_string(), reason: reason.into() }.into()
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    Ok(text)
}

/// Creates the output directory and records the effective configuration in it.
fn prepare_out(cfg: &RunConfig) -> Result<std::path::PathBuf> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("config.txt"), cfg.render())?;
    Ok(dir)
}

/// Saturable unless the config names another kind.
fn nonlinearity(cfg: &RunConfig) -> Result<Nonlinearity> {
    Ok(cfg.nonlinearity()?.unwrap_or(Nonlinearity::Saturable))
}

/// The configured kind, or both saturating kinds when none is given.
fn saturating_kinds(cfg: &RunConfig, command: &str) -> Result<Vec<Nonlinearity>> {
    match cfg.nonlinearity()? {
        None => Ok(vec![Nonlinearity::Saturable, Nonlinearity::SquareRoot]),
        Some(nl) if nl.is_saturating() => Ok(vec![nl]),
        Some(nl) => Err(usage("nl", nl.label(), &format!("{command} needs sqrt or saturable"))),
    }
}

pub fn solve(cfg: &RunConfig) -> Result<Exit> {
    let nl = nonlinearity(cfg)?;
    let gamma = cfg.single_gamma()?;
    let grid = cfg.grid()?;
    let params = cfg.solve_params()?;
    let report = ground_state(nl, gamma, grid, &params)?;
    let dir = prepare_out(cfg)?;
    let json = write_json(&dir.join("report.json"), &report)?;
    report.profile.write_checkpoint(&dir.join("profile.txt"))?;
    match cfg.format.unwrap_or_default() {
        Format::Json => print!("{json}"),
        Format::Csv => {
            println!("{CSV_HEADER}");
            println!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
                report.gamma,
                report.e_gamma,
                report.lambda,
                report.diagnostics.ratio,
                report.diagnostics.pohozaev_rel,
                report.diagnostics.pde_residual,
                report.iters,
                report.status.as_str()
            );
        }
    }
    Ok(match report.status {
        SolveStatus::Converged => Exit::Success,
        SolveStatus::NoGroundState => Exit::NoGroundState,
        SolveStatus::MaxIters => Exit::NumericalFailure,
    })
}

pub fn sweep(cfg: &RunConfig) -> Result<Exit> {
    let nl = nonlinearity(cfg)?;
    if !nl.is_saturating() {
        return Err(usage("nl", nl.label(), "sweep verdicts need sqrt or saturable"));
    }
    let gammas = cfg.sweep_gammas(default_gammas)?;
    let grid = cfg.grid()?;
    let params = cfg.solve_params()?;
    let workers = cfg.workers()?;
    let sigma = cfg.sigma.unwrap_or_else(|| default_sigma(nl));
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(usage("sigma", sigma, "must be positive"));
    }
    let t_hat = match cfg.t_hat {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => return Err(usage("t_hat", t, "must be positive")),
        None => estimate_threshold(nl, grid, &params)?.t_hat,
    };
    let dir = prepare_out(cfg)?;
    let records = run_sweep(nl, &gammas, grid, &params, workers)?;
    let csv = records_to_csv(&records);
    fs::write(dir.join("sweep.csv"), &csv)?;
    let mut dat = String::from("# gamma e_gamma\n");
    for r in records.iter().filter(|r| r.status == SweepStatus::Converged) {
        dat.push_str(&format!("{:.16e} {:.16e}\n", r.gamma, r.e_gamma));
    }
    fs::write(dir.join("energy.dat"), dat)?;
    let summary = summarize(nl, grid, &records, t_hat, sigma);
    let json = write_json(&dir.join("verdicts.json"), &summary)?;
    for v in &summary.verdicts {
        eprintln!("{:<22} {:<12} margin {:>12.4e}  {}", v.name, format!("{:?}", v.outcome), v.margin, v.detail);
    }
    match cfg.format.unwrap_or_default() {
        Format::Json => print!("{json}"),
        Format::Csv => print!("{csv}"),
    }
    Ok(if summary.all_passed { Exit::Success } else { Exit::VerdictFailure })
}

#[derive(Serialize)]
struct KindVerification {
    report: nlsvirial::model::ScalarReport,
    t_hat: f64,
    threshold_iterations: usize,
    threshold_residual: f64,
}

pub fn verify(cfg: &RunConfig) -> Result<Exit> {
    let kinds = saturating_kinds(cfg, "verify")?;
    let spec = SampleSpec { n_samples: cfg.samples.unwrap_or(SampleSpec::default().n_samples), ..SampleSpec::default() };
    if spec.n_samples < 100 {
        return Err(usage("samples", spec.n_samples, "need at least 100"));
    }
    let grid = cfg.grid()?;
    let params = cfg.solve_params()?;
    let mut all = true;
    let mut out = Vec::new();
    for nl in kinds {
        let report = verify_scalar_inequalities(nl, spec)?;
        let est = estimate_threshold(nl, grid, &params)?;
        for f in &report.families {
            println!(
                "{:<10} {:<28} {}  min margin {:.4e}",
                nl.label(),
                f.name,
                if f.passed { "PASS" } else { "FAIL" },
                f.min_margin
            );
        }
        println!("{:<10} {:<28} {:.6}", nl.label(), "T_hat", est.t_hat);
        all &= report.all_passed();
        out.push(KindVerification {
            report,
            t_hat: est.t_hat,
            threshold_iterations: est.iterations,
            threshold_residual: est.residual,
        });
    }
    let dir = prepare_out(cfg)?;
    write_json(&dir.join("verify.json"), &out)?;
    Ok(if all { Exit::Success } else { Exit::VerdictFailure })
}

pub fn estimate_t(cfg: &RunConfig) -> Result<Exit> {
    let kinds = saturating_kinds(cfg, "estimate-t")?;
    let grid = cfg.grid()?;
    let params = cfg.solve_params()?;
    let estimates = kinds
        .into_iter()
        .map(|nl| estimate_threshold(nl, grid, &params))
        .collect::<Result<Vec<_>, _>>()?;
    let dir = prepare_out(cfg)?;
    let json = write_json(&dir.join("threshold.json"), &estimates)?;
    match cfg.format.unwrap_or_default() {
        Format::Json => print!("{json}"),
        Format::Csv => {
            println!("nonlinearity,t_hat,iterations,residual");
            for e in &estimates {
                println!("{},{:.16e},{},{:.16e}", e.nonlinearity.label(), e.t_hat, e.iterations, e.residual);
            }
        }
    }
    Ok(Exit::Success)
}

/// Maps an error to its exit status: bad input is a usage error, anything
/// the numerics ran into is a numerical failure.
pub fn classify(err: &anyhow::Error) -> Exit {
    if err.downcast_ref::<ConfigError>().is_some() {
        return Exit::Usage;
    }
    match err.downcast_ref::<nlsvirial::Error>() {
        Some(
            nlsvirial::Error::Domain(_)
            | nlsvirial::Error::Invalid(_)
            | nlsvirial::Error::Unsupported(_)
            | nlsvirial::Error::Parse(_),
        ) => Exit::Usage,
        _ => Exit::NumericalFailure,
    }
}
