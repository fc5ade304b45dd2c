//! Γ sweeps and the checks run over them: energy floor, monotonicity,
//! the integer-step difference inequality, vanishing of the virial ratio, and
//! the `ln Γ` lower bound on `e_Γ + Γ/2`.
//!
//! Solves run on a private rayon pool of `workers` threads. Each solve is
//! single-threaded and deterministic, and results are collected in input
//! order, so the records do not depend on the worker count.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::model::Nonlinearity;
use crate::solver::{ground_state, SolveParams, SolveStatus};

pub const CSV_HEADER: &str = "gamma,e_gamma,lambda,ratio,pohozaev_rel,pde_residual,iters,status";

/// Share of the smallest Γ values excluded from the asymptotic bound checks.
pub const ONSET_DISCARD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepStatus {
    Converged,
    NoGroundState,
    MaxIters,
    Failed,
}

impl From<SolveStatus> for SweepStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Converged => SweepStatus::Converged,
            SolveStatus::NoGroundState => SweepStatus::NoGroundState,
            SolveStatus::MaxIters => SweepStatus::MaxIters,
        }
    }
}

impl SweepStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepStatus::Converged => "Converged",
            SweepStatus::NoGroundState => "NoGroundState",
            SweepStatus::MaxIters => "MaxIters",
            SweepStatus::Failed => "Failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub gamma: f64,
    pub e_gamma: f64,
    pub lambda: f64,
    pub ratio: f64,
    pub pohozaev_rel: f64,
    pub pde_residual: f64,
    pub iters: usize,
    pub status: SweepStatus,
    /// Whether the per-state diagnostics (ratio interval, eigenvalue bounds) passed.
    pub bounds_passed: bool,
    /// Error text for `Failed` records.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRecord {
    fn failed(gamma: f64, err: &Error) -> Self {
        SweepRecord {
            gamma,
            e_gamma: f64::NAN,
            lambda: f64::NAN,
            ratio: f64::NAN,
            pohozaev_rel: f64::NAN,
            pde_residual: f64::NAN,
            iters: 0,
            status: SweepStatus::Failed,
            bounds_passed: false,
            error: Some(err.to_string()),
        }
    }

    pub fn is_converged(&self) -> bool {
        self.status == SweepStatus::Converged
    }
}

/// `count` log-spaced values from `lo` to `hi`, both ends exact.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) {
        return Err(Error::Domain(format!("need 0 < lo < hi, got {lo}:{hi}")));
    }
    match count {
        0 => Ok(Vec::new()),
        1 => Ok(vec![lo]),
        _ => {
            let ratio = (hi / lo).ln();
            let last = count - 1;
            Ok((0..count)
                .map(|k| if k == last { hi } else { lo * (ratio * k as f64 / last as f64).exp() })
                .collect())
        }
    }
}

/// Sorts, deduplicates and appends `Γ+1` for each requested integer `Γ`.
pub fn with_integer_pairs(mut gammas: Vec<f64>, pairs: &[u32]) -> Vec<f64> {
    for &g in pairs {
        gammas.push(g as f64);
        gammas.push(g as f64 + 1.0);
    }
    gammas.sort_by(|a, b| a.partial_cmp(b).expect("finite gammas"));
    gammas.dedup();
    gammas
}

/// 24 log-spaced couplings from 5 to 5000 plus the pairs {100, 101} and {1000, 1001}.
pub fn default_gammas() -> Vec<f64> {
    with_integer_pairs(log_spaced(5.0, 5000.0, 24).expect("valid range"), &[100, 1000])
}

/// Solves at every Γ on a pool of `workers` threads; failures become `Failed` records.
pub fn run_sweep(
    nl: Nonlinearity,
    gammas: &[f64],
    grid: RadialGrid,
    params: &SolveParams,
    workers: usize,
) -> Result<Vec<SweepRecord>> {
    if let Some(g) = gammas.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
        return Err(Error::Domain(format!("sweep couplings must be positive, got {g}")));
    }
    if gammas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("sweep couplings must be strictly increasing".into()));
    }
    nl.validate()?;
    params.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Invalid(format!("worker pool: {e}")))?;
    let solve_one = |gamma: f64| match ground_state(nl, gamma, grid, params) {
        Ok(rep) => SweepRecord {
            gamma,
            e_gamma: rep.e_gamma,
            lambda: rep.lambda,
            ratio: rep.diagnostics.ratio,
            pohozaev_rel: rep.diagnostics.pohozaev_rel,
            pde_residual: rep.diagnostics.pde_residual,
            iters: rep.iters,
            status: rep.status.into(),
            bounds_passed: rep.diagnostics.all_passed(),
            error: None,
        },
        Err(e) => SweepRecord::failed(gamma, &e),
    };
    Ok(pool.install(|| gammas.par_iter().map(|&g| solve_one(g)).collect()))
}

pub fn records_to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            r.gamma,
            r.e_gamma,
            r.lambda,
            r.ratio,
            r.pohozaev_rel,
            r.pde_residual,
            r.iters,
            r.status.as_str()
        );
    }
    out
}

pub fn write_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    std::fs::write(path, records_to_csv(records))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    /// Passed, but only part of the check could be applied.
    Partial,
    /// Not enough data to decide.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepVerdict {
    pub name: String,
    pub outcome: Outcome,
    /// Smallest slack over all tested records; negative on failure.
    pub margin: f64,
    pub detail: String,
}

impl SweepVerdict {
    fn new(name: &str, outcome: Outcome, margin: f64, detail: impl Into<String>) -> Self {
        SweepVerdict { name: name.into(), outcome, margin, detail: detail.into() }
    }

    fn inconclusive(name: &str, detail: impl Into<String>) -> Self {
        Self::new(name, Outcome::Inconclusive, f64::NAN, detail)
    }

    /// Pass and Partial count as success; Inconclusive does not.
    pub fn passed(&self) -> bool {
        matches!(self.outcome, Outcome::Pass | Outcome::Partial)
    }
}

fn converged(records: &[SweepRecord]) -> Vec<&SweepRecord> {
    records.iter().filter(|r| r.is_converged()).collect()
}

fn decades(recs: &[&SweepRecord]) -> f64 {
    match (recs.first(), recs.last()) {
        (Some(a), Some(b)) => (b.gamma / a.gamma).log10(),
        _ => 0.0,
    }
}

/// `e_Γ` strictly decreasing across consecutive converged records, up to `1e-10`.
pub fn check_monotone(records: &[SweepRecord]) -> SweepVerdict {
    const NAME: &str = "monotone";
    let recs = converged(records);
    if recs.len() < 2 {
        return SweepVerdict::inconclusive(NAME, "fewer than two converged records");
    }
    let mut margin = f64::INFINITY;
    let mut worst = 0.0;
    for w in recs.windows(2) {
        let m = w[0].e_gamma - w[1].e_gamma + 1e-10;
        if m < margin {
            margin = m;
            worst = w[1].gamma;
        }
    }
    let outcome = if margin > 0.0 { Outcome::Pass } else { Outcome::Fail };
    SweepVerdict::new(NAME, outcome, margin, format!("tightest step ends at Gamma = {worst}"))
}

/// `e_Γ ≥ -Γ/2` everywhere, and `e_{Γ+1} - e_Γ ≥ -λ_{Γ+1}/(2(Γ+1))` on integer pairs.
pub fn check_floor_and_difference(records: &[SweepRecord]) -> SweepVerdict {
    const NAME: &str = "floor_and_difference";
    let recs = converged(records);
    if recs.is_empty() {
        return SweepVerdict::inconclusive(NAME, "no converged records");
    }
    let mut floor_margin = f64::INFINITY;
    for r in &recs {
        floor_margin = floor_margin.min(r.e_gamma + 0.5 * r.gamma + 1e-8 * r.gamma);
    }
    let mut diff_margin = f64::INFINITY;
    let mut pairs = 0;
    for a in &recs {
        if a.gamma.fract() != 0.0 {
            continue;
        }
        if let Some(b) = recs.iter().find(|b| b.gamma == a.gamma + 1.0) {
            let m = (b.e_gamma - a.e_gamma) + 0.5 * b.lambda / b.gamma + 1e-6;
            diff_margin = diff_margin.min(m);
            pairs += 1;
        }
    }
    let margin = floor_margin.min(diff_margin);
    let detail = format!("floor margin {floor_margin:.3e}, {pairs} integer pair(s), difference margin {diff_margin:.3e}");
    let outcome = match (margin > 0.0, pairs) {
        (false, _) => Outcome::Fail,
        (true, 0) => Outcome::Partial,
        (true, _) => Outcome::Pass,
    };
    SweepVerdict::new(NAME, outcome, margin, detail)
}

/// `|ratio|` halves over the sweep, stays in `(-1, 0)`, and `ratio·Γ ≤ -0.9 T̂`.
pub fn check_ratio_vanishing(records: &[SweepRecord], t_hat: f64) -> SweepVerdict {
    const NAME: &str = "ratio_vanishing";
    let recs = converged(records);
    if recs.len() < 5 || decades(&recs) < 1.5 {
        return SweepVerdict::inconclusive(NAME, "need at least 5 converged records over 1.5 decades");
    }
    let first = recs[0];
    let last = recs[recs.len() - 1];
    let shrink = first.ratio.abs() - 2.0 * last.ratio.abs();
    let mut interval = f64::INFINITY;
    let mut comparison = f64::INFINITY;
    let mut worst = first.gamma;
    for r in &recs {
        interval = interval.min((-r.ratio).min(1.0 + r.ratio));
        let c = -0.9 * t_hat - r.ratio * r.gamma;
        if c < comparison {
            comparison = c;
            worst = r.gamma;
        }
    }
    let margin = shrink.min(interval).min(comparison);
    let outcome = if margin > 0.0 { Outcome::Pass } else { Outcome::Fail };
    let detail = format!(
        "|ratio| {:.4e} -> {:.4e}; interval margin {interval:.3e}; comparison margin {comparison:.3e} (tightest at Gamma = {worst})",
        first.ratio.abs(),
        last.ratio.abs()
    );
    SweepVerdict::new(NAME, outcome, margin, detail)
}

/// Every converged record passed its own ratio-interval and eigenvalue-bound checks.
pub fn check_state_bounds(records: &[SweepRecord]) -> SweepVerdict {
    const NAME: &str = "state_bounds";
    let recs = converged(records);
    if recs.is_empty() {
        return SweepVerdict::inconclusive(NAME, "no converged records");
    }
    let bad: Vec<f64> = recs.iter().filter(|r| !r.bounds_passed).map(|r| r.gamma).collect();
    if bad.is_empty() {
        SweepVerdict::new(NAME, Outcome::Pass, 0.0, format!("{} states checked", recs.len()))
    } else {
        SweepVerdict::new(NAME, Outcome::Fail, -(bad.len() as f64), format!("failing at Gamma = {bad:?}"))
    }
}

/// `e_Γ/(-Γ/2)` within 5% of 1 at the largest converged Γ of a sweep spanning three decades.
pub fn check_first_order(records: &[SweepRecord]) -> SweepVerdict {
    const NAME: &str = "first_order";
    let all: Vec<&SweepRecord> = records.iter().collect();
    let recs = converged(records);
    if recs.is_empty() || decades(&all) < 3.0 - 1e-9 {
        return SweepVerdict::inconclusive(NAME, "sweep spans less than three decades");
    }
    let last = recs[recs.len() - 1];
    let q = last.e_gamma / (-0.5 * last.gamma);
    let margin = 0.05 - (q - 1.0).abs();
    let outcome = if margin > 0.0 { Outcome::Pass } else { Outcome::Fail };
    SweepVerdict::new(NAME, outcome, margin, format!("e/(-Gamma/2) = {q:.6} at Gamma = {}", last.gamma))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsFit {
    /// Least-squares coefficient of `ln Γ` in `e_Γ + Γ/2`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub t_hat: f64,
    pub sigma: f64,
    /// Constant of the lower bound, fixed by the smallest retained Γ.
    pub bound_constant: f64,
    /// Smallest Γ kept after discarding the onset region.
    pub onset_gamma: f64,
    pub records_used: usize,
    pub min_margin: f64,
    pub passed: bool,
}

/// Fits `y_Γ = e_Γ + Γ/2` against `ln Γ` and checks `y_Γ ≥ σ(T̂/2) ln Γ + C`.
///
/// The smallest 20% of converged couplings are dropped first. `C` is chosen so
/// the bound is tight at the smallest retained Γ, and every retained record
/// must then clear the bound minus `1e-3·|C|`.
pub fn fit_second_order(records: &[SweepRecord], t_hat: f64, sigma: f64) -> Result<AsymptoticsFit> {
    if !(t_hat > 0.0) || !t_hat.is_finite() {
        return Err(Error::Domain(format!("T_hat must be positive, got {t_hat}")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let all = converged(records);
    let skip = (ONSET_DISCARD * all.len() as f64).floor() as usize;
    let recs = &all[skip..];
    if recs.len() < 5 || decades(recs) < 1.5 {
        return Err(Error::Invalid(format!(
            "fit needs at least 5 converged records over 1.5 decades, have {} over {:.2}",
            recs.len(),
            decades(recs)
        )));
    }
    let xs: Vec<f64> = recs.iter().map(|r| r.gamma.ln()).collect();
    let ys: Vec<f64> = recs.iter().map(|r| r.e_gamma + 0.5 * r.gamma).collect();
    let m = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("zero variance in ln Gamma".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_tot: f64 = ys.iter().map(|y| (y - ym) * (y - ym)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };

    let coef = 0.5 * sigma * t_hat;
    let c = ys[0] - coef * xs[0];
    let slack = 1e-3 * c.abs();
    let min_margin = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (coef * x + c) + slack)
        .fold(f64::INFINITY, f64::min);
    Ok(AsymptoticsFit {
        slope,
        intercept,
        r_squared,
        t_hat,
        sigma,
        bound_constant: c,
        onset_gamma: recs[0].gamma,
        records_used: recs.len(),
        min_margin,
        passed: slope > 0.0 && min_margin > 0.0,
    })
}

/// Everything the sweep checks conclude, as written to the verdict document.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub nonlinearity: Nonlinearity,
    pub grid: RadialGrid,
    pub t_hat: f64,
    pub sigma: f64,
    pub converged: usize,
    pub no_ground_state: usize,
    pub failed: usize,
    pub verdicts: Vec<SweepVerdict>,
    pub fit: Option<AsymptoticsFit>,
    pub all_passed: bool,
}

/// Default `σ`: below 1 for the saturable bound, exactly 1 for the square-root bound.
pub fn default_sigma(nl: Nonlinearity) -> f64 {
    match nl {
        Nonlinearity::Saturable => 0.9,
        _ => 1.0,
    }
}

/// Runs every check. The fit verdict is `Inconclusive` when the data cannot support a fit.
pub fn summarize(
    nl: Nonlinearity,
    grid: RadialGrid,
    records: &[SweepRecord],
    t_hat: f64,
    sigma: f64,
) -> SweepSummary {
    let mut verdicts = vec![
        check_monotone(records),
        check_floor_and_difference(records),
        check_ratio_vanishing(records, t_hat),
        check_state_bounds(records),
        check_first_order(records),
    ];
    let fit = match fit_second_order(records, t_hat, sigma) {
        Ok(fit) => {
            let outcome = if fit.passed { Outcome::Pass } else { Outcome::Fail };
            verdicts.push(SweepVerdict::new(
                "second_order",
                outcome,
                fit.min_margin.min(fit.slope),
                format!("slope {:.4} vs bound coefficient {:.4}", fit.slope, 0.5 * sigma * t_hat),
            ));
            Some(fit)
        }
        Err(e) => {
            verdicts.push(SweepVerdict::inconclusive("second_order", e.to_string()));
            None
        }
    };
    let count = |s: SweepStatus| records.iter().filter(|r| r.status == s).count();
    let all_passed = !records.is_empty()
        && count(SweepStatus::Failed) == 0
        && count(SweepStatus::MaxIters) == 0
        && verdicts.iter().all(|v| v.passed() || v.outcome == Outcome::Inconclusive);
    SweepSummary {
        nonlinearity: nl,
        grid,
        t_hat,
        sigma,
        converged: count(SweepStatus::Converged),
        no_ground_state: count(SweepStatus::NoGroundState),
        failed: count(SweepStatus::Failed) + count(SweepStatus::MaxIters),
        verdicts,
        fit,
        all_passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(gamma: f64, e: f64, lambda: f64, ratio: f64) -> SweepRecord {
        SweepRecord {
            gamma,
            e_gamma: e,
            lambda,
            ratio,
            pohozaev_rel: 0.0,
            pde_residual: 0.0,
            iters: 1,
            status: SweepStatus::Converged,
            bounds_passed: true,
            error: None,
        }
    }

    /// Synthetic sweep obeying `e = -Γ/2 + 3 ln Γ + 1`, `λ ≈ Γ`, `ratio = -5/Γ`.
    fn synthetic(gammas: &[f64]) -> Vec<SweepRecord> {
        gammas.iter().map(|&g| rec(g, -0.5 * g + 3.0 * g.ln() + 1.0, g, -5.0 / g)).collect()
    }

    #[test]
    fn log_spacing_hits_ends() {
        let v = log_spaced(5.0, 5000.0, 24).unwrap();
        assert_eq!(v.len(), 24);
        assert_eq!(v[0], 5.0);
        assert_eq!(v[23], 5000.0);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        assert!(log_spaced(0.0, 1.0, 3).is_err());
        assert!(log_spaced(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn default_gammas_contain_pairs() {
        let g = default_gammas();
        assert_eq!(g.len(), 28);
        for x in [100.0, 101.0, 1000.0, 1001.0, 5.0, 5000.0] {
            assert!(g.contains(&x));
        }
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn empty_sweep_is_empty() {
        let grid = RadialGrid::new(8.0, 64).unwrap();
        let out = run_sweep(Nonlinearity::Saturable, &[], grid, &SolveParams::default(), 2).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn sweep_rejects_unsorted() {
        let grid = RadialGrid::new(8.0, 64).unwrap();
        let p = SolveParams::default();
        assert!(run_sweep(Nonlinearity::Saturable, &[10.0, 5.0], grid, &p, 1).is_err());
        assert!(run_sweep(Nonlinearity::Saturable, &[-1.0, 5.0], grid, &p, 1).is_err());
    }

    #[test]
    fn monotone_detects_permutation() {
        let mut recs = synthetic(&[10.0, 20.0, 40.0]);
        assert_eq!(check_monotone(&recs).outcome, Outcome::Pass);
        let e0 = recs[0].e_gamma;
        recs[0].e_gamma = recs[2].e_gamma;
        recs[2].e_gamma = e0;
        assert_eq!(check_monotone(&recs).outcome, Outcome::Fail);
        assert_eq!(check_monotone(&recs[..1]).outcome, Outcome::Inconclusive);
    }

    #[test]
    fn floor_and_difference() {
        let recs = synthetic(&[50.0, 100.0, 101.0]);
        assert_eq!(check_floor_and_difference(&recs).outcome, Outcome::Pass);
        assert_eq!(check_floor_and_difference(&recs[..2]).outcome, Outcome::Partial);
        let mut bad = recs.clone();
        bad[0].e_gamma = -bad[0].gamma;
        assert_eq!(check_floor_and_difference(&bad).outcome, Outcome::Fail);
        // A drop of more than λ/(2(Γ+1)) between Γ and Γ+1 violates the inequality.
        let mut steep = recs;
        steep[2].e_gamma = steep[1].e_gamma - 0.6;
        steep[2].lambda = 101.0;
        assert_eq!(check_floor_and_difference(&steep).outcome, Outcome::Fail);
    }

    #[test]
    fn ratio_vanishing() {
        let recs = synthetic(&[10.0, 30.0, 100.0, 300.0, 1000.0]);
        assert_eq!(check_ratio_vanishing(&recs, 5.0).outcome, Outcome::Pass);
        // T̂ too large for ratio·Γ = -5.
        assert_eq!(check_ratio_vanishing(&recs, 6.0).outcome, Outcome::Fail);
        let constant: Vec<_> = recs.iter().map(|r| SweepRecord { ratio: -0.3, ..r.clone() }).collect();
        assert_eq!(check_ratio_vanishing(&constant, 1.0).outcome, Outcome::Fail);
        assert_eq!(check_ratio_vanishing(&recs[..3], 1.0).outcome, Outcome::Inconclusive);
    }

    #[test]
    fn fit_recovers_synthetic_slope() {
        let g = log_spaced(10.0, 10000.0, 12).unwrap();
        let fit = fit_second_order(&synthetic(&g), 5.0, 0.9).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-10);
        assert!((fit.intercept - 1.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit.passed);
        // Bound coefficient above the true slope must fail.
        let fit = fit_second_order(&synthetic(&g), 8.0, 1.0).unwrap();
        assert!(!fit.passed);
        assert!(fit_second_order(&synthetic(&g[..4]), 5.0, 0.9).is_err());
    }

    #[test]
    fn first_order_needs_three_decades() {
        let recs = synthetic(&[5.0, 50.0, 500.0]);
        assert_eq!(check_first_order(&recs).outcome, Outcome::Inconclusive);
        let recs = synthetic(&[5.0, 5000.0]);
        assert_eq!(check_first_order(&recs).outcome, Outcome::Pass);
    }

    #[test]
    fn csv_format() {
        let mut recs = synthetic(&[10.0]);
        recs.push(SweepRecord::failed(20.0, &Error::Invalid("x".into())));
        let csv = records_to_csv(&recs);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("1.0000000000000000e1,"));
        assert!(lines[1].ends_with(",1,Converged"));
        assert!(lines[2].ends_with(",0,Failed"));
        let first: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(first, recs[0].e_gamma);
    }

    #[test]
    fn small_real_sweep_is_worker_independent() {
        let grid = RadialGrid::new(16.0, 256).unwrap();
        let p = SolveParams::default();
        let gammas = [0.05, 50.0, 100.0, 101.0];
        let a = run_sweep(Nonlinearity::Saturable, &gammas, grid, &p, 1).unwrap();
        let b = run_sweep(Nonlinearity::Saturable, &gammas, grid, &p, 3).unwrap();
        assert_eq!(records_to_csv(&a), records_to_csv(&b));
        assert_eq!(a[0].status, SweepStatus::NoGroundState);
        assert!(a[1..].iter().all(|r| r.is_converged()));
        assert_eq!(check_monotone(&a).outcome, Outcome::Pass);
        assert_eq!(check_floor_and_difference(&a).outcome, Outcome::Pass);
    }
}
