//! Energy, eigenvalue, virial ratio, and identity residuals of a profile.
//!
//! Conventions: `E[u] = ½∫|∇u|² - (Γ/2)∫F(u²)`. The virial ratio is
//! `∫|∇u|² / (-Γ∫F(u²))`. For a true solution, the two scalar identities are:
//!
//! - Nehari (pair the equation with `u`): `λ‖u‖² = -∫|∇u|² + Γ∫f(u²)u²`;
//! - Pohozaev (pair with `x·∇u`): `λ‖u‖² = Γ∫F(u²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_radial_laplacian, gradient_sq_integral, gradient_sq_integral_nodal, Profile};
use crate::model::{rho0, s_alpha, Nonlinearity};

/// Floor used when both sides of an identity vanish.
const RESIDUAL_FLOOR: f64 = 1e-30;

/// Tolerance of the power-law virial oracle `a = (1-p)/2`.
pub const POWER_LAW_RATIO_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

/// A named check with its margin: positive margin means the inequality held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    pub detail: String,
}

impl Verdict {
    pub fn from_margin(name: &str, margin: f64, detail: impl Into<String>) -> Self {
        Verdict { name: name.to_string(), passed: margin > 0.0, margin, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub ratio: f64,
    pub lambda: f64,
    pub pohozaev_rel: f64,
    pub nehari_rel: f64,
    pub pde_residual: f64,
    pub verdicts: Vec<Verdict>,
}

impl DiagnosticsReport {
    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !gamma.is_finite() {
        return Err(Error::Domain(format!("Gamma must be finite, got {gamma}")));
    }
    Ok(())
}

/// `∫ g(u²) ...` helpers over nodal values.
fn integral_of(p: &Profile, term: impl Fn(f64) -> f64) -> f64 {
    let g = p.grid();
    p.values().iter().enumerate().map(|(i, u)| g.weight(i) * term(*u)).sum()
}

fn mass(p: &Profile) -> f64 {
    integral_of(p, |u| u * u)
}

fn potential_integral(p: &Profile, nl: Nonlinearity) -> f64 {
    integral_of(p, |u| nl.big_f(u * u))
}

fn nehari_integral(p: &Profile, nl: Nonlinearity) -> f64 {
    integral_of(p, |u| nl.f(u * u) * u * u)
}

pub fn energy_terms(p: &Profile, nl: Nonlinearity, gamma: f64) -> Result<EnergyBreakdown> {
    check_gamma(gamma)?;
    nl.validate()?;
    let kinetic = 0.5 * gradient_sq_integral(p);
    let potential = -0.5 * gamma * potential_integral(p, nl);
    Ok(EnergyBreakdown { kinetic, potential, total: kinetic + potential })
}

/// Nehari quotient `λ = (-∫|∇u|² + Γ∫f(u²)u²) / ‖u‖²`.
pub fn eigenvalue_of(p: &Profile, nl: Nonlinearity, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let m = mass(p);
    if !(m > 0.0) {
        return Err(Error::Degenerate("eigenvalue of a zero profile".into()));
    }
    Ok((-gradient_sq_integral(p) + gamma * nehari_integral(p, nl)) / m)
}

/// `∫|∇u|² / (-Γ∫F(u²))`.
pub fn virial_ratio(p: &Profile, nl: Nonlinearity, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("virial ratio needs Gamma > 0, got {gamma}")));
    }
    let denom = potential_integral(p, nl);
    if !(denom > 0.0) {
        return Err(Error::Degenerate("potential integral vanishes".into()));
    }
    // Dividing by Γ last makes the 1/Γ dependence explicit.
    Ok(-(gradient_sq_integral(p) / denom) / gamma)
}

/// `Q[w] = ∫|∇w|² / ∫F(w²)`, the quotient whose infimum is the existence threshold.
pub fn threshold_quotient(p: &Profile, nl: Nonlinearity) -> Result<f64> {
    let denom = potential_integral(p, nl);
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::Degenerate("potential integral vanishes".into()));
    }
    Ok(gradient_sq_integral(p) / denom)
}

/// `|λ‖u‖² - Γ∫F(u²)| / max(|λ|‖u‖², Γ|∫F|)`.
pub fn pohozaev_residual(p: &Profile, nl: Nonlinearity, gamma: f64, lambda: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be finite, got {lambda}")));
    }
    let m = mass(p);
    if !(m > 0.0) {
        return Err(Error::Degenerate("Pohozaev residual of a zero profile".into()));
    }
    let lhs = lambda * m;
    let rhs = gamma * potential_integral(p, nl);
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        return Err(Error::Degenerate("both Pohozaev sides vanish".into()));
    }
    Ok((lhs - rhs).abs() / scale.max(RESIDUAL_FLOOR))
}

/// `|λ‖u‖² + ∫|∇u|² - Γ∫f(u²)u²| / max(|λ|‖u‖², ∫|∇u|² + Γ|∫f u²|)`.
///
/// With `λ` equal to the Nehari quotient this would vanish identically, so the
/// gradient term here comes from the node-centred derivative route
/// ([`gradient_sq_integral_nodal`]) rather than the flow's own kinetic form.
/// What remains measures how far the discrete state is from satisfying the
/// continuum identity.
pub fn nehari_residual(p: &Profile, nl: Nonlinearity, gamma: f64, lambda: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be finite, got {lambda}")));
    }
    let m = mass(p);
    if !(m > 0.0) {
        return Err(Error::Degenerate("Nehari residual of a zero profile".into()));
    }
    let grad = gradient_sq_integral_nodal(p);
    let nl_term = gamma * nehari_integral(p, nl);
    let lhs = lambda * m;
    let scale = lhs.abs().max(grad + nl_term.abs());
    Ok((lhs + grad - nl_term).abs() / scale.max(RESIDUAL_FLOOR))
}

/// Combined identity `∫|∇u|² - Γ∫f(u²)u² + Γ∫F(u²) = 0` (Nehari minus Pohozaev),
/// relative to the largest term, using the node-centred gradient route.
pub fn combined_identity_residual(p: &Profile, nl: Nonlinearity, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let grad = gradient_sq_integral_nodal(p);
    let a = gamma * nehari_integral(p, nl);
    let b = gamma * potential_integral(p, nl);
    let scale = grad.max(a.abs()).max(b.abs());
    if scale == 0.0 {
        return Err(Error::Degenerate("all identity terms vanish".into()));
    }
    Ok((grad - a + b).abs() / scale)
}

/// `‖Δu + Γf(u²)u - λu‖₂ / ‖u‖₂` over the nodes inside the truncation radius.
pub fn pde_residual(p: &Profile, nl: Nonlinearity, gamma: f64, lambda: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let lap = apply_radial_laplacian(p);
    Ok(pde_residual_with(p, nl, gamma, lambda, &lap))
}

pub(crate) fn pde_residual_with(p: &Profile, nl: Nonlinearity, gamma: f64, lambda: f64, lap: &[f64]) -> f64 {
    let g = p.grid();
    let u = p.values();
    let mut acc = 0.0;
    let mut m = 0.0;
    for i in 0..g.n {
        let w = g.weight(i);
        let r = lap[i] + gamma * nl.f(u[i] * u[i]) * u[i] - lambda * u[i];
        acc += w * r * r;
        m += w * u[i] * u[i];
    }
    if m == 0.0 {
        return acc.sqrt();
    }
    (acc / m).sqrt()
}

/// `L²` gradient density of `E`: `-Δu - Γf(u²)u`, zero at the Dirichlet node.
///
/// The discrete energy's partial derivatives are exactly
/// `∂E/∂u_i = w_i · energy_gradient(u)_i`.
pub fn energy_gradient(p: &Profile, nl: Nonlinearity, gamma: f64) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    let lap = apply_radial_laplacian(p);
    let u = p.values();
    let n = p.grid().n;
    Ok((0..=n)
        .map(|i| if i == n { 0.0 } else { -lap[i] - gamma * nl.f(u[i] * u[i]) * u[i] })
        .collect())
}

/// Eigenvalue bounds implied by the virial ratio, each with its margin.
///
/// - Square-root, `-1/2 ≤ α < 0`: `0 < λ ≤ Γ(1+α)`.
/// - Square-root, `-1 < α < -1/2`: `λ ≤ Γ(1 + α + ρ₀)`, and `λ ≤ Γ(1+α)` as
///   well when `sup u² ≤ s_α`.
/// - Saturable: `0 < λ ≤ (1+β/2)²Γ`.
///
/// Power laws carry no such bound; the list is empty.
pub fn check_eigenvalue_bounds(
    report: &DiagnosticsReport,
    gamma: f64,
    nl: Nonlinearity,
    sup_u_sq: f64,
) -> Result<Vec<Verdict>> {
    let ratio = report.ratio;
    let lambda = report.lambda;
    if !nl.is_saturating() {
        return Ok(Vec::new());
    }
    if !(ratio > -1.0 && ratio < 0.0) {
        return Err(Error::Invalid(format!(
            "virial ratio {ratio} outside (-1, 0); the state is not a converged ground state"
        )));
    }
    let mut out = vec![Verdict::from_margin("lambda_positive", lambda, format!("lambda = {lambda:.6e}"))];
    match nl {
        Nonlinearity::Saturable => {
            let cap = (1.0 + 0.5 * ratio).powi(2) * gamma;
            out.push(Verdict::from_margin(
                "saturable_lambda_bound",
                cap - lambda,
                format!("lambda <= (1+beta/2)^2 Gamma = {cap:.6e}"),
            ));
        }
        Nonlinearity::SquareRoot => {
            let alpha = ratio;
            if alpha >= -0.5 {
                let cap = gamma * (1.0 + alpha);
                out.push(Verdict::from_margin(
                    "sqrt_case_i",
                    cap - lambda,
                    format!("alpha in [-1/2,0): lambda <= Gamma(1+alpha) = {cap:.6e}"),
                ));
            } else {
                let r0 = rho0(alpha)?;
                let cap = gamma * (1.0 + alpha + r0);
                out.push(Verdict::from_margin(
                    "sqrt_case_ii",
                    cap - lambda,
                    format!("alpha in (-1,-1/2): lambda <= Gamma(1+alpha+rho0) = {cap:.6e}"),
                ));
                let sa = s_alpha(alpha)?;
                if sup_u_sq <= sa {
                    let cap = gamma * (1.0 + alpha);
                    out.push(Verdict::from_margin(
                        "sqrt_case_iii",
                        cap - lambda,
                        format!("sup u^2 = {sup_u_sq:.4e} <= s_alpha = {sa:.4e}: lambda <= Gamma(1+alpha) = {cap:.6e}"),
                    ));
                }
            }
        }
        Nonlinearity::PowerLaw { .. } => unreachable!(),
    }
    Ok(out)
}

/// Full diagnostics of a candidate ground state.
///
/// `multiplier` is the Lagrange multiplier reported by the flow; when absent
/// the Nehari quotient stands in for it in the Nehari residual.
pub fn diagnose(p: &Profile, nl: Nonlinearity, gamma: f64, multiplier: Option<f64>) -> Result<DiagnosticsReport> {
    let lambda = eigenvalue_of(p, nl, gamma)?;
    let ratio = virial_ratio(p, nl, gamma)?;
    let mut report = DiagnosticsReport {
        ratio,
        lambda,
        pohozaev_rel: pohozaev_residual(p, nl, gamma, lambda)?,
        nehari_rel: nehari_residual(p, nl, gamma, multiplier.unwrap_or(lambda))?,
        pde_residual: pde_residual(p, nl, gamma, lambda)?,
        verdicts: Vec::new(),
    };
    match nl {
        Nonlinearity::PowerLaw { p: exp } => {
            let want = 0.5 * (1.0 - exp);
            report.verdicts.push(Verdict::from_margin(
                "power_law_ratio",
                POWER_LAW_RATIO_TOL - (ratio - want).abs(),
                format!("ratio {ratio:.6} vs (1-p)/2 = {want}"),
            ));
        }
        _ => {
            let margin = (ratio + 1.0).min(-ratio);
            report.verdicts.push(Verdict::from_margin(
                "ratio_interval",
                margin,
                format!("ratio {ratio:.6} in (-1, 0)"),
            ));
            if margin > 0.0 {
                let bounds = check_eigenvalue_bounds(&report, gamma, nl, p.sup_sq())?;
                report.verdicts.extend(bounds);
            }
        }
    }
    Ok(report)
}
