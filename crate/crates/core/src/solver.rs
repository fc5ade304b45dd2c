//! Normalised gradient flow for `min { E[u] : ‖u‖₂ = 1 }`, threshold estimation,
//! and no-ground-state detection.
//!
//! One flow step freezes the nonlinear coefficient at the current iterate and
//! solves the shifted implicit system
//!
//! ```text
//! [ W (1 + dt (σ - Γ f(u_k²))) + dt H ] v = W u_k,   σ = Γ max f(u_k²),
//! ```
//!
//! then rescales `v` to unit norm. `H` is the kinetic matrix and `W` the
//! quadrature weights. The shift `σ` makes the matrix positive definite
//! whatever the size of `Γ`. A fixed point `v = κ u` solves the discrete
//! equation `Lu + Γ f(u²) u = μ u` with multiplier `μ = σ - (1/κ - 1)/dt`, so
//! the flow stops on the discrete equation itself rather than on a rescaled one.

use serde::{Deserialize, Serialize};

use crate::banded::BandedSym;
use crate::energy::{diagnose, DiagnosticsReport, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::grid::{normalize, Profile, RadialGrid};
use crate::model::Nonlinearity;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveParams {
    pub dt: f64,
    pub tol: f64,
    pub max_iters: usize,
    /// Width of the Gaussian starting guess; `None` picks `(ln max(Γ, e))^{-1/2}`.
    pub tau_init: Option<f64>,
    pub collapse_energy_eps: f64,
    pub tail_threshold: f64,
    /// Consecutive iterations of spreading at non-negative energy that end a solve early.
    pub spread_window: usize,
    pub max_dt_halvings: usize,
    pub max_tail_retries: usize,
    /// Extra steps taken after the residual first reaches `tol`. Rounding puts
    /// a floor under the residual that grows like `1/h²`, while the smooth part
    /// of the error keeps contracting; polishing drives that part further down.
    #[serde(default)]
    pub polish_iters: usize,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            dt: 0.05,
            tol: 1e-8,
            max_iters: 200_000,
            tau_init: None,
            collapse_energy_eps: 1e-6,
            tail_threshold: 1e-10,
            spread_window: 500,
            max_dt_halvings: 20,
            max_tail_retries: 2,
            polish_iters: 0,
        }
    }
}

impl SolveParams {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
            }
        };
        pos("dt", self.dt)?;
        pos("tol", self.tol)?;
        if self.tol >= 1.0 {
            return Err(Error::Domain(format!("tol must be below 1, got {}", self.tol)));
        }
        pos("collapse_energy_eps", self.collapse_energy_eps)?;
        pos("tail_threshold", self.tail_threshold)?;
        if let Some(t) = self.tau_init {
            pos("tau_init", t)?;
        }
        if self.max_iters == 0 {
            return Err(Error::Domain("max_iters must be positive".into()));
        }
        if self.spread_window == 0 {
            return Err(Error::Domain("spread_window must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    NoGroundState,
    MaxIters,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::NoGroundState => "NoGroundState",
            SolveStatus::MaxIters => "MaxIters",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub nonlinearity: Nonlinearity,
    pub gamma: f64,
    /// Ground-state energy; the infimum 0 when no ground state exists.
    pub e_gamma: f64,
    /// Energy of the final iterate on the grid.
    pub flow_energy: f64,
    /// Nehari quotient of the final iterate.
    pub lambda: f64,
    /// Lagrange multiplier implied by the last flow step.
    pub multiplier: f64,
    pub energy: EnergyBreakdown,
    pub diagnostics: DiagnosticsReport,
    pub iters: usize,
    pub grid: RadialGrid,
    pub tail_value: f64,
    pub tail_ok: bool,
    pub tail_reruns: usize,
    pub dt_final: f64,
    pub dt_halvings: usize,
    pub energy_violations: usize,
    pub spreading: bool,
    pub half_mass_radius: f64,
    #[serde(skip)]
    pub profile: Profile,
}

/// `τ = (ln max(Γ, e))^{-1/2}`, the width at which a Gaussian trial state
/// balances kinetic cost against the saturated potential gain.
pub fn auto_tau(gamma: f64) -> f64 {
    gamma.max(std::f64::consts::E).ln().powf(-0.5)
}

/// Unit-norm Gaussian `(1/τ) G(r/τ)` with `G(r) = e^{-r²/2}/√π`.
pub fn initial_guess(gamma: f64, grid: RadialGrid, tau: Option<f64>) -> Result<Profile> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("Gamma must be positive, got {gamma}")));
    }
    let tau = tau.unwrap_or_else(|| auto_tau(gamma));
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    let p = Profile::from_fn(grid, |r| {
        let x = r / tau;
        inv_sqrt_pi * (-0.5 * x * x).exp() / tau
    })?;
    normalize(&p)
}

/// What one accepted step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub energy: f64,
    pub multiplier: f64,
    pub dt: f64,
    pub rejected: usize,
    pub norm: f64,
}

/// Flow state on a fixed grid. Owns its scratch space; not shared between solves.
#[derive(Debug, Clone)]
pub struct GradientFlow {
    nl: Nonlinearity,
    gamma: f64,
    grid: RadialGrid,
    kinetic: BandedSym,
    w: Vec<f64>,
    /// Unknowns `u_0..u_{n-1}`; the Dirichlet value is implicit.
    u: Vec<f64>,
    hu: Vec<f64>,
    energy: f64,
    dt: f64,
    halvings: usize,
    max_halvings: usize,
    violations: usize,
    iteration: usize,
}

impl GradientFlow {
    pub fn new(nl: Nonlinearity, gamma: f64, start: &Profile, dt: f64, max_halvings: usize) -> Result<Self> {
        nl.validate()?;
        let grid = *start.grid();
        let start = normalize(start)?;
        let n = grid.n;
        let kinetic = grid.kinetic_matrix();
        let w: Vec<f64> = (0..n).map(|i| grid.weight(i)).collect();
        let u = start.values()[..n].to_vec();
        let hu = kinetic.matvec(&u);
        let mut flow = GradientFlow {
            nl,
            gamma,
            grid,
            kinetic,
            w,
            u,
            hu,
            energy: 0.0,
            dt,
            halvings: 0,
            max_halvings,
            violations: 0,
            iteration: 0,
        };
        flow.energy = flow.energy_of(&flow.u, &flow.hu);
        Ok(flow)
    }

    fn energy_of(&self, u: &[f64], hu: &[f64]) -> f64 {
        let g: f64 = u.iter().zip(hu).map(|(a, b)| a * b).sum();
        let pot: f64 = u.iter().zip(&self.w).map(|(x, w)| w * self.nl.big_f(x * x)).sum();
        0.5 * g - 0.5 * self.gamma * pot
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn set_gamma(&mut self, gamma: f64) {
        self.gamma = gamma;
        self.energy = self.energy_of(&self.u, &self.hu);
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn halvings(&self) -> usize {
        self.halvings
    }

    pub fn violations(&self) -> usize {
        self.violations
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn grid(&self) -> RadialGrid {
        self.grid
    }

    pub fn profile(&self) -> Profile {
        let mut v = self.u.clone();
        v.push(0.0);
        Profile::new(self.grid, v).expect("flow iterates stay finite")
    }

    /// `‖u‖₂` of the current iterate.
    pub fn norm(&self) -> f64 {
        self.u.iter().zip(&self.w).map(|(x, w)| w * x * x).sum::<f64>().sqrt()
    }

    /// `∫|∇u|² / ∫F(u²)` of the current iterate.
    pub fn quotient(&self) -> f64 {
        let g: f64 = self.u.iter().zip(&self.hu).map(|(a, b)| a * b).sum();
        let pot: f64 = self.u.iter().zip(&self.w).map(|(x, w)| w * self.nl.big_f(x * x)).sum();
        g / pot
    }

    /// Nehari quotient and relative PDE residual of the current iterate.
    pub fn residual(&self) -> (f64, f64) {
        let nl = self.nl;
        let mut m = 0.0;
        let mut g = 0.0;
        let mut s = 0.0;
        for i in 0..self.u.len() {
            let x = self.u[i];
            m += self.w[i] * x * x;
            g += x * self.hu[i];
            s += self.w[i] * nl.f(x * x) * x * x;
        }
        let lambda = (-g + self.gamma * s) / m;
        let mut acc = 0.0;
        for i in 0..self.u.len() {
            let x = self.u[i];
            let r = -self.hu[i] / self.w[i] + self.gamma * nl.f(x * x) * x - lambda * x;
            acc += self.w[i] * r * r;
        }
        (lambda, (acc / m).sqrt())
    }

    /// Radius enclosing half the mass of the current iterate.
    pub fn half_mass_radius(&self) -> f64 {
        let h = self.grid.h();
        let total: f64 = self.u.iter().zip(&self.w).map(|(x, w)| w * x * x).sum();
        let mut acc = 0.0;
        for (i, (x, w)) in self.u.iter().zip(&self.w).enumerate() {
            let add = w * x * x;
            if acc + add >= 0.5 * total {
                let frac = if add > 0.0 { (0.5 * total - acc) / add } else { 0.0 };
                return if i == 0 { 0.5 * h * frac } else { (i as f64 - 0.5 + frac) * h };
            }
            acc += add;
        }
        self.grid.r_max
    }

    /// Advances one accepted step.
    ///
    /// A step that raises the energy by more than `1e-10·max(1, |E|)` is
    /// rejected and retried with half the step size. Once the halving budget
    /// is spent, the step is accepted anyway and counted as a violation.
    pub fn step(&mut self) -> Result<StepInfo> {
        self.iteration += 1;
        let it = self.iteration;
        let n = self.u.len();
        let fv: Vec<f64> = self.u.iter().map(|x| self.nl.f(x * x)).collect();
        let sigma = self.gamma * fv.iter().cloned().fold(0.0, f64::max);
        let rhs: Vec<f64> = self.u.iter().zip(&self.w).map(|(x, w)| w * x).collect();
        let mut rejected = 0;
        loop {
            let dt = self.dt;
            let diag: Vec<f64> = (0..n).map(|i| self.w[i] * (1.0 + dt * (sigma - self.gamma * fv[i]))).collect();
            let a = self.kinetic.scaled_plus_diag(dt, &diag);
            let ldl = a.factor().ok_or_else(|| Error::NumericalFailure {
                iteration: it,
                reason: "flow matrix lost positive definiteness".into(),
            })?;
            let mut v = ldl.solve(&rhs);
            let kappa = v.iter().zip(&self.w).map(|(x, w)| w * x * x).sum::<f64>().sqrt();
            if !kappa.is_finite() || kappa == 0.0 {
                return Err(Error::NumericalFailure { iteration: it, reason: format!("step norm {kappa}") });
            }
            for x in v.iter_mut() {
                *x /= kappa;
            }
            let hv = self.kinetic.matvec(&v);
            let e_new = self.energy_of(&v, &hv);
            if !e_new.is_finite() {
                return Err(Error::NumericalFailure { iteration: it, reason: format!("energy {e_new}") });
            }
            let slack = 1e-10 * self.energy.abs().max(1.0);
            let increase = e_new > self.energy + slack;
            if increase && self.halvings < self.max_halvings {
                self.dt *= 0.5;
                self.halvings += 1;
                rejected += 1;
                continue;
            }
            if increase {
                self.violations += 1;
            }
            self.u = v;
            self.hu = hv;
            self.energy = e_new;
            return Ok(StepInfo {
                energy: e_new,
                multiplier: sigma - (1.0 / kappa - 1.0) / dt,
                dt,
                rejected,
                norm: self.norm(),
            });
        }
    }
}

struct FlowOutcome {
    status: SolveStatus,
    profile: Profile,
    iters: usize,
    energy: f64,
    multiplier: f64,
    dt: f64,
    halvings: usize,
    violations: usize,
    spreading: bool,
    half_mass_radius: f64,
}

fn run_flow(nl: Nonlinearity, gamma: f64, start: &Profile, params: &SolveParams) -> Result<FlowOutcome> {
    let mut flow = GradientFlow::new(nl, gamma, start, params.dt, params.max_dt_halvings)?;
    let r_max = start.grid().r_max;
    let r_half_start = flow.half_mass_radius();
    let mut prev_r_half = r_half_start;
    let mut streak = 0usize;
    let mut multiplier = f64::NAN;
    let mut status = SolveStatus::MaxIters;
    let eps = params.collapse_energy_eps;
    let mut r_half = r_half_start;
    for _ in 0..params.max_iters {
        let info = flow.step()?;
        multiplier = info.multiplier;
        let (_, res) = flow.residual();
        if !res.is_finite() {
            return Err(Error::NumericalFailure { iteration: flow.iteration(), reason: "residual not finite".into() });
        }
        r_half = flow.half_mass_radius();
        if res <= params.tol {
            status = if flow.energy() < -eps { SolveStatus::Converged } else { SolveStatus::NoGroundState };
            if status == SolveStatus::Converged {
                for _ in 0..params.polish_iters {
                    multiplier = flow.step()?.multiplier;
                }
                r_half = flow.half_mass_radius();
            }
            break;
        }
        if flow.energy() >= -eps && r_half >= prev_r_half {
            streak += 1;
        } else {
            streak = 0;
        }
        prev_r_half = r_half;
        if streak >= params.spread_window && r_half >= 0.25 * r_max {
            status = SolveStatus::NoGroundState;
            break;
        }
    }
    Ok(FlowOutcome {
        status,
        profile: flow.profile(),
        iters: flow.iteration(),
        energy: flow.energy(),
        multiplier,
        dt: flow.dt(),
        halvings: flow.halvings(),
        violations: flow.violations(),
        spreading: r_half > r_half_start,
        half_mass_radius: r_half,
    })
}

/// Computes the constrained energy minimiser at coupling `Γ`.
///
/// A converged state whose value at `r_max/2` exceeds the tail threshold is
/// recomputed on a grid of twice the radius (same spacing), warm-started from
/// the previous state, at most `max_tail_retries` times.
pub fn ground_state(nl: Nonlinearity, gamma: f64, grid: RadialGrid, params: &SolveParams) -> Result<SolveReport> {
    nl.validate()?;
    if !nl.is_subcritical() {
        return Err(Error::Domain("power-law ground states need 1 < p < 3".into()));
    }
    params.validate()?;
    let start = initial_guess(gamma, grid, params.tau_init)?;
    let mut out = run_flow(nl, gamma, &start, params)?;
    let mut iters = out.iters;
    let mut halvings = out.halvings;
    let mut violations = out.violations;
    let mut reruns = 0;
    let tail = |p: &Profile| p.value_at(0.5 * p.grid().r_max).abs();
    while out.status == SolveStatus::Converged
        && tail(&out.profile) > params.tail_threshold
        && reruns < params.max_tail_retries
    {
        let wide = out.profile.grid().widen()?;
        let warm = out.profile.resample(wide);
        out = run_flow(nl, gamma, &warm, params)?;
        iters += out.iters;
        halvings += out.halvings;
        violations += out.violations;
        reruns += 1;
    }
    let profile = out.profile;
    let energy = crate::energy::energy_terms(&profile, nl, gamma)?;
    let diagnostics = diagnose(&profile, nl, gamma, Some(out.multiplier))?;
    let tail_value = tail(&profile);
    Ok(SolveReport {
        status: out.status,
        nonlinearity: nl,
        gamma,
        e_gamma: if out.status == SolveStatus::NoGroundState { 0.0 } else { out.energy },
        flow_energy: out.energy,
        lambda: diagnostics.lambda,
        multiplier: out.multiplier,
        energy,
        diagnostics,
        iters,
        grid: *profile.grid(),
        tail_value,
        tail_ok: tail_value <= params.tail_threshold,
        tail_reruns: reruns,
        dt_final: out.dt,
        dt_halvings: halvings,
        energy_violations: violations,
        spreading: out.spreading,
        half_mass_radius: out.half_mass_radius,
        profile,
    })
}

/// Result of minimising `Q[w] = ∫|∇w|² / ∫F(w²)` on the grid.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdEstimate {
    pub nonlinearity: Nonlinearity,
    pub t_hat: f64,
    pub iterations: usize,
    pub line_searches: usize,
    pub restarts: usize,
    /// PDE residual of the trial state at `Γ = T̂`.
    pub residual: f64,
    pub grid: RadialGrid,
    #[serde(skip)]
    pub trial: Profile,
}

/// Flow steps between dilation line searches.
const Q_FLOW_BLOCK: usize = 200;
/// Residual at `Γ = Q` below which the quotient flow stops; `Q` itself is
/// then accurate to roughly the square of this.
const Q_FLOW_TOL: f64 = 1e-6;
const MAX_RESTARTS: usize = 3;

fn quotient_of(p: &Profile, nl: Nonlinearity) -> Result<f64> {
    let q = crate::energy::threshold_quotient(p, nl)?;
    if !q.is_finite() {
        return Err(Error::Degenerate("threshold quotient is not finite".into()));
    }
    Ok(q)
}

/// Golden-section search over `ln τ ∈ [-ln 2, ln 2]` for the dilation
/// `w(r/τ)/τ` that minimises `Q`. Returns the improved state if it beats `q0`.
fn dilation_search(w: &Profile, nl: Nonlinearity, q0: f64) -> Option<(Profile, f64)> {
    let eval = |x: f64| -> f64 {
        normalize(&w.dilate(x.exp()))
            .ok()
            .and_then(|p| quotient_of(&p, nl).ok())
            .unwrap_or(f64::INFINITY)
    };
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (-std::f64::consts::LN_2, std::f64::consts::LN_2);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    for _ in 0..40 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval(d);
        }
    }
    let x = 0.5 * (a + b);
    let best = normalize(&w.dilate(x.exp())).ok()?;
    let q = quotient_of(&best, nl).ok()?;
    (q < q0 * (1.0 - 1e-14)).then_some((best, q))
}

fn threshold_attempt(
    nl: Nonlinearity,
    grid: RadialGrid,
    params: &SolveParams,
    tau0: f64,
) -> Result<(f64, Profile, usize, usize, f64)> {
    let mut w = initial_guess(1.0, grid, Some(tau0))?;
    let mut q = quotient_of(&w, nl)?;
    let mut iters = 0;
    let mut searches = 0;
    loop {
        if let Some((better, qb)) = dilation_search(&w, nl, q) {
            w = better;
            q = qb;
            searches += 1;
        }
        let mut flow = GradientFlow::new(nl, q, &w, params.dt, params.max_dt_halvings)?;
        for _ in 0..Q_FLOW_BLOCK {
            let qk = flow.quotient();
            if !(qk.is_finite() && qk > 0.0) {
                return Err(Error::Degenerate("threshold quotient collapsed".into()));
            }
            flow.set_gamma(qk);
            flow.step()?;
            iters += 1;
        }
        w = flow.profile();
        let qn = quotient_of(&w, nl)?;
        flow.set_gamma(qn);
        let (_, res) = flow.residual();
        q = q.min(qn);
        if res <= Q_FLOW_TOL.max(params.tol) || iters >= params.max_iters {
            return Ok((q, w, iters, searches, res));
        }
    }
}

/// Upper estimate `T̂` of `inf Q[w]`, the coupling below which no ground state exists.
///
/// Alternates dilation line searches with quotient-flow steps, i.e. flow
/// steps at `Γ = Q[w_k]`. Each such step lowers the energy at that coupling,
/// so it strictly lowers `Q`. If the quotient degenerates, the search restarts
/// from a trial twice as wide, at most three times.
pub fn estimate_threshold(nl: Nonlinearity, grid: RadialGrid, params: &SolveParams) -> Result<ThresholdEstimate> {
    if !nl.is_saturating() {
        return Err(Error::Unsupported("threshold estimation needs a saturating nonlinearity".into()));
    }
    params.validate()?;
    let mut tau0 = 2.0;
    for restarts in 0..=MAX_RESTARTS {
        match threshold_attempt(nl, grid, params, tau0) {
            Ok((t_hat, trial, iterations, line_searches, residual)) => {
                assert!(t_hat > 0.0, "threshold estimate must be positive");
                return Ok(ThresholdEstimate {
                    nonlinearity: nl,
                    t_hat,
                    iterations,
                    line_searches,
                    restarts,
                    residual,
                    grid,
                    trial,
                });
            }
            Err(Error::Degenerate(_)) | Err(Error::NumericalFailure { .. }) => tau0 *= 2.0,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ThresholdDiverged { restarts: MAX_RESTARTS })
}

/// Bracket of the coupling where the solver's verdict flips.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdBracket {
    /// Largest coupling seen with `NoGroundState`.
    pub lo: f64,
    /// Smallest coupling seen with `Converged`.
    pub hi: f64,
    pub evaluations: Vec<(f64, SolveStatus)>,
}

/// Bisects (geometrically) on the solver's status between `lo` and `hi`.
///
/// Tail reruns are disabled so that every status refers to the grid the
/// threshold estimate was computed on.
pub fn bracket_threshold(
    nl: Nonlinearity,
    grid: RadialGrid,
    params: &SolveParams,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<ThresholdBracket> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain(format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    let p = SolveParams { max_tail_retries: 0, ..*params };
    let mut evaluations = Vec::new();
    let mut status = |g: f64| -> Result<SolveStatus> {
        let s = ground_state(nl, g, grid, &p)?.status;
        evaluations.push((g, s));
        if s == SolveStatus::MaxIters {
            return Err(Error::Invalid(format!("solver hit max_iters at Gamma = {g}")));
        }
        Ok(s)
    };
    if status(lo)? != SolveStatus::NoGroundState {
        return Err(Error::Invalid(format!("lower end Gamma = {lo} already has a ground state")));
    }
    if status(hi)? != SolveStatus::Converged {
        return Err(Error::Invalid(format!("upper end Gamma = {hi} has no ground state")));
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..steps {
        let mid = (a * b).sqrt();
        if status(mid)? == SolveStatus::Converged {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(ThresholdBracket { lo: a, hi: b, evaluations })
}
