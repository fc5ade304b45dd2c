//! Nonlinearities `f`, their primitives `F(I) = ∫_0^I f(s) ds`, and the scalar
//! functions that the virial-ratio and eigenvalue-bound arguments rest on.
//!
//! Everything here is a pure function of its arguments. The `*_value`
//! functions validate their input; the inherent methods on [`Nonlinearity`]
//! skip validation and are meant for inner loops over grid samples, where
//! the argument is `u²` and therefore already nonnegative.
//!
//! Small-argument evaluation matters: `s - ln(1+s)` and `√(1+s) - 1` both
//! cancel catastrophically below `s ≈ 1e-8`, so the primitives and the ratio
//! kernel use series or rationalised forms there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The nonlinearity `f(u²)` multiplying `Γu` in `Δu + Γ f(u²) u = λu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `f(s) = 1 - 1/√(1+s)`.
    SquareRoot,
    /// `f(s) = 1 - 1/(1+s)`.
    Saturable,
    /// `f(s) = s^((p-1)/2)`.
    PowerLaw { p: f64 },
}

impl Nonlinearity {
    /// Power-law nonlinearity with exponent `p > 1`.
    pub fn power_law(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::Domain(format!("power-law exponent must satisfy p > 1, got {p}")));
        }
        Ok(Nonlinearity::PowerLaw { p })
    }

    /// Re-checks the exponent of a power law built directly from the variant.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Nonlinearity::PowerLaw { p } => Nonlinearity::power_law(p).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Ground states exist for every Γ > 0 only in the mass-subcritical range `1 < p < 3`.
    pub fn is_subcritical(&self) -> bool {
        match *self {
            Nonlinearity::PowerLaw { p } => p > 1.0 && p < 3.0,
            _ => true,
        }
    }

    /// True for the two saturating kinds, whose virial ratio lies strictly inside (-1, 0).
    pub fn is_saturating(&self) -> bool {
        !matches!(self, Nonlinearity::PowerLaw { .. })
    }

    /// Short name used in file names, CSV and JSON payloads.
    pub fn label(&self) -> String {
        match *self {
            Nonlinearity::SquareRoot => "sqrt".to_string(),
            Nonlinearity::Saturable => "saturable".to_string(),
            Nonlinearity::PowerLaw { p } => format!("power(p={p})"),
        }
    }

    /// `f(s)` without input validation; `s` must be nonnegative.
    #[inline]
    pub fn f(&self, s: f64) -> f64 {
        match *self {
            Nonlinearity::SquareRoot => {
                let q = (1.0 + s).sqrt();
                s / (q * (q + 1.0))
            }
            Nonlinearity::Saturable => s / (1.0 + s),
            Nonlinearity::PowerLaw { p } => {
                if s == 0.0 {
                    0.0
                } else {
                    s.powf(0.5 * (p - 1.0))
                }
            }
        }
    }

    /// `F(I) = ∫_0^I f(s) ds` without input validation; `i` must be nonnegative.
    #[inline]
    pub fn big_f(&self, i: f64) -> f64 {
        match *self {
            Nonlinearity::SquareRoot => {
                let t = i / ((1.0 + i).sqrt() + 1.0);
                t * t
            }
            Nonlinearity::Saturable => x_minus_log1p(i),
            Nonlinearity::PowerLaw { p } => 2.0 * i.powf(0.5 * (p + 1.0)) / (p + 1.0),
        }
    }
}

/// `s - ln(1+s)` accurate to a few ulp for all `s ≥ 0`.
pub fn x_minus_log1p(s: f64) -> f64 {
    if s < 0.25 {
        // Σ_{k≥2} (-1)^k s^k / k, alternating with ratio ≤ 1/4.
        let mut term = s * s;
        let mut sum = 0.0;
        let mut k = 2.0;
        let mut sign = 1.0;
        loop {
            let add = sign * term / k;
            sum += add;
            if add.abs() <= 1e-18 * sum.abs() || k > 80.0 {
                break;
            }
            term *= s;
            k += 1.0;
            sign = -sign;
        }
        sum
    } else {
        s - s.ln_1p()
    }
}

fn check_arg(name: &str, s: f64) -> Result<()> {
    if !s.is_finite() || s < 0.0 {
        return Err(Error::Domain(format!("{name} must be finite and nonnegative, got {s}")));
    }
    Ok(())
}

/// `f(s)` for `s ≥ 0`.
pub fn f_value(nl: Nonlinearity, s: f64) -> Result<f64> {
    nl.validate()?;
    check_arg("s", s)?;
    Ok(nl.f(s))
}

/// `F(I) = ∫_0^I f(s) ds` for `I ≥ 0`.
pub fn big_f_value(nl: Nonlinearity, i: f64) -> Result<f64> {
    nl.validate()?;
    check_arg("I", i)?;
    Ok(nl.big_f(i))
}

/// The kernel `f(s)·s / F(s)` whose range (1, 2) pins the virial ratio in (-1, 0).
///
/// For the square-root kind this simplifies to `1 + 1/√(1+s)`. For the
/// power law it is the constant `(p+1)/2` and is rejected here.
pub fn ratio_kernel(nl: Nonlinearity, s: f64) -> Result<f64> {
    if !s.is_finite() || s <= 0.0 {
        return Err(Error::Domain(format!("ratio kernel needs s > 0, got {s}")));
    }
    match nl {
        Nonlinearity::SquareRoot => Ok(1.0 + 1.0 / (1.0 + s).sqrt()),
        Nonlinearity::Saturable => Ok(s * s / (1.0 + s) / x_minus_log1p(s)),
        Nonlinearity::PowerLaw { p } => Err(Error::Unsupported(format!(
            "power-law ratio kernel is the constant (p+1)/2 = {}",
            0.5 * (p + 1.0)
        ))),
    }
}

/// `ρ(s) = 2s² - (s² + 2s) ln(1+s)`, the numerator of the saturable kernel's
/// derivative: `k'(s) = ρ(s) / ((1+s)² (s - ln(1+s))²)`.
pub fn saturable_kernel_slope_numerator(s: f64) -> f64 {
    if s < 0.25 {
        // ρ(s) = Σ_{m≥4} (-1)^{m+1} (m-3) / ((m-2)(m-1)) s^m
        let mut pow = s * s * s * s;
        let mut sum = 0.0;
        let mut m = 4.0_f64;
        let mut sign = -1.0;
        loop {
            let add = sign * (m - 3.0) / ((m - 2.0) * (m - 1.0)) * pow;
            sum += add;
            if add.abs() <= 1e-18 * sum.abs() || m > 120.0 {
                break;
            }
            pow *= s;
            m += 1.0;
            sign = -sign;
        }
        sum
    } else {
        2.0 * s * s - (s * s + 2.0 * s) * s.ln_1p()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > -1.0 && alpha < -0.5) {
        return Err(Error::Domain(format!("alpha must lie in (-1, -1/2), got {alpha}")));
    }
    Ok(())
}

/// `s_α = (1+2α)^{-2} - 1`, the largest `s` with `h(s) ≤ 0` when `-1 < α < -1/2`.
pub fn s_alpha(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let a = 1.0 + 2.0 * alpha;
    Ok(1.0 / (a * a) - 1.0)
}

/// `ρ₀ = (-(1+2α)/3)^{3/2}`, the slope correction that makes `h(s) - ρ₀ s` nonincreasing.
pub fn rho0(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok((-(1.0 + 2.0 * alpha) / 3.0).powf(1.5))
}

/// `τ* = (-(1+2α)/3)^{-1/2}`, where `ω` attains its minimum.
pub fn tau_star(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok((-(1.0 + 2.0 * alpha) / 3.0).powf(-0.5))
}

/// `ω(τ) = 2ρ₀τ³ + (1+2α)τ² + 1`, evaluated directly from the polynomial.
pub fn omega(alpha: f64, rho0: f64, tau: f64) -> f64 {
    2.0 * rho0 * tau * tau * tau + (1.0 + 2.0 * alpha) * tau * tau + 1.0
}

/// Square-root `h(s) = g(s) - (1+α)s = 2α(1 - √(1+s)) - s/√(1+s)`.
pub fn sqrt_h(alpha: f64, s: f64) -> f64 {
    let q = (1.0 + s).sqrt();
    // 1 - √(1+s) = -s / (1 + √(1+s))
    -2.0 * alpha * s / (1.0 + q) - s / q
}

/// Saturable `h(s) = g(s) - (1+β/2)²s = -β ln(1+s) + 1/(1+s) - 1 - β²s/4`.
pub fn saturable_h(beta: f64, s: f64) -> f64 {
    -beta * s.ln_1p() - s / (1.0 + s) - 0.25 * beta * beta * s
}

/// Saturable `g(s) = β[s - ln(1+s)] + s²/(1+s)`.
pub fn saturable_g(beta: f64, s: f64) -> f64 {
    beta * x_minus_log1p(s) + s * s / (1.0 + s)
}

/// Square-root `g(s) = α(√(1+s) - 1)² + s - s/√(1+s)`.
pub fn sqrt_g(alpha: f64, s: f64) -> f64 {
    let q = (1.0 + s).sqrt();
    let t = s / (q + 1.0);
    alpha * t * t + s * (q - 1.0) / q
}

/// Sampling controls for [`verify_scalar_inequalities`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub s_max: f64,
    pub n_samples: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec { s_max: 1e6, n_samples: 100_000 }
    }
}

/// Outcome of one inequality family across all its parameter values and samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyResult {
    pub name: String,
    pub statement: String,
    pub passed: bool,
    pub params_checked: usize,
    pub samples_checked: usize,
    /// Smallest margin seen; positive means the inequality held everywhere.
    pub min_margin: f64,
    /// Parameter (α or β, NaN when not applicable) and abscissa of the smallest margin.
    pub worst_param: f64,
    pub worst_at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarReport {
    pub nonlinearity: Nonlinearity,
    pub spec: SampleSpec,
    pub families: Vec<FamilyResult>,
}

impl ScalarReport {
    pub fn all_passed(&self) -> bool {
        self.families.iter().all(|f| f.passed)
    }
}

/// Lower end of the sampled range; every inequality degenerates to equality at 0.
pub const S_MIN: f64 = 1e-12;

/// Below this, consecutive kernel samples differ by less than f64 resolution,
/// so the pairwise strict-decrease check starts here. The slope sign is still
/// checked down to [`S_MIN`].
pub const S_RESOLVE: f64 = 1e-6;

/// Number of α or β values per family.
pub const PARAMS_PER_FAMILY: usize = 20;

/// Offset from the open-interval endpoints.
pub const BOUNDARY_OFFSET: f64 = 1e-3;

fn log_samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k + 1 == n {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// `count` points spanning `[lo, hi]` inclusive, endpoints first so the
/// near-boundary values are always present.
fn param_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
}

struct Tracker {
    name: &'static str,
    statement: &'static str,
    params: usize,
    samples: usize,
    min_margin: f64,
    worst_param: f64,
    worst_at: f64,
    ok: bool,
}

impl Tracker {
    fn new(name: &'static str, statement: &'static str) -> Self {
        Tracker {
            name,
            statement,
            params: 0,
            samples: 0,
            min_margin: f64::INFINITY,
            worst_param: f64::NAN,
            worst_at: f64::NAN,
            ok: true,
        }
    }

    /// Records a margin that must be strictly positive.
    fn strict(&mut self, param: f64, at: f64, margin: f64) {
        self.observe(param, at, margin, margin > 0.0);
    }

    fn observe(&mut self, param: f64, at: f64, margin: f64, holds: bool) {
        self.samples += 1;
        if !holds || !margin.is_finite() {
            self.ok = false;
        }
        if margin < self.min_margin || margin.is_nan() {
            self.min_margin = margin;
            self.worst_param = param;
            self.worst_at = at;
        }
    }

    fn finish(self) -> FamilyResult {
        FamilyResult {
            name: self.name.to_string(),
            statement: self.statement.to_string(),
            passed: self.ok && self.samples > 0,
            params_checked: self.params,
            samples_checked: self.samples,
            min_margin: self.min_margin,
            worst_param: self.worst_param,
            worst_at: self.worst_at,
        }
    }
}

/// Samples every scalar inequality behind the ratio and eigenvalue bounds and
/// reports pass/fail per family.
///
/// Samples are log-uniform on `[S_MIN, s_max]`. The α/β families use
/// [`PARAMS_PER_FAMILY`] values per family, including values offset by
/// [`BOUNDARY_OFFSET`] from each open-interval endpoint. Power laws have no
/// scalar inequalities and yield an empty report.
pub fn verify_scalar_inequalities(nl: Nonlinearity, spec: SampleSpec) -> Result<ScalarReport> {
    if !(spec.s_max > S_MIN) || !spec.s_max.is_finite() {
        return Err(Error::Domain(format!("s_max must exceed {S_MIN}, got {}", spec.s_max)));
    }
    if spec.n_samples < 100 {
        return Err(Error::Domain(format!("need at least 100 samples, got {}", spec.n_samples)));
    }
    nl.validate()?;
    let samples = log_samples(S_MIN, spec.s_max, spec.n_samples);
    let families = match nl {
        Nonlinearity::Saturable => saturable_families(&samples, spec),
        Nonlinearity::SquareRoot => sqrt_families(&samples, spec),
        Nonlinearity::PowerLaw { .. } => Vec::new(),
    };
    Ok(ScalarReport { nonlinearity: nl, spec, families })
}

fn kernel_families(nl: Nonlinearity, samples: &[f64], spec: SampleSpec) -> Vec<FamilyResult> {
    let k = |s: f64| ratio_kernel(nl, s).unwrap_or(f64::NAN);

    let mut range = Tracker::new("kernel_range", "1 < f(s)s/F(s) < 2 for s > 0");
    range.params = 1;
    for &s in samples {
        let v = k(s);
        range.strict(f64::NAN, s, (v - 1.0).min(2.0 - v));
    }

    let mut mono = Tracker::new("kernel_decreasing", "f(s)s/F(s) strictly decreasing (pairwise)");
    mono.params = 1;
    let dense = log_samples(S_RESOLVE.min(spec.s_max / 2.0), spec.s_max, spec.n_samples);
    for w in dense.windows(2) {
        mono.strict(f64::NAN, w[0], k(w[0]) - k(w[1]));
    }

    // Limits: k → 2 as s → 0+ and k → 1 as s → ∞, checked as explicit ε/δ pairs.
    let mut lim = Tracker::new("kernel_limits", "f(s)s/F(s) -> 2 as s -> 0+, -> 1 as s -> inf");
    lim.params = 1;
    for (s, target, eps) in [(1e-12, 2.0, 1e-9), (1e-8, 2.0, 1e-6), (1e-4, 2.0, 1e-3)] {
        lim.strict(f64::NAN, s, eps - (k(s) - target).abs());
    }
    for (s, eps) in [(1e4, 2e-2), (1e6, 2e-3), (1e10, 2e-5)] {
        lim.strict(f64::NAN, s, eps - (k(s) - 1.0).abs());
    }

    let mut out = vec![range.finish(), mono.finish(), lim.finish()];
    if nl == Nonlinearity::Saturable {
        let mut slope = Tracker::new(
            "kernel_slope_sign",
            "rho(s) = 2s^2 - (s^2+2s)ln(1+s) < 0, so the kernel's derivative is negative",
        );
        slope.params = 1;
        for &s in samples {
            slope.strict(f64::NAN, s, -saturable_kernel_slope_numerator(s));
        }
        out.push(slope.finish());
    }
    out
}

fn saturable_families(samples: &[f64], spec: SampleSpec) -> Vec<FamilyResult> {
    let mut out = kernel_families(Nonlinearity::Saturable, samples, spec);
    let betas = param_grid(-1.0 + BOUNDARY_OFFSET, -BOUNDARY_OFFSET, PARAMS_PER_FAMILY);

    let mut h = Tracker::new("saturable_h_negative", "h(s) = g(s) - (1+b/2)^2 s < 0 for s > 0");
    let mut g = Tracker::new("saturable_g_bound", "g(s) < (1+b/2)^2 s for s > 0 (direct g)");
    for &beta in &betas {
        h.params += 1;
        g.params += 1;
        let c = (1.0 + 0.5 * beta).powi(2);
        for &s in samples {
            h.strict(beta, s, -saturable_h(beta, s));
            // Direct form, relative to s: cancellation leaves ~1e-16 relative
            // noise, far below the smallest true gap (1+b/2)^2 - (1+b) = b^2/4.
            g.strict(beta, s, c - saturable_g(beta, s) / s);
        }
    }
    out.push(h.finish());
    out.push(g.finish());

    let mut q = Tracker::new("saturable_quartic", "s - ln(1+s) < s^2/2 for s > 0");
    q.params = 1;
    for &s in samples {
        let f = x_minus_log1p(s);
        q.strict(f64::NAN, s, (0.5 * s * s - f) / (0.5 * s * s));
    }
    out.push(q.finish());
    out
}

fn sqrt_families(samples: &[f64], spec: SampleSpec) -> Vec<FamilyResult> {
    let mut out = kernel_families(Nonlinearity::SquareRoot, samples, spec);

    // Case (i): -1/2 <= α < 0.
    let alphas_i = param_grid(-0.5, -BOUNDARY_OFFSET, PARAMS_PER_FAMILY);
    let mut hi = Tracker::new("sqrt_h_negative", "h(s) < 0 for s > 0 when -1/2 <= a < 0");
    for &alpha in &alphas_i {
        hi.params += 1;
        for &s in samples {
            hi.strict(alpha, s, -sqrt_h(alpha, s) / s);
        }
    }
    out.push(hi.finish());

    // Cases (ii) and (iii): -1 < α < -1/2.
    let alphas = param_grid(-1.0 + BOUNDARY_OFFSET, -0.5 - BOUNDARY_OFFSET, PARAMS_PER_FAMILY);

    let mut h0 = Tracker::new("sqrt_h0_negative", "h(s) - rho0 s < 0 for s > 0 when -1 < a < -1/2");
    let mut om = Tracker::new("sqrt_omega_nonnegative", "omega(t) >= 0 for t > 1 (rounding allowance)");
    let mut omz = Tracker::new("sqrt_omega_touches_zero", "|omega(t*)| < 1e-12 with t* > 1");
    let mut sa = Tracker::new("sqrt_s_alpha_root", "s_a solves 2a[sqrt(1+s)-(1+s)] - s = 0 to 1e-12");
    let mut below = Tracker::new("sqrt_h_below_s_alpha", "h(s) < 0 for 0 < s < s_a");
    let mut above = Tracker::new("sqrt_h_above_s_alpha", "h(s) > 0 for s > s_a");

    let taus = log_samples(1.0 + 1e-12, 1e3, spec.n_samples);
    for &alpha in &alphas {
        for t in [&mut h0, &mut om, &mut omz, &mut sa, &mut below, &mut above] {
            t.params += 1;
        }
        let r0 = rho0(alpha).expect("alpha inside (-1,-1/2)");
        let sa_val = s_alpha(alpha).expect("alpha inside (-1,-1/2)");
        let ts = tau_star(alpha).expect("alpha inside (-1,-1/2)");

        for &s in samples {
            h0.strict(alpha, s, -(sqrt_h(alpha, s) - r0 * s) / s);
            if (s - sa_val).abs() <= 1e-9 * sa_val {
                continue;
            }
            if s < sa_val {
                below.strict(alpha, s, -sqrt_h(alpha, s) / s);
            } else {
                above.strict(alpha, s, sqrt_h(alpha, s) / s);
            }
        }

        for &tau in &taus {
            let w = omega(alpha, r0, tau);
            let scale = 2.0 * r0 * tau.powi(3) + (1.0 + 2.0 * alpha).abs() * tau * tau + 1.0;
            let allowance = 8.0 * f64::EPSILON * scale;
            om.observe(alpha, tau, w, w >= -allowance);
        }
        let wz = omega(alpha, r0, ts);
        omz.strict(alpha, ts, (1e-12 - wz.abs()).min(ts - 1.0));

        let q = (1.0 + sa_val).sqrt();
        let resid = 2.0 * alpha * (q - (1.0 + sa_val)) - sa_val;
        sa.strict(alpha, sa_val, 1e-12 * (1.0 + sa_val) - resid.abs());
    }
    for t in [h0, om, omz, sa, below, above] {
        out.push(t.finish());
    }

    let mut q = Tracker::new("sqrt_quartic", "(sqrt(1+s)-1)^2 < s^2/4 for s > 0");
    q.params = 1;
    for &s in samples {
        let f = Nonlinearity::SquareRoot.big_f(s);
        q.strict(f64::NAN, s, (0.25 * s * s - f) / (0.25 * s * s));
    }
    out.push(q.finish());
    out
}
