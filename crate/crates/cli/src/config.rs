//! Run configuration: a plain `key = value` file, overridden field by field by
//! command-line flags.
//!
//! Every field is optional so that a file and a flag set can be merged with
//! "flag wins" semantics; defaults are applied only when a command resolves
//! the configuration. `render` and `parse` are inverse to each other.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nlsvirial::solver::SolveParams;
use nlsvirial::{Nonlinearity, RadialGrid};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { key: String, line: usize },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { text: String, line: usize },
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("cannot read config {path}: {reason}")]
    Unreadable { path: String, reason: String },
}

fn bad(key: &str, value: impl fmt::Display, reason: impl Into<String>) -> ConfigError {
    ConfigError::BadValue { key: key.into(), value: value.to_string(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlKind {
    Sqrt,
    Saturable,
    Power,
}

impl FromStr for NlKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sqrt" => Ok(NlKind::Sqrt),
            "saturable" => Ok(NlKind::Saturable),
            "power" => Ok(NlKind::Power),
            _ => Err("expected sqrt, saturable or power".into()),
        }
    }
}

impl fmt::Display for NlKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NlKind::Sqrt => "sqrt",
            NlKind::Saturable => "saturable",
            NlKind::Power => "power",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err("expected json or csv".into()),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

/// `lo:hi:count`, log-spaced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRange {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl FromStr for GammaRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts.as_slice() else {
            return Err("expected lo:hi:count".into());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower end `{lo}`"))?;
        let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper end `{hi}`"))?;
        let count: usize = count.trim().parse().map_err(|_| format!("bad count `{count}`"))?;
        Ok(GammaRange { lo, hi, count })
    }
}

impl fmt::Display for GammaRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.count)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub nl: Option<NlKind>,
    pub p: Option<f64>,
    pub gamma: Option<f64>,
    pub gammas: Option<Vec<f64>>,
    pub gamma_range: Option<GammaRange>,
    pub r_max: Option<f64>,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub format: Option<Format>,
    pub samples: Option<usize>,
    pub sigma: Option<f64>,
    pub t_hat: Option<f64>,
}

pub const KEYS: [&str; 16] = [
    "nl", "p", "gamma", "gammas", "gamma_range", "r_max", "n", "dt", "tol", "max_iters", "out", "workers", "format",
    "samples", "sigma", "t_hat",
];

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| bad(key, v, e.to_string()))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',').map(|x| parse_value::<f64>(key, x.trim())).collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut c = RunConfig::default();
        let mut seen = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(ConfigError::Malformed { text: body.into(), line });
            };
            let (key, v) = (k.trim(), v.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey { key: key.into(), line });
            }
            if seen.contains(&key) {
                return Err(ConfigError::DuplicateKey { key: key.into(), line });
            }
            seen.push(key);
            match key {
                "nl" => c.nl = Some(parse_value(key, v)?),
                "p" => c.p = Some(parse_value(key, v)?),
                "gamma" => c.gamma = Some(parse_value(key, v)?),
                "gammas" => c.gammas = Some(parse_list(key, v)?),
                "gamma_range" => c.gamma_range = Some(parse_value(key, v)?),
                "r_max" => c.r_max = Some(parse_value(key, v)?),
                "n" => c.n = Some(parse_value(key, v)?),
                "dt" => c.dt = Some(parse_value(key, v)?),
                "tol" => c.tol = Some(parse_value(key, v)?),
                "max_iters" => c.max_iters = Some(parse_value(key, v)?),
                "out" => c.out = Some(PathBuf::from(v)),
                "workers" => c.workers = Some(parse_value(key, v)?),
                "format" => c.format = Some(parse_value(key, v)?),
                "samples" => c.samples = Some(parse_value(key, v)?),
                "sigma" => c.sigma = Some(parse_value(key, v)?),
                "t_hat" => c.t_hat = Some(parse_value(key, v)?),
                _ => unreachable!("key list and match arms agree"),
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Unreadable { path: path.display().to_string(), reason: e.to_string() })?;
        RunConfig::parse(&text)
    }

    /// One `key = value` line per set field, in `KEYS` order.
    pub fn render(&self) -> String {
        let mut lines = Vec::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                lines.push(format!("{k} = {v}"));
            }
        };
        put("nl", self.nl.map(|x| x.to_string()));
        put("p", self.p.map(|x| x.to_string()));
        put("gamma", self.gamma.map(|x| x.to_string()));
        put(
            "gammas",
            self.gammas.as_ref().map(|g| g.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")),
        );
        put("gamma_range", self.gamma_range.map(|x| x.to_string()));
        put("r_max", self.r_max.map(|x| x.to_string()));
        put("n", self.n.map(|x| x.to_string()));
        put("dt", self.dt.map(|x| x.to_string()));
        put("tol", self.tol.map(|x| x.to_string()));
        put("max_iters", self.max_iters.map(|x| x.to_string()));
        put("out", self.out.as_ref().map(|x| x.display().to_string()));
        put("workers", self.workers.map(|x| x.to_string()));
        put("format", self.format.map(|x| x.to_string()));
        put("samples", self.samples.map(|x| x.to_string()));
        put("sigma", self.sigma.map(|x| x.to_string()));
        put("t_hat", self.t_hat.map(|x| x.to_string()));
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: RunConfig) -> RunConfig {
        RunConfig {
            nl: over.nl.or(self.nl),
            p: over.p.or(self.p),
            gamma: over.gamma.or(self.gamma),
            gammas: over.gammas.or(self.gammas),
            gamma_range: over.gamma_range.or(self.gamma_range),
            r_max: over.r_max.or(self.r_max),
            n: over.n.or(self.n),
            dt: over.dt.or(self.dt),
            tol: over.tol.or(self.tol),
            max_iters: over.max_iters.or(self.max_iters),
            out: over.out.or(self.out),
            workers: over.workers.or(self.workers),
            format: over.format.or(self.format),
            samples: over.samples.or(self.samples),
            sigma: over.sigma.or(self.sigma),
            t_hat: over.t_hat.or(self.t_hat),
        }
    }

    /// The nonlinearity, or `None` when no kind was given.
    pub fn nonlinearity(&self) -> Result<Option<Nonlinearity>, ConfigError> {
        match (self.nl, self.p) {
            (None, None) => Ok(None),
            (None, Some(p)) | (Some(NlKind::Power), Some(p)) => {
                Nonlinearity::power_law(p).map(Some).map_err(|e| bad("p", p, e.to_string()))
            }
            (Some(NlKind::Power), None) => Err(bad("p", "(missing)", "power law needs --p")),
            (Some(NlKind::Sqrt), None) => Ok(Some(Nonlinearity::SquareRoot)),
            (Some(NlKind::Saturable), None) => Ok(Some(Nonlinearity::Saturable)),
            (Some(kind), Some(p)) => Err(bad("p", p, format!("only meaningful with nl = power, not {kind}"))),
        }
    }

    pub fn grid(&self) -> Result<RadialGrid, ConfigError> {
        let d = RadialGrid::default_grid();
        let r_max = self.r_max.unwrap_or(d.r_max);
        let n = self.n.unwrap_or(d.n);
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(bad("r_max", r_max, "must be positive"));
        }
        RadialGrid::new(r_max, n).map_err(|e| bad("n", n, e.to_string()))
    }

    pub fn solve_params(&self) -> Result<SolveParams, ConfigError> {
        let d = SolveParams::default();
        let p = SolveParams {
            dt: self.dt.unwrap_or(d.dt),
            tol: self.tol.unwrap_or(d.tol),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            ..d
        };
        if !(p.dt > 0.0) || !p.dt.is_finite() {
            return Err(bad("dt", p.dt, "must be positive"));
        }
        if !(p.tol > 0.0 && p.tol < 1.0) {
            return Err(bad("tol", p.tol, "must lie in (0, 1)"));
        }
        if p.max_iters == 0 {
            return Err(bad("max_iters", 0, "must be positive"));
        }
        Ok(p)
    }

    /// The single coupling of a `solve` run.
    pub fn single_gamma(&self) -> Result<f64, ConfigError> {
        if self.gammas.is_some() || self.gamma_range.is_some() {
            return Err(bad("gamma", "(list)", "solve takes a single gamma"));
        }
        let g = self.gamma.ok_or_else(|| bad("gamma", "(missing)", "solve needs --gamma"))?;
        if !(g > 0.0) || !g.is_finite() {
            return Err(bad("gamma", g, "must be positive"));
        }
        Ok(g)
    }

    /// Sorted couplings of a sweep: explicit list, else range, else `default`.
    pub fn sweep_gammas(&self, default: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>, ConfigError> {
        let mut g = match (&self.gammas, self.gamma_range, self.gamma) {
            (Some(list), None, None) => list.clone(),
            (None, Some(r), None) => {
                if r.count == 0 {
                    return Err(bad("gamma_range", r, "empty range"));
                }
                nlsvirial::sweep::log_spaced(r.lo, r.hi, r.count).map_err(|e| bad("gamma_range", r, e.to_string()))?
            }
            (None, None, None) => default(),
            _ => return Err(bad("gamma", "(several)", "give only one of gamma, gammas, gamma_range")),
        };
        if g.is_empty() {
            return Err(bad("gammas", "", "empty list"));
        }
        if let Some(x) = g.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
            return Err(bad("gammas", x, "every gamma must be positive"));
        }
        g.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        g.dedup();
        Ok(g)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("nlsvirial-out"))
    }

    pub fn workers(&self) -> Result<usize, ConfigError> {
        match self.workers {
            Some(0) => Err(bad("workers", 0, "must be positive")),
            Some(w) => Ok(w),
            None => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
        }
    }
}
