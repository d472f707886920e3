//! Run configuration: defaults, `key = value` / JSON config files, and the
//! validation shared by every subcommand.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::experiments::{ExperimentConfig, InitialProfile, ProfileShape, SweepConfig};
use crate::params::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Kdv,
    Peregrine,
    Waterwave,
    Compare,
    Sweep,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Kdv => "kdv",
            Self::Peregrine => "peregrine",
            Self::Waterwave => "waterwave",
            Self::Compare => "compare",
            Self::Sweep => "sweep",
        })
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "kdv" => Ok(Self::Kdv),
            "peregrine" => Ok(Self::Peregrine),
            "waterwave" => Ok(Self::Waterwave),
            "compare" => Ok(Self::Compare),
            "sweep" => Ok(Self::Sweep),
            other => Err(format!("unknown model '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format '{other}' (csv | json)")),
        }
    }
}

/// A configuration problem, always tied to the offending key.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config key '{key}': {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: &str, message: impl Into<String>) -> Self {
        Self {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: Model,
    pub length: f64,
    pub n: usize,
    pub nz: usize,
    pub eps: f64,
    pub mu: f64,
    pub mu_list: Vec<f64>,
    pub eps_ratio: f64,
    pub profile: ProfileShape,
    pub amplitude: f64,
    pub width: f64,
    /// `None` centres the profile in the cell.
    pub center: Option<f64>,
    pub dt: f64,
    pub horizon: f64,
    pub sample_interval: f64,
    pub hs_index: f64,
    pub out: PathBuf,
    pub workers: usize,
    /// Reserved; every run is deterministic.
    pub seed: u64,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        let exp = ExperimentConfig::default();
        let sweep = SweepConfig::default();
        Self {
            model: Model::Compare,
            length: exp.length,
            n: exp.n,
            nz: exp.nz,
            eps: exp.eps,
            mu: exp.mu,
            mu_list: sweep.mus,
            eps_ratio: sweep.eps_ratio,
            profile: exp.profile.shape,
            amplitude: exp.profile.amplitude,
            width: exp.profile.width,
            center: exp.profile.center,
            dt: exp.dt,
            horizon: exp.horizon,
            sample_interval: exp.sample_interval,
            hs_index: exp.hs_index,
            out: PathBuf::from("out"),
            workers: sweep.workers,
            seed: 0,
            format: OutputFormat::Csv,
        }
    }
}

/// Keys accepted in config files (and their flag spellings).
pub const KEYS: [&str; 20] = [
    "model",
    "L",
    "N",
    "Nz",
    "eps",
    "mu",
    "mu_list",
    "eps_ratio",
    "profile",
    "amplitude",
    "width",
    "center",
    "dt",
    "T",
    "sample_interval",
    "hs_index",
    "out",
    "workers",
    "seed",
    "format",
];

fn parse_num<T: FromStr>(key: &str, raw: &str) -> Result<T, ConfigError> {
    raw.trim()
        .parse()
        .map_err(|_| ConfigError::new(key, format!("cannot parse '{}'", raw.trim())))
}

fn parse_list(key: &str, raw: &str) -> Result<Vec<f64>, ConfigError> {
    raw.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        let text = |r: &str| r.trim().trim_matches('"').to_string();
        match key {
            "model" => self.model = text(raw).parse().map_err(|e| ConfigError::new(key, e))?,
            "L" => self.length = parse_num(key, raw)?,
            "N" => self.n = parse_num(key, raw)?,
            "Nz" => self.nz = parse_num(key, raw)?,
            "eps" => self.eps = parse_num(key, raw)?,
            "mu" => self.mu = parse_num(key, raw)?,
            "mu_list" => self.mu_list = parse_list(key, raw)?,
            "eps_ratio" => self.eps_ratio = parse_num(key, raw)?,
            "profile" => self.profile = text(raw).parse().map_err(|e| ConfigError::new(key, e))?,
            "amplitude" => self.amplitude = parse_num(key, raw)?,
            "width" => self.width = parse_num(key, raw)?,
            "center" => self.center = Some(parse_num(key, raw)?),
            "dt" => self.dt = parse_num(key, raw)?,
            "T" => self.horizon = parse_num(key, raw)?,
            "sample_interval" => self.sample_interval = parse_num(key, raw)?,
            "hs_index" => self.hs_index = parse_num(key, raw)?,
            "out" => self.out = PathBuf::from(text(raw)),
            "workers" => self.workers = parse_num(key, raw)?,
            "seed" => self.seed = parse_num(key, raw)?,
            "format" => self.format = text(raw).parse().map_err(|e| ConfigError::new(key, e))?,
            _ => return Err(ConfigError::new(key, "unknown key")),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file. `#` starts a comment.
    pub fn apply_key_values(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::new(line, format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Applies a JSON object with the same keys as the text format.
    pub fn apply_json(&mut self, text: &str) -> Result<(), ConfigError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| ConfigError::new("<json>", e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| ConfigError::new("<json>", "top level must be an object"))?;
        for (key, v) in obj {
            let raw = match v {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                Value::Array(items) => items
                    .iter()
                    .map(|x| {
                        x.as_f64()
                            .map(|f| f.to_string())
                            .ok_or_else(|| ConfigError::new(key, "list entries must be numbers"))
                    })
                    .collect::<Result<Vec<_>, _>>()?
                    .join(","),
                other => return Err(ConfigError::new(key, format!("unsupported value {other}"))),
            };
            if matches!(v, Value::Number(_)) && matches!(key.as_str(), "model" | "profile" | "format" | "out") {
                return Err(ConfigError::new(key, "expected a string"));
            }
            if matches!(v, Value::String(_)) && !matches!(key.as_str(), "model" | "profile" | "format" | "out") && KEYS.contains(&key.as_str()) {
                return Err(ConfigError::new(key, "expected a number"));
            }
            self.set(key, &raw)?;
        }
        Ok(())
    }

    /// Loads a config file; `.json` files are read as JSON, anything else
    /// as `key = value` lines.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            self.apply_json(&text)
        } else {
            self.apply_key_values(&text)
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::new(key, format!("must be positive, got {v}")))
            }
        };
        positive("L", self.length)?;
        positive("eps", self.eps)?;
        positive("mu", self.mu)?;
        positive("eps_ratio", self.eps_ratio)?;
        positive("amplitude", self.amplitude)?;
        positive("width", self.width)?;
        positive("dt", self.dt)?;
        positive("T", self.horizon)?;
        positive("sample_interval", self.sample_interval)?;
        positive("hs_index", self.hs_index)?;
        if self.n < 8 || self.n % 2 != 0 {
            return Err(ConfigError::new("N", "must be even and >= 8"));
        }
        if self.nz < 4 {
            return Err(ConfigError::new("Nz", "must be >= 4"));
        }
        if self.workers == 0 {
            return Err(ConfigError::new("workers", "must be positive"));
        }
        if let Some(c) = self.center {
            if !(0.0..=self.length).contains(&c) {
                return Err(ConfigError::new("center", "must lie inside [0, L]"));
            }
        }
        if self.model == Model::Sweep {
            if self.mu_list.len() < 3 {
                return Err(ConfigError::new("mu_list", "needs at least 3 values"));
            }
            if self.mu_list.iter().any(|&m| !(m > 0.0)) {
                return Err(ConfigError::new("mu_list", "values must be positive"));
            }
            if self.mu_list.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(ConfigError::new("mu_list", "must be strictly decreasing"));
            }
            for &mu in &self.mu_list {
                ModelParams::new(self.eps_ratio * mu, mu)
                    .map_err(|e| ConfigError::new("mu_list", e.to_string()))?;
            }
        } else {
            ModelParams::new(self.eps, self.mu).map_err(|e| ConfigError::new("eps", e.to_string()))?;
        }
        let steps = self.horizon / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return Err(ConfigError::new("T", "must be a multiple of dt"));
        }
        let every = self.sample_interval / self.dt;
        if every.round() < 1.0 || (every - every.round()).abs() > 1e-6 * every.max(1.0) {
            return Err(ConfigError::new("sample_interval", "must be a multiple of dt"));
        }
        Ok(())
    }

    pub fn initial_profile(&self) -> InitialProfile {
        InitialProfile {
            shape: self.profile,
            amplitude: self.amplitude,
            width: self.width,
            center: self.center,
        }
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            length: self.length,
            n: self.n,
            nz: self.nz,
            eps: self.eps,
            mu: self.mu,
            profile: self.initial_profile(),
            dt: self.dt,
            horizon: self.horizon,
            sample_interval: self.sample_interval,
            hs_index: self.hs_index,
        }
    }

    pub fn sweep(&self) -> SweepConfig {
        SweepConfig {
            base: self.experiment(),
            mus: self.mu_list.clone(),
            eps_ratio: self.eps_ratio,
            workers: self.workers,
            ..SweepConfig::default()
        }
    }
}
