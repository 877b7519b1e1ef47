//! Flat `key = value` scenario descriptors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use qeffect::incompat::{DykstraOptions, LowerBoundOptions};
use qeffect::TolerancePolicy;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything a scenario run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub seed: u64,
    /// Model parameters as given; each scenario validates its own keys.
    pub params: BTreeMap<String, String>,
    pub tolerances: Tolerances,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Tolerance overrides applied on top of the library defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub eig_zero: f64,
    pub psd_slack: f64,
    pub rank_rel: f64,
    pub dykstra_tol: f64,
    pub dykstra_max_iter: usize,
    pub lower_bound_tol: f64,
    pub threshold_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let pol = TolerancePolicy::default();
        let dykstra = DykstraOptions::default();
        Self {
            eig_zero: pol.eig_zero,
            psd_slack: pol.psd_slack,
            rank_rel: pol.rank_rel,
            dykstra_tol: dykstra.tol,
            dykstra_max_iter: dykstra.max_iter,
            lower_bound_tol: LowerBoundOptions::default().tol,
            threshold_tol: 1e-3,
        }
    }
}

pub const TOLERANCE_KEYS: [&str; 7] = [
    "eig_zero",
    "psd_slack",
    "rank_rel",
    "dykstra_tol",
    "dykstra_max_iter",
    "lower_bound_tol",
    "threshold_tol",
];

impl Tolerances {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let float = || -> Result<f64, CliError> {
            let v: f64 = value.trim().parse().map_err(|_| {
                CliError::invalid(format!("tolerance {key}: `{value}` is not a number"))
            })?;
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::invalid(format!(
                    "tolerance {key} must be positive"
                )));
            }
            Ok(v)
        };
        match key {
            "eig_zero" => self.eig_zero = float()?,
            "psd_slack" => self.psd_slack = float()?,
            "rank_rel" => self.rank_rel = float()?,
            "dykstra_tol" => self.dykstra_tol = float()?,
            "lower_bound_tol" => self.lower_bound_tol = float()?,
            "threshold_tol" => self.threshold_tol = float()?,
            "dykstra_max_iter" => {
                self.dykstra_max_iter = value.trim().parse().map_err(|_| {
                    CliError::invalid(format!("tolerance {key}: `{value}` is not a count"))
                })?
            }
            _ => {
                return Err(CliError::invalid(format!(
                    "unknown tolerance `{key}` (known: {})",
                    TOLERANCE_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn policy(&self) -> Result<TolerancePolicy, CliError> {
        let pol = TolerancePolicy {
            eig_zero: self.eig_zero,
            psd_slack: self.psd_slack,
            rank_rel: self.rank_rel,
        };
        pol.validate()?;
        Ok(pol)
    }

    pub fn dykstra(&self) -> DykstraOptions {
        DykstraOptions {
            tol: self.dykstra_tol,
            max_iter: self.dykstra_max_iter,
            ..DykstraOptions::default()
        }
    }

    pub fn lower_bound(&self) -> LowerBoundOptions {
        LowerBoundOptions {
            tol: self.lower_bound_tol,
            dykstra: self.dykstra(),
            ..LowerBoundOptions::default()
        }
    }
}

/// Splits `key=value`, trimming both sides.
pub fn split_pair(item: &str) -> Result<(String, String), CliError> {
    let (k, v) = item
        .split_once('=')
        .ok_or_else(|| CliError::invalid(format!("expected key=value, got `{item}`")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(CliError::invalid(format!("empty key in `{item}`")));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

/// Parses a config file: one `key = value` per line, `#` starts a comment.
/// `scenario`, `seed` and `out` are reserved; `tol.<name>` sets a tolerance;
/// anything else is a model parameter.
pub fn parse_config_text(text: &str) -> Result<ScenarioConfig, CliError> {
    let mut cfg = ScenarioConfig {
        scenario: String::new(),
        seed: 0,
        params: BTreeMap::new(),
        tolerances: Tolerances::default(),
        out: None,
    };
    let mut seen = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = split_pair(line)
            .map_err(|e| CliError::invalid(format!("line {}: {}", lineno + 1, e.message)))?;
        if seen.insert(k.clone(), lineno + 1).is_some() {
            return Err(CliError::invalid(format!(
                "line {}: duplicate key `{k}`",
                lineno + 1
            )));
        }
        cfg.apply(&k, &v)?;
    }
    Ok(cfg)
}

impl ScenarioConfig {
    pub fn new(scenario: &str, seed: u64) -> Self {
        Self {
            scenario: scenario.to_string(),
            seed,
            params: BTreeMap::new(),
            tolerances: Tolerances::default(),
            out: None,
        }
    }

    /// Sets one key with the precedence rules of the config file.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "scenario" => self.scenario = value.to_string(),
            "seed" => self.seed = parse_seed(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            _ => match key.strip_prefix("tol.") {
                Some(t) => self.tolerances.set(t, value)?,
                None => {
                    self.params.insert(key.to_string(), value.to_string());
                }
            },
        }
        Ok(())
    }

    pub fn with(mut self, key: &str, value: &str) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }
}

pub fn parse_seed(value: &str) -> Result<u64, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::invalid(format!("seed `{value}` is not a 64-bit unsigned integer")))
}

/// Typed access to scenario parameters. Every read is recorded so that keys
/// the scenario never asked for can be rejected afterwards.
pub struct Params<'a> {
    raw: &'a BTreeMap<String, String>,
    used: BTreeMap<String, String>,
}

impl<'a> Params<'a> {
    pub fn new(raw: &'a BTreeMap<String, String>) -> Self {
        Self {
            raw,
            used: BTreeMap::new(),
        }
    }

    fn text(&mut self, key: &str, default: &str) -> String {
        let v = self
            .raw
            .get(key)
            .cloned()
            .unwrap_or_else(|| default.to_string());
        self.used.insert(key.to_string(), v.clone());
        v
    }

    pub fn string(&mut self, key: &str, default: &str) -> String {
        self.text(key, default)
    }

    pub fn usize(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        let v = self.text(key, &default.to_string());
        v.parse()
            .map_err(|_| CliError::invalid(format!("{key}: `{v}` is not a non-negative integer")))
    }

    pub fn f64(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.text(key, &default.to_string());
        parse_f64(key, &v)
    }

    pub fn f64_list(&mut self, key: &str, default: &str) -> Result<Vec<f64>, CliError> {
        let v = self.text(key, default);
        split_list(&v).map(|s| parse_f64(key, s)).collect()
    }

    pub fn usize_list(&mut self, key: &str, default: &str) -> Result<Vec<usize>, CliError> {
        let v = self.text(key, default);
        split_list(&v)
            .map(|s| {
                s.parse()
                    .map_err(|_| CliError::invalid(format!("{key}: `{s}` is not an integer")))
            })
            .collect()
    }

    /// Fails on keys that were given but never read.
    pub fn finish(self) -> Result<BTreeMap<String, String>, CliError> {
        let unknown: Vec<&String> = self
            .raw
            .keys()
            .filter(|k| !self.used.contains_key(*k))
            .collect();
        if !unknown.is_empty() {
            let known: Vec<&String> = self.used.keys().collect();
            return Err(CliError::invalid(format!(
                "unknown parameter(s) {unknown:?}; this scenario accepts {known:?}"
            )));
        }
        Ok(self.used)
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| CliError::invalid(format!("{key}: `{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(CliError::invalid(format!("{key}: `{v}` is not finite")));
    }
    Ok(x)
}
