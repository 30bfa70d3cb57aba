//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! system.builtin = rigid_body
//! system.a = 1
//! x0 = 1, 1, 1
//! integrator.h = 1e-3
//! output.format = csv
//! ```
//!
//! An inline system replaces `system.builtin` with polynomial strings:
//! `system.P12`, `system.P13`, `system.P23` (missing entries are zero),
//! `system.H` and `system.S`, optionally quoted.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::integrate::{IntegratorConfig, Method};
use crate::dynamics::MetriplecticSystem;
use crate::fields::{PoissonField, PolyParseError, ScalarField};
use crate::linalg3::Vec3;
use crate::systems::{self, RegistryError};

/// Default H drift tolerance, relative to `1 + |H(x0)|`.
pub const DEFAULT_H_DRIFT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {reason}")]
    BadValue { line: usize, key: String, reason: String },
    #[error("line {line}: bad polynomial for {key}: {source}")]
    BadPolynomial { line: usize, key: String, source: PolyParseError },
    #[error("no system given; set system.builtin or system.H and system.S")]
    MissingSystem,
    #[error("system.builtin cannot be combined with inline key system.{0}")]
    ConflictingSystem(String),
    #[error("inline system is missing system.{0}")]
    IncompleteInline(&'static str),
    #[error("invalid integrator settings: {0}")]
    Integrator(String),
    #[error(transparent)]
    Registry(RegistryError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSource {
    Builtin { name: String, params: BTreeMap<String, f64> },
    Inline { name: String, p12: ScalarField, p13: ScalarField, p23: ScalarField, h: ScalarField, s: ScalarField },
}

impl SystemSource {
    /// Builds the system; degree or finiteness violations surface here,
    /// not at parse time.
    pub fn build(&self) -> Result<MetriplecticSystem, RegistryError> {
        match self {
            SystemSource::Builtin { name, params } => Ok(systems::builtin(name, params)?.into_system()?),
            SystemSource::Inline { name, p12, p13, p23, h, s } => Ok(MetriplecticSystem::new(
                name.clone(),
                PoissonField::new(p12.clone(), p13.clone(), p23.clone()),
                h.clone(),
                s.clone(),
            )?),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("expected csv or json, got {s:?}")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: OutputFormat,
    /// Write every `every`-th monitored sample; the last is always written.
    pub every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { path: None, format: OutputFormat::Csv, every: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChecksConfig {
    pub casimir: bool,
    pub ortho: bool,
    pub monotone: bool,
    /// Allowed `max|H(t) − H(0)|` relative to `1 + |H(0)|`.
    pub h_drift_tol: f64,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        ChecksConfig { casimir: true, ortho: true, monotone: true, h_drift_tol: DEFAULT_H_DRIFT_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub system: SystemSource,
    pub x0: Option<Vec3>,
    pub integrator: IntegratorConfig,
    pub output: OutputConfig,
    pub checks: ChecksConfig,
}

const INLINE_KEYS: [(&str, &str); 5] = [("p12", "P12"), ("p13", "P13"), ("p23", "P23"), ("h", "H"), ("s", "S")];

fn unquote(v: &str) -> &str {
    v.strip_prefix('"').and_then(|r| r.strip_suffix('"')).unwrap_or(v)
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    let bad = |reason: String| ConfigError::BadValue { line, key: key.into(), reason };
    let x: f64 = v.parse().map_err(|_| bad(format!("{v:?} is not a number")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad(format!("{v:?} is not finite")))
    }
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse()
        .map_err(|_| ConfigError::BadValue { line, key: key.into(), reason: format!("{v:?} is not a non-negative integer") })
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(ConfigError::BadValue { line, key: key.into(), reason: format!("expected true or false, got {v:?}") }),
    }
}

fn parse_vec3(line: usize, key: &str, v: &str) -> Result<Vec3, ConfigError> {
    let inner = v.strip_prefix('[').and_then(|r| r.strip_suffix(']')).unwrap_or(v);
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(ConfigError::BadValue { line, key: key.into(), reason: format!("expected three comma-separated numbers, got {v:?}") });
    }
    Ok(Vec3::new(parse_f64(line, key, parts[0])?, parse_f64(line, key, parts[1])?, parse_f64(line, key, parts[2])?))
}

impl FromStr for RunConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        let mut builtin: Option<String> = None;
        let mut name: Option<String> = None;
        let mut params: BTreeMap<String, (usize, f64)> = BTreeMap::new();
        let mut inline: BTreeMap<&'static str, ScalarField> = BTreeMap::new();
        let mut x0 = None;
        let mut integrator = IntegratorConfig::default();
        let mut output = OutputConfig::default();
        let mut checks = ChecksConfig::default();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split_once('#').map_or(raw, |(c, _)| c).trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), unquote(value.trim()));
            if key.is_empty() {
                return Err(ConfigError::Syntax { line });
            }
            if seen.insert(key.to_string(), line).is_some() {
                return Err(ConfigError::DuplicateKey { line, key: key.into() });
            }
            let unknown = || ConfigError::UnknownKey { line, key: key.into() };
            let (section, field) = key.split_once('.').unwrap_or(("", key));
            match (section, field) {
                ("", "x0") => x0 = Some(parse_vec3(line, key, value)?),
                ("system", "builtin") => builtin = Some(value.to_string()),
                ("system", "name") => name = Some(value.to_string()),
                ("system", f) => {
                    if let Some(&(_, canon)) = INLINE_KEYS.iter().find(|(_, c)| *c == f) {
                        let poly = value
                            .parse()
                            .map_err(|source| ConfigError::BadPolynomial { line, key: key.into(), source })?;
                        inline.insert(canon, poly);
                    } else if !f.is_empty() && f.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                        params.insert(f.to_string(), (line, parse_f64(line, key, value)?));
                    } else {
                        return Err(unknown());
                    }
                }
                ("integrator", f) => match f {
                    "method" => {
                        integrator.method = Method::parse(value).ok_or_else(|| ConfigError::BadValue {
                            line,
                            key: key.into(),
                            reason: format!("expected rk4_fixed or rk45_adaptive, got {value:?}"),
                        })?
                    }
                    "h" => integrator.h = parse_f64(line, key, value)?,
                    "t_end" => integrator.t_end = parse_f64(line, key, value)?,
                    "abs_tol" => integrator.abs_tol = parse_f64(line, key, value)?,
                    "rel_tol" => integrator.rel_tol = parse_f64(line, key, value)?,
                    "monitor_every" => integrator.monitor_every = parse_usize(line, key, value)?,
                    "stop_at_rest" => integrator.stop_at_rest = parse_bool(line, key, value)?,
                    "rest_tol" => integrator.rest_tol = parse_f64(line, key, value)?,
                    "rest_window" => integrator.rest_window = parse_usize(line, key, value)?,
                    _ => return Err(unknown()),
                },
                ("output", f) => match f {
                    "path" => output.path = Some(value.to_string()),
                    "format" => {
                        output.format = value
                            .parse()
                            .map_err(|reason| ConfigError::BadValue { line, key: key.into(), reason })?
                    }
                    "every" => {
                        output.every = parse_usize(line, key, value)?;
                        if output.every == 0 {
                            return Err(ConfigError::BadValue { line, key: key.into(), reason: "must be at least 1".into() });
                        }
                    }
                    _ => return Err(unknown()),
                },
                ("checks", f) => match f {
                    "casimir" => checks.casimir = parse_bool(line, key, value)?,
                    "ortho" => checks.ortho = parse_bool(line, key, value)?,
                    "monotone" => checks.monotone = parse_bool(line, key, value)?,
                    "h_drift_tol" => {
                        checks.h_drift_tol = parse_f64(line, key, value)?;
                        if checks.h_drift_tol < 0.0 {
                            return Err(ConfigError::BadValue { line, key: key.into(), reason: "must be non-negative".into() });
                        }
                    }
                    _ => return Err(unknown()),
                },
                _ => return Err(unknown()),
            }
        }

        integrator.validate().map_err(|e| ConfigError::Integrator(e.to_string()))?;

        let system = match builtin {
            Some(b) => {
                if let Some(k) = inline.keys().next() {
                    return Err(ConfigError::ConflictingSystem((*k).to_string()));
                }
                let plain: BTreeMap<String, f64> = params.iter().map(|(k, (_, v))| (k.clone(), *v)).collect();
                // reject unknown names and parameters here so they count as
                // config errors; degree problems are left to `build`
                systems::builtin(&b, &plain).map_err(|e| match e {
                    RegistryError::UnknownParameter { ref key, .. } => ConfigError::UnknownKey {
                        line: params[key].0,
                        key: format!("system.{key}"),
                    },
                    other => ConfigError::Registry(other),
                })?;
                SystemSource::Builtin { name: name.unwrap_or(b), params: plain }
            }
            None => {
                if let Some((k, (line, _))) = params.iter().next() {
                    return Err(ConfigError::UnknownKey { line: *line, key: format!("system.{k}") });
                }
                if inline.is_empty() {
                    return Err(ConfigError::MissingSystem);
                }
                let mut take = |k: &'static str| inline.remove(k);
                let h = take("H").ok_or(ConfigError::IncompleteInline("H"))?;
                let s = take("S").ok_or(ConfigError::IncompleteInline("S"))?;
                SystemSource::Inline {
                    name: name.unwrap_or_else(|| "inline".into()),
                    p12: take("P12").unwrap_or_default(),
                    p13: take("P13").unwrap_or_default(),
                    p23: take("P23").unwrap_or_default(),
                    h,
                    s,
                }
            }
        };

        Ok(RunConfig { system, x0, integrator, output, checks })
    }
}

impl RunConfig {
    pub fn build_system(&self) -> Result<MetriplecticSystem, RegistryError> {
        self.system.build()
    }
}
