// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: flat `key=value` text grouped in `[section]`s.
//!
//! ```text
//! [model]
//! g = 10
//! kappa = 2.7
//!
//! [scan]
//! delta = -20:20:41
//! ```
//!
//! Frequencies are `x/2π` in MHz unless `[run] angular = true`, in which case
//! they are taken as rad/μs. Times are in μs. Axes are `min:max:points`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use countstat::models::{CavityParams, DqdParams, RestrictedParams, Splitting};
use countstat::statistics::Axis;
use countstat::units::from_mhz;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key {section}.{key}")]
    UnknownKey { section: String, key: String },
    #[error("bad value for {section}.{key}: {message}")]
    BadValue { section: String, key: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    /// A frequency, converted to rad/μs unless `run.angular` is set.
    Frequency,
    Real,
    Count,
    Flag,
    Path,
    /// `min:max:points`; `true` when the bounds are frequencies.
    Axis(bool),
    Splitting,
    LgMode,
}

struct Field {
    section: &'static str,
    key: &'static str,
    kind: Kind,
    default: Option<&'static str>,
}

const fn field(section: &'static str, key: &'static str, kind: Kind, default: Option<&'static str>) -> Field {
    Field { section, key, kind, default }
}

/// Every accepted key. Defaults follow the cavity parameters
/// `g/2π = 10 MHz`, `κ/2π = 2.7 MHz`.
const SCHEMA: &[Field] = &[
    field("run", "seed", Kind::Count, Some("20261016")),
    field("run", "out", Kind::Path, Some(".")),
    field("run", "angular", Kind::Flag, Some("false")),
    field("model", "g", Kind::Frequency, Some("10")),
    field("model", "kappa", Kind::Frequency, Some("2.7")),
    field("model", "gamma", Kind::Frequency, Some("0")),
    field("model", "delta", Kind::Frequency, Some("0")),
    field("model", "fock_cutoff", Kind::Count, Some("1")),
    field("model", "splitting", Kind::Splitting, Some("quarter")),
    field("dqd", "epsilon", Kind::Frequency, Some("0")),
    field("dqd", "t", Kind::Frequency, Some("1")),
    field("dqd", "gamma_left", Kind::Frequency, Some("10")),
    field("dqd", "gamma_right", Kind::Frequency, Some("2.7")),
    field("scan", "mode", Kind::LgMode, Some("adjusted")),
    field("scan", "delta", Kind::Axis(true), Some("-20:20:41")),
    field("scan", "g", Kind::Axis(true), Some("0.5:20:40")),
    field("scan", "tau", Kind::Axis(false), Some("0.005:0.2:40")),
    field("scan", "loss", Kind::Axis(true), Some("0.5:15:30")),
    field("lags", "max_us", Kind::Real, Some("1")),
    field("lags", "points", Kind::Count, Some("1001")),
    field("protocol", "period_us", Kind::Real, None),
    field("protocol", "pulses", Kind::Count, Some("100000")),
    field("protocol", "efficiency", Kind::Real, Some("1")),
    field("estimate", "bin_us", Kind::Real, Some("0.005")),
    field("estimate", "tau_max_us", Kind::Real, Some("0.5")),
    field("io", "input", Kind::Path, None),
    field("tolerance", "g2_agreement", Kind::Real, Some("1e-8")),
];

fn lookup(section: &str, key: &str) -> Result<&'static Field, ConfigError> {
    SCHEMA.iter().find(|f| f.section == section && f.key == key).ok_or_else(|| {
        ConfigError::UnknownKey { section: section.to_string(), key: key.to_string() }
    })
}

/// Which Leggett–Garg map `lg-map` computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LgMode {
    Adjusted,
    Raw,
}

/// A scan axis as written in the config, before unit conversion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl fmt::Display for AxisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.points)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Value {
    Real(f64),
    Count(u64),
    Flag(bool),
    Path(PathBuf),
    Axis(AxisSpec),
    Splitting(Splitting),
    LgMode(LgMode),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(x) => write!(f, "{x}"),
            Value::Count(n) => write!(f, "{n}"),
            Value::Flag(b) => write!(f, "{b}"),
            Value::Path(p) => write!(f, "{}", p.display()),
            Value::Axis(a) => write!(f, "{a}"),
            Value::Splitting(s) => f.write_str(s.name()),
            Value::LgMode(LgMode::Adjusted) => f.write_str("adjusted"),
            Value::LgMode(LgMode::Raw) => f.write_str("raw"),
        }
    }
}

fn parse_value(field: &Field, text: &str) -> Result<Value, ConfigError> {
    let bad = |message: String| ConfigError::BadValue {
        section: field.section.to_string(),
        key: field.key.to_string(),
        message,
    };
    let real = |s: &str| -> Result<f64, ConfigError> {
        let x: f64 = s.trim().parse().map_err(|_| bad(format!("{s:?} is not a number")))?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(bad(format!("{s:?} is not finite")))
        }
    };
    let count = |s: &str| -> Result<u64, ConfigError> {
        s.trim().parse().map_err(|_| bad(format!("{s:?} is not a non-negative integer")))
    };
    Ok(match field.kind {
        Kind::Frequency | Kind::Real => Value::Real(real(text)?),
        Kind::Count => Value::Count(count(text)?),
        Kind::Flag => Value::Flag(match text {
            "true" => true,
            "false" => false,
            _ => return Err(bad(format!("expected true or false, got {text:?}"))),
        }),
        Kind::Path => {
            if text.is_empty() {
                return Err(bad("empty path".into()));
            }
            Value::Path(PathBuf::from(text))
        }
        Kind::Axis(_) => {
            let parts: Vec<&str> = text.split(':').collect();
            let [min, max, points] = parts[..] else {
                return Err(bad(format!("expected min:max:points, got {text:?}")));
            };
            let spec = AxisSpec { min: real(min)?, max: real(max)?, points: count(points)? as usize };
            if spec.points < 2 || !(spec.max > spec.min) {
                return Err(bad(format!("need max > min and at least 2 points, got {text:?}")));
            }
            Value::Axis(spec)
        }
        Kind::Splitting => Value::Splitting(
            Splitting::parse(text).ok_or_else(|| bad(format!("expected half, full or quarter, got {text:?}")))?,
        ),
        Kind::LgMode => Value::LgMode(match text {
            "adjusted" => LgMode::Adjusted,
            "raw" => LgMode::Raw,
            _ => return Err(bad(format!("expected adjusted or raw, got {text:?}"))),
        }),
    })
}

/// Explicitly set values, keyed by `(section, key)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<(&'static str, &'static str), Value>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut section: Option<String> = None;
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = Some(name.trim().to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                message: format!("expected key = value, got {line:?}"),
            })?;
            let section = section.as_deref().ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                message: "key outside of a [section]".into(),
            })?;
            cfg.set(section, key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Sets one key from its text form, replacing any earlier value.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), ConfigError> {
        let field = lookup(section, key)?;
        let value = parse_value(field, value)?;
        self.values.insert((field.section, field.key), value);
        Ok(())
    }

    /// Applies every value set in `other` on top of `self`.
    pub fn merge(&mut self, other: &RunConfig) {
        for (k, v) in &other.values {
            self.values.insert(*k, v.clone());
        }
    }

    /// Config text for the explicitly set keys, in schema order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut current = "";
        for f in SCHEMA {
            if let Some(v) = self.values.get(&(f.section, f.key)) {
                if f.section != current {
                    if !current.is_empty() {
                        out.push('\n');
                    }
                    out.push_str(&format!("[{}]\n", f.section));
                    current = f.section;
                }
                out.push_str(&format!("{} = {v}\n", f.key));
            }
        }
        out
    }

    /// `section.key=value` for every key that has a value or a default.
    pub fn snapshot(&self) -> Vec<String> {
        SCHEMA
            .iter()
            .filter_map(|f| {
                let v = self.value(f)?;
                Some(format!("{}.{}={v}", f.section, f.key))
            })
            .collect()
    }

    fn value(&self, f: &Field) -> Option<Value> {
        match self.values.get(&(f.section, f.key)) {
            Some(v) => Some(v.clone()),
            None => f.default.map(|d| parse_value(f, d).expect("schema defaults parse")),
        }
    }

    fn get(&self, section: &str, key: &str) -> Option<Value> {
        self.value(lookup(section, key).expect("key is in the schema"))
    }

    pub fn angular(&self) -> bool {
        matches!(self.get("run", "angular"), Some(Value::Flag(true)))
    }

    fn to_internal(&self, x: f64) -> f64 {
        if self.angular() {
            x
        } else {
            from_mhz(x)
        }
    }

    /// A frequency in rad/μs.
    pub fn frequency(&self, section: &str, key: &str) -> f64 {
        match self.get(section, key) {
            Some(Value::Real(x)) => self.to_internal(x),
            other => panic!("{section}.{key} is not a frequency: {other:?}"),
        }
    }

    pub fn real(&self, section: &str, key: &str) -> Option<f64> {
        match self.get(section, key)? {
            Value::Real(x) => Some(x),
            other => panic!("{section}.{key} is not a number: {other:?}"),
        }
    }

    pub fn count(&self, section: &str, key: &str) -> u64 {
        match self.get(section, key) {
            Some(Value::Count(n)) => n,
            other => panic!("{section}.{key} is not a count: {other:?}"),
        }
    }

    pub fn path(&self, section: &str, key: &str) -> Option<PathBuf> {
        match self.get(section, key)? {
            Value::Path(p) => Some(p),
            other => panic!("{section}.{key} is not a path: {other:?}"),
        }
    }

    pub fn seed(&self) -> u64 {
        self.count("run", "seed")
    }

    pub fn out_dir(&self) -> PathBuf {
        self.path("run", "out").expect("run.out has a default")
    }

    pub fn splitting(&self) -> Splitting {
        match self.get("model", "splitting") {
            Some(Value::Splitting(s)) => s,
            other => panic!("model.splitting: {other:?}"),
        }
    }

    pub fn lg_mode(&self) -> LgMode {
        match self.get("scan", "mode") {
            Some(Value::LgMode(m)) => m,
            other => panic!("scan.mode: {other:?}"),
        }
    }

    /// A scan axis in internal units, named after its key.
    pub fn axis(&self, key: &str) -> Axis {
        let field = lookup("scan", key).expect("key is in the schema");
        let Some(Value::Axis(spec)) = self.value(field) else {
            panic!("scan.{key} is not an axis");
        };
        let (min, max, unit) = match field.kind {
            Kind::Axis(true) => (self.to_internal(spec.min), self.to_internal(spec.max), "rad/us"),
            _ => (spec.min, spec.max, "us"),
        };
        Axis::linspace(key, unit, min, max, spec.points).expect("validated when parsed")
    }

    /// Converts an internal frequency back to the unit used in the config.
    pub fn display_frequency(&self, x: f64) -> f64 {
        if self.angular() {
            x
        } else {
            countstat::units::to_mhz(x)
        }
    }

    pub fn frequency_unit(&self) -> &'static str {
        if self.angular() {
            "rad/us"
        } else {
            "MHz"
        }
    }

    pub fn cavity(&self) -> CavityParams {
        let mut p = CavityParams::new(
            self.frequency("model", "g"),
            self.frequency("model", "kappa"),
            self.frequency("model", "gamma"),
            self.frequency("model", "delta"),
        );
        p.fock_cutoff = self.count("model", "fock_cutoff") as usize;
        p
    }

    pub fn restricted(&self) -> RestrictedParams {
        let p = self.cavity();
        RestrictedParams { delta: p.delta(), g: p.g, kappa: p.kappa, splitting: self.splitting() }
    }

    pub fn dqd(&self) -> DqdParams {
        DqdParams::new(
            self.frequency("dqd", "epsilon"),
            self.frequency("dqd", "t"),
            self.frequency("dqd", "gamma_left"),
            self.frequency("dqd", "gamma_right"),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# comment
[model]
g = 12.5
kappa=3

[scan]
delta = -5:5:11
mode = raw

[run]
angular = true
out = results/a b
";

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.frequency("model", "g"), 12.5);
        assert_eq!(cfg.lg_mode(), LgMode::Raw);
        assert_eq!(cfg.axis("delta").values.len(), 11);
        assert_eq!(cfg.out_dir(), PathBuf::from("results/a b"));
        let again = RunConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn defaults_are_in_mhz() {
        let cfg = RunConfig::default();
        assert!((cfg.frequency("model", "kappa") - from_mhz(2.7)).abs() < 1e-12);
        assert_eq!(cfg.splitting(), Splitting::Quarter);
        assert!(cfg.real("protocol", "period_us").is_none());
        assert!(cfg.snapshot().iter().any(|l| l == "model.g=10"));
    }

    #[test]
    fn later_values_win() {
        let mut cfg = RunConfig::parse(SAMPLE).unwrap();
        let mut flags = RunConfig::default();
        flags.set("model", "g", "1").unwrap();
        cfg.merge(&flags);
        assert_eq!(cfg.frequency("model", "g"), 1.0);
        assert_eq!(cfg.frequency("model", "kappa"), 3.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RunConfig::parse("g = 1"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(RunConfig::parse("[model]\nx = 1"), Err(ConfigError::UnknownKey { .. })));
        assert!(matches!(RunConfig::parse("[model]\ng = fast"), Err(ConfigError::BadValue { .. })));
        assert!(RunConfig::parse("[scan]\ntau = 1:0:5").is_err());
        assert!(RunConfig::parse("[scan]\ntau = 0:1:1").is_err());
        assert!(RunConfig::parse("[model]\nsplitting = third").is_err());
        assert!(RunConfig::parse("[model]\nkappa\n").is_err());
    }
}
