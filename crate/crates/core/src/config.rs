//! Plain-text `section.key = value` configuration with `#` comments.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

use crate::homoclinic::{GlobalMapTaylor, LocalNormalForm, Nonlinearity, Ordering, ReturnMapConfig};

/// Where a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Line(usize),
    Override(usize),
    Default,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Line(n) => write!(f, "line {n}"),
            Source::Override(n) => write!(f, "--set #{n}"),
            Source::Default => write!(f, "default"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{at}: malformed entry '{text}' (expected section.key = value)")]
    Malformed { at: Source, text: String },
    #[error("{at}: malformed key '{key}'")]
    BadKey { at: Source, key: String },
    #[error("{at}: unknown key '{key}'")]
    UnknownKey { at: Source, key: String },
    #[error("{at}: duplicate key '{key}'")]
    Duplicate { at: Source, key: String },
    #[error("{at}: invalid value for '{key}': {reason}")]
    BadValue { at: Source, key: String, reason: String },
    #[error("invalid model: {0}")]
    Model(String),
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    source: Source,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KeyValueConfig {
    entries: BTreeMap<String, Entry>,
    overrides: usize,
}

fn valid_key(key: &str) -> bool {
    let mut parts = key.split('.');
    let ok_part = |p: &str| {
        !p.is_empty() && p.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
    };
    match (parts.next(), parts.next(), parts.next()) {
        (Some(s), Some(k), None) => ok_part(s) && ok_part(k),
        _ => false,
    }
}

fn split_entry(text: &str, source: Source) -> Result<(String, String), ConfigError> {
    let Some((key, value)) = text.split_once('=') else {
        return Err(ConfigError::Malformed {
            at: source,
            text: text.to_string(),
        });
    };
    let (key, value) = (key.trim(), value.trim());
    if !valid_key(key) {
        return Err(ConfigError::BadKey {
            at: source,
            key: key.to_string(),
        });
    }
    if value.is_empty() {
        return Err(ConfigError::BadValue {
            at: source,
            key: key.to_string(),
            reason: "empty value".into(),
        });
    }
    Ok((key.to_string(), value.to_string()))
}

impl KeyValueConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let source = Source::Line(idx + 1);
            let (key, value) = split_entry(line, source)?;
            if cfg.entries.contains_key(&key) {
                return Err(ConfigError::Duplicate { at: source, key });
            }
            cfg.entries.insert(key, Entry { value, source });
        }
        Ok(cfg)
    }

    /// Applies a `key=value` override; later overrides win.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        self.overrides += 1;
        let source = Source::Override(self.overrides);
        let (key, value) = split_entry(assignment.trim(), source)?;
        self.entries.insert(key, Entry { value, source });
        Ok(())
    }

    /// Fills `key` with `value` unless already present.
    pub fn set_default(&mut self, key: &str, value: impl Into<String>) {
        self.entries.entry(key.to_string()).or_insert(Entry {
            value: value.into(),
            source: Source::Default,
        });
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn source(&self, key: &str) -> Option<Source> {
        self.entries.get(key).map(|e| e.source)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Fails on the first key that is neither listed nor under a listed
    /// `section.*` wildcard.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        let known = |key: &str| {
            allowed.iter().any(|a| match a.strip_suffix(".*") {
                Some(section) => key.split('.').next() == Some(section),
                None => *a == key,
            })
        };
        let mut unknown: Vec<_> = self.entries.iter().filter(|(k, _)| !known(k)).collect();
        unknown.sort_by_key(|(_, e)| match e.source {
            Source::Line(n) => (0, n),
            Source::Override(n) => (1, n),
            Source::Default => (2, 0),
        });
        match unknown.first() {
            Some((k, e)) => Err(ConfigError::UnknownKey {
                at: e.source,
                key: k.to_string(),
            }),
            None => Ok(()),
        }
    }

    fn bad(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::BadValue {
            at: self.source(key).unwrap_or(Source::Default),
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|e| self.bad(key, e.to_string())),
        }
    }

    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.parsed(key)?.ok_or_else(|| ConfigError::BadValue {
            at: Source::Default,
            key: key.to_string(),
            reason: "required key is missing".into(),
        })
    }

    /// Comma-separated reals.
    pub fn reals(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| self.bad(key, format!("'{}': {e}", t.trim()))))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    /// `(key, value)` pairs in key order.
    pub fn resolved(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, e)| (k.as_str(), e.value.as_str()))
    }

    /// The resolved configuration as a block of `prefix key = value` lines.
    pub fn header(&self, prefix: &str) -> String {
        self.resolved().map(|(k, v)| format!("{prefix}{k} = {v}\n")).collect()
    }
}

/// Keys understood by [`return_map_config`].
pub const RETURN_MAP_KEYS: &[&str] = &["local.*", "t1.*", "t2.*", "return.*"];

const LOCAL_KEYS: &[&str] = &["kind", "lambda", "gamma", "sign", "phi", "nonlinearity"];
const GLOBAL_KEYS: &[&str] = &["x_plus", "y_minus", "a", "b", "c", "d", "mu"];
const RETURN_KEYS: &[&str] = &["k", "m", "ordering"];

fn check_section(cfg: &KeyValueConfig, section: &str, keys: &[&str]) -> Result<(), ConfigError> {
    let allowed: Vec<String> = keys.iter().map(|k| format!("{section}.{k}")).collect();
    for (key, _) in cfg.resolved() {
        if key.split('.').next() == Some(section) && !allowed.iter().any(|a| a == key) {
            return Err(ConfigError::UnknownKey {
                at: cfg.source(key).unwrap_or(Source::Default),
                key: key.to_string(),
            });
        }
    }
    Ok(())
}

fn vector(cfg: &KeyValueConfig, key: &str, default: [f64; 2]) -> Result<Vector2<f64>, ConfigError> {
    match cfg.reals(key)?.as_deref() {
        None => Ok(Vector2::new(default[0], default[1])),
        Some([a]) => Ok(Vector2::new(*a, 0.0)),
        Some([a, b]) => Ok(Vector2::new(*a, *b)),
        Some(_) => Err(cfg.bad(key, "expected 1 or 2 comma-separated reals")),
    }
}

fn matrix(cfg: &KeyValueConfig, key: &str) -> Result<Matrix2<f64>, ConfigError> {
    match cfg.reals(key)?.as_deref() {
        None => Ok(Matrix2::zeros()),
        Some([a]) => Ok(Matrix2::new(*a, 0.0, 0.0, 0.0)),
        Some([a, b, c, d]) => Ok(Matrix2::new(*a, *b, *c, *d)),
        Some(_) => Err(cfg.bad(key, "expected 1 or 4 comma-separated reals (row-major)")),
    }
}

fn global_map(cfg: &KeyValueConfig, section: &str) -> Result<GlobalMapTaylor, ConfigError> {
    let key = |k: &str| format!("{section}.{k}");
    GlobalMapTaylor::new(
        vector(cfg, &key("x_plus"), [1.0, 0.0])?,
        cfg.parsed_or(&key("y_minus"), 1.0)?,
        matrix(cfg, &key("a"))?,
        vector(cfg, &key("b"), [1.0, 0.0])?,
        vector(cfg, &key("c"), [1.0, 0.0])?,
        cfg.parsed_or(&key("d"), 1.0)?,
        cfg.parsed_or(&key("mu"), 0.0)?,
    )
    .map_err(|e| ConfigError::Model(format!("{section}: {e}")))
}

/// Builds a return-map configuration; absent keys take the benchmark values
/// (`λ = 0.4`, `γ = 2`, unit global coefficients, `k = m = 12`).
pub fn return_map_config(cfg: &KeyValueConfig) -> Result<ReturnMapConfig, ConfigError> {
    check_section(cfg, "local", LOCAL_KEYS)?;
    check_section(cfg, "t1", GLOBAL_KEYS)?;
    check_section(cfg, "t2", GLOBAL_KEYS)?;
    check_section(cfg, "return", RETURN_KEYS)?;

    let model = |e: crate::Error| ConfigError::Model(e.to_string());
    let lambda = cfg.parsed_or("local.lambda", 0.4)?;
    let gamma = cfg.parsed_or("local.gamma", 2.0)?;
    let kind = cfg.get("local.kind").unwrap_or("saddle").to_ascii_lowercase();
    let local = match kind.as_str() {
        "saddle" => LocalNormalForm::saddle(lambda, gamma, cfg.parsed_or("local.sign", 1.0)?).map_err(model)?,
        "saddle-focus" | "focus" => {
            LocalNormalForm::saddle_focus(lambda, cfg.require("local.phi")?, gamma).map_err(model)?
        }
        other => return Err(cfg.bad("local.kind", format!("unknown kind '{other}'"))),
    };
    let nonlinearity = match cfg.get("local.nonlinearity").unwrap_or("linear").to_ascii_lowercase().as_str() {
        "linear" => Nonlinearity::Linear,
        "test-cubic" | "testcubic" => Nonlinearity::TestCubic,
        other => return Err(cfg.bad("local.nonlinearity", format!("unknown nonlinearity '{other}'"))),
    };
    let local = local.with_nonlinearity(nonlinearity).map_err(model)?;

    let t1 = global_map(cfg, "t1")?;
    let t2 = global_map(cfg, "t2")?;
    let k: usize = cfg.parsed_or("return.k", 12)?;
    let m: usize = cfg.parsed_or("return.m", 12)?;
    let ordering = match cfg.get("return.ordering").unwrap_or("auto") {
        "auto" => Ordering::for_pair(k, m),
        other => other.parse::<Ordering>().map_err(|e| cfg.bad("return.ordering", e.to_string()))?,
    };
    ReturnMapConfig::with_ordering(local, t1, t2, k, m, ordering).map_err(model)
}
