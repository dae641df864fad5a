//! Flat run configuration.
//!
//! ```text
//! file  := (line NL)*
//! line  := WS* | WS* "#" any* | WS* key WS* "=" WS* value WS* ("#" any*)?
//! key   := [A-Za-z_][A-Za-z0-9_.]*
//! value := any text up to an optional trailing comment
//! ```
//!
//! Keys are unique. Unknown keys are rejected by [`RunConfig::validate_keys`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    source: PathBuf,
    entries: BTreeMap<String, Entry>,
}

fn valid_key(key: &str) -> bool {
    let mut chars = key.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

impl RunConfig {
    pub fn empty(source: impl Into<PathBuf>) -> Self {
        Self { source: source.into(), entries: BTreeMap::new() }
    }

    pub fn parse(text: &str, source: &Path) -> Result<Self> {
        let mut cfg = Self::empty(source);
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let indent = line.len() - line.trim_start().len();
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(source, ln, indent + 1, "expected 'key = value'"))?;
            let key = key.trim();
            let value = value.trim();
            if !valid_key(key) {
                return Err(Error::parse(source, ln, indent + 1, format!("invalid key '{key}'")));
            }
            if value.is_empty() {
                return Err(Error::parse(source, ln, indent + 1, format!("key '{key}' has no value")));
            }
            if let Some(prev) = cfg.entries.get(key) {
                return Err(Error::parse(
                    source,
                    ln,
                    indent + 1,
                    format!("duplicate key '{key}' (first set on line {})", prev.line),
                ));
            }
            cfg.entries.insert(key.to_string(), Entry { value: value.to_string(), line: ln });
        }
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    pub fn source(&self) -> &Path {
        &self.source
    }

    /// Override or add a key, as from a command-line `--set key=value`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        if !valid_key(key) || value.trim().is_empty() {
            return Err(Error::Config(format!("invalid override '{key}={value}'")));
        }
        self.entries.insert(key.to_string(), Entry { value: value.trim().to_string(), line: 0 });
        Ok(())
    }

    /// Parse a `key=value` override string and apply it.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{pair}' is not key=value")))?;
        self.set(k, v)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn fail(&self, key: &str, msg: String) -> Error {
        match self.entries.get(key) {
            Some(e) if e.line > 0 => Error::parse(&self.source, e.line, 1, msg),
            _ => Error::Config(msg),
        }
    }

    /// Reject keys that are neither in `allowed` nor start with one of
    /// `prefixes`.
    pub fn validate_keys(&self, allowed: &[&str], prefixes: &[&str]) -> Result<()> {
        for key in self.entries.keys() {
            let ok = allowed.contains(&key.as_str()) || prefixes.iter().any(|p| key.starts_with(p));
            if !ok {
                return Err(self.fail(key, format!("unknown key '{key}'")));
            }
        }
        Ok(())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => {
                v.parse().map(Some).map_err(|_| self.fail(key, format!("cannot parse '{v}' for key '{key}'")))
            }
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.get::<f64>(key)? {
            Some(v) if !v.is_finite() && !v.is_infinite() => Err(self.fail(key, format!("'{key}' is NaN"))),
            other => Ok(other),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    }

    /// Comma-separated list of numbers.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(raw) = self.raw(key) else {
            return Ok(None);
        };
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| !v.is_nan())
                    .ok_or_else(|| self.fail(key, format!("bad number '{}' in list '{key}'", s.trim())))
            })
            .collect::<Result<Vec<f64>>>()
            .map(Some)
    }

    /// Value with optional uncertainty, written `x` or `x +- s`.
    pub fn measured(&self, key: &str) -> Result<Option<(f64, f64)>> {
        let Some(raw) = self.raw(key) else {
            return Ok(None);
        };
        let bad = || self.fail(key, format!("expected 'value' or 'value +- sigma' for '{key}', got '{raw}'"));
        let (v, s) = match raw.split_once("+-") {
            Some((v, s)) => (v.trim(), s.trim()),
            None => (raw.trim(), "0"),
        };
        let v: f64 = v.parse().map_err(|_| bad())?;
        let s: f64 = s.parse().map_err(|_| bad())?;
        if !v.is_finite() || !(s >= 0.0 && s.is_finite()) {
            return Err(bad());
        }
        Ok(Some((v, s)))
    }
}
