//! Flat `key = value` configuration files. Lists are bracketed and
//! comma-separated; `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(String),
    List(Vec<String>),
}

/// Parsed configuration. Every lookup is recorded, so the manifest echoes
/// defaults as well as explicit settings.
#[derive(Debug, Clone, Default)]
pub struct Config {
    raw: BTreeMap<String, Value>,
    used: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut raw = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!("line {}: expected `key = value`", no + 1)));
            };
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(CliError::Config(format!("line {}: bad key `{key}`", no + 1)));
            }
            let value = value.trim();
            let parsed = if let Some(inner) = value.strip_prefix('[') {
                let Some(inner) = inner.strip_suffix(']') else {
                    return Err(CliError::Config(format!("line {}: unterminated list", no + 1)));
                };
                let items: Vec<String> = inner.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
                Value::List(items)
            } else {
                Value::Scalar(value.to_string())
            };
            if raw.insert(key.to_string(), parsed).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key `{key}`", no + 1)));
            }
        }
        Ok(Self { raw, used: BTreeMap::new() })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets a key, overriding the file (used for command-line flags).
    pub fn set(&mut self, key: &str, value: impl Display) {
        self.raw.insert(key.to_string(), Value::Scalar(value.to_string()));
    }

    pub fn get<T: FromStr + Display>(&mut self, key: &str, default: T) -> Result<T, CliError> {
        let v = match self.raw.get(key) {
            None => default,
            Some(Value::Scalar(s)) => s.parse().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{s}`")))?,
            Some(Value::List(_)) => return Err(CliError::Config(format!("`{key}` must be a scalar"))),
        };
        self.used.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn get_list<T: FromStr + Display + Clone>(&mut self, key: &str, default: &[T]) -> Result<Vec<T>, CliError> {
        let v = match self.raw.get(key) {
            None => default.to_vec(),
            Some(Value::List(items)) => items
                .iter()
                .map(|s| s.parse().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{s}`"))))
                .collect::<Result<_, _>>()?,
            Some(Value::Scalar(_)) => return Err(CliError::Config(format!("`{key}` must be a bracketed list"))),
        };
        let shown: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        self.used.insert(key.to_string(), format!("[{}]", shown.join(", ")));
        Ok(v)
    }

    /// Fails on keys the experiment never read; catches typos.
    pub fn finish(&self) -> Result<(), CliError> {
        let unknown: Vec<&str> = self.raw.keys().filter(|k| !self.used.contains_key(*k)).map(|k| k.as_str()).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!("unknown keys: {}", unknown.join(", "))))
        }
    }

    /// Every knob read so far with its effective value, sorted by key.
    pub fn knobs(&self) -> &BTreeMap<String, String> {
        &self.used
    }
}
