//! Plain `key = value` run configuration for benchmark and sweep runs.
//!
//! ```text
//! # comments start with '#'
//! model_family = linear          # linear | residual_mlp
//! loss_kind = logistic           # logistic | hinge
//! methods = close,close_decay,atk,average,top
//! epochs = 300
//! learning_rate = 0.1
//! seed_base = 0
//! split_count = 25
//! lambdas = 1e-5,1e-3,1e-1       # overrides the 10^-5..10^5 grid
//! ks = 10,100                    # overrides the power-of-ten k grid
//! label_column = target
//! ```

use std::path::Path;

use super::grid::parse_methods;
use super::protocol::ProtocolConfig;
use crate::data::DEFAULT_LABEL_COLUMN;
use crate::error::{Error, Result};

pub const KNOWN_KEYS: [&str; 10] = [
    "model_family",
    "loss_kind",
    "methods",
    "epochs",
    "learning_rate",
    "seed_base",
    "split_count",
    "lambdas",
    "ks",
    "label_column",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub protocol: ProtocolConfig,
    pub label_column: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            protocol: ProtocolConfig::default(),
            label_column: DEFAULT_LABEL_COLUMN.to_string(),
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{s}`")))
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

impl RunConfig {
    /// Applies `key = value` lines on top of `self`. Unknown or repeated keys
    /// are rejected; the result is validated.
    pub fn apply_text(mut self, text: &str) -> Result<Self> {
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Config(format!(
                    "line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            if seen.contains(&key) {
                return Err(Error::Config(format!(
                    "line {}: `{key}` given twice",
                    lineno + 1
                )));
            }
            seen.push(key);
            let p = &mut self.protocol;
            match key {
                "model_family" => p.model_family = value.parse().map_err(config_err)?,
                "loss_kind" => p.loss = value.parse().map_err(config_err)?,
                "methods" => p.methods = parse_methods(value).map_err(config_err)?,
                "epochs" => p.epochs = parse_one(key, value)?,
                "learning_rate" => p.learning_rate = parse_one(key, value)?,
                "seed_base" => p.seed_base = parse_one(key, value)?,
                "split_count" => p.splits = parse_one(key, value)?,
                "lambdas" => p.lambdas = parse_list(key, value)?,
                "ks" => p.ks = Some(parse_list(key, value)?),
                "label_column" => self.label_column = value.to_string(),
                _ => unreachable!("checked against KNOWN_KEYS"),
            }
        }
        self.protocol.validate()?;
        Ok(self)
    }

    pub fn load(self, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    /// Stable description of everything that affects results.
    pub fn fingerprint(&self) -> String {
        format!("{:?}|label={}", self.protocol, self.label_column)
    }
}

fn config_err(e: Error) -> Error {
    match e {
        Error::InvalidArgument(msg) => Error::Config(msg),
        other => other,
    }
}
