use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::color::ColorSpace;
use crate::error::{Error, Result};

/// Parameters shared by all reference algorithms.
///
/// Serialized as `{"k": .., "compactness": .., "iterations": ..,
/// "color_space": .., "extra": {..}}`. Algorithm-specific reals (e.g.
/// `fh_k`, `fh_sigma`, `fh_min_size`) go into `extra`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmParams {
    #[serde(rename = "k")]
    pub k_desired: usize,
    #[serde(default = "default_compactness")]
    pub compactness: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// `None` selects the algorithm's own default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_space: Option<ColorSpace>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

fn default_compactness() -> f64 {
    10.0
}

fn default_iterations() -> usize {
    10
}

impl Default for AlgorithmParams {
    fn default() -> Self {
        Self {
            k_desired: 400,
            compactness: default_compactness(),
            iterations: default_iterations(),
            color_space: None,
            extra: BTreeMap::new(),
        }
    }
}

impl AlgorithmParams {
    pub fn with_k(k: usize) -> Self {
        Self {
            k_desired: k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_desired == 0 {
            return Err(Error::param("k", "must be at least 1"));
        }
        if self.iterations == 0 {
            return Err(Error::param("iterations", "must be at least 1"));
        }
        if !(self.compactness >= 0.0 && self.compactness.is_finite()) {
            return Err(Error::param("compactness", "must be finite and non-negative"));
        }
        if let Some((name, _)) = self.extra.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::param(format!("extra.{name}"), "must be finite"));
        }
        Ok(())
    }

    pub fn extra(&self, key: &str) -> Option<f64> {
        self.extra.get(key).copied()
    }

    /// Sets a parameter by name. `k`, `compactness`, `iterations` and
    /// `color_space` address the named fields; `extra.<name>` or any other
    /// name addresses `extra`.
    pub fn set(&mut self, name: &str, value: &ParamValue) -> Result<()> {
        let number = |v: &ParamValue| match v {
            ParamValue::Number(n) => Ok(*n),
            ParamValue::Token(t) => Err(Error::param(name, format!("expected a number, got `{t}`"))),
        };
        let integer = |v: &ParamValue| {
            let n = number(v)?;
            if n < 0.0 || n.fract() != 0.0 {
                return Err(Error::param(name, format!("expected a non-negative integer, got {n}")));
            }
            Ok(n as usize)
        };
        match name {
            "k" => self.k_desired = integer(value)?,
            "compactness" => self.compactness = number(value)?,
            "iterations" => self.iterations = integer(value)?,
            "color_space" => {
                self.color_space = Some(match value {
                    ParamValue::Token(t) => t.parse()?,
                    ParamValue::Number(n) => {
                        return Err(Error::param(name, format!("expected a color space, got {n}")))
                    }
                })
            }
            other => {
                let key = other.strip_prefix("extra.").unwrap_or(other);
                self.extra.insert(key.to_string(), number(value)?);
            }
        }
        Ok(())
    }
}

/// A single candidate value: numeric or categorical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Token(String),
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Number(n) => write!(f, "{n}"),
            ParamValue::Token(t) => f.write_str(t),
        }
    }
}

/// Anything that parses as a finite real is a number; the rest is a token.
impl std::str::FromStr for ParamValue {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        Ok(match s.parse::<f64>() {
            Ok(n) if n.is_finite() => ParamValue::Number(n),
            _ => ParamValue::Token(s.to_string()),
        })
    }
}
