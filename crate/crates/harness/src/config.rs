//! Run configuration: a scenario name, a typed parameter table, a seed, and
//! an output directory. Each scenario declares its parameter schema; any
//! key outside the schema is rejected.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::artifacts::fnv1a_hex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl ParamValue {
    pub fn type_name(&self) -> &'static str {
        match self {
            ParamValue::Bool(_) => "bool",
            ParamValue::Int(_) => "int",
            ParamValue::Float(_) => "float",
            ParamValue::Text(_) => "string",
        }
    }

    fn canonical(&self) -> String {
        match self {
            ParamValue::Bool(b) => format!("b:{b}"),
            ParamValue::Int(i) => format!("i:{i}"),
            ParamValue::Float(f) => format!("f:{}", crate::artifacts::float17(*f)),
            ParamValue::Text(s) => format!("s:{s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Bool,
    Int,
    Float,
    Text,
}

/// One declared parameter: name, type, default.
#[derive(Debug, Clone)]
pub struct ParamSpec {
    pub key: &'static str,
    pub kind: ParamKind,
    pub default: ParamValue,
    pub help: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("unknown parameter `{key}` for scenario `{scenario}`")]
    UnknownKey { scenario: String, key: String },
    #[error("parameter `{key}` expects {expected}, got {got}")]
    WrongType {
        key: String,
        expected: &'static str,
        got: &'static str,
    },
    #[error("config file error: {0}")]
    Io(String),
    #[error("config parse error: {0}")]
    Parse(String),
}

/// The on-disk run configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunConfigFile {
    pub scenario: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
}

impl RunConfigFile {
    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(e.to_string()))?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))
    }
}

/// A validated scenario configuration: every parameter resolved against the
/// schema, defaults filled in.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub scenario: String,
    pub seed: u64,
    pub params: BTreeMap<String, ParamValue>,
}

impl ResolvedConfig {
    pub fn resolve(
        scenario: &str,
        schema: &[ParamSpec],
        given: &BTreeMap<String, ParamValue>,
        seed: u64,
    ) -> Result<ResolvedConfig, ConfigError> {
        let mut params = BTreeMap::new();
        for spec in schema {
            params.insert(spec.key.to_string(), spec.default.clone());
        }
        for (key, value) in given {
            let spec = schema.iter().find(|s| s.key == key).ok_or_else(|| {
                ConfigError::UnknownKey {
                    scenario: scenario.to_string(),
                    key: key.clone(),
                }
            })?;
            let coerced = match (spec.kind, value) {
                (ParamKind::Bool, ParamValue::Bool(_))
                | (ParamKind::Int, ParamValue::Int(_))
                | (ParamKind::Float, ParamValue::Float(_))
                | (ParamKind::Text, ParamValue::Text(_)) => value.clone(),
                // Integers are acceptable where floats are declared.
                (ParamKind::Float, ParamValue::Int(i)) => ParamValue::Float(*i as f64),
                _ => {
                    return Err(ConfigError::WrongType {
                        key: key.clone(),
                        expected: match spec.kind {
                            ParamKind::Bool => "bool",
                            ParamKind::Int => "int",
                            ParamKind::Float => "float",
                            ParamKind::Text => "string",
                        },
                        got: value.type_name(),
                    })
                }
            };
            params.insert(key.clone(), coerced);
        }
        Ok(ResolvedConfig {
            scenario: scenario.to_string(),
            seed,
            params,
        })
    }

    /// Hash over everything that can affect output bytes.
    pub fn config_hash(&self) -> String {
        let mut canon = format!("scenario={};seed={};", self.scenario, self.seed);
        for (k, v) in &self.params {
            canon.push_str(&format!("{k}={};", v.canonical()));
        }
        fnv1a_hex(canon.as_bytes())
    }

    pub fn int(&self, key: &str) -> i64 {
        match &self.params[key] {
            ParamValue::Int(v) => *v,
            other => panic!("parameter {key} is not an int: {other:?}"),
        }
    }

    pub fn float(&self, key: &str) -> f64 {
        match &self.params[key] {
            ParamValue::Float(v) => *v,
            ParamValue::Int(v) => *v as f64,
            other => panic!("parameter {key} is not a float: {other:?}"),
        }
    }

    pub fn text(&self, key: &str) -> &str {
        match &self.params[key] {
            ParamValue::Text(v) => v,
            other => panic!("parameter {key} is not text: {other:?}"),
        }
    }
}

/// Record of one scenario run. Wall time is informational and excluded from
/// the reproducibility contract; the artifact bytes carry it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub config_hash: String,
    pub seed: u64,
    pub artifacts: Vec<String>,
    pub wall_time_ms: u128,
    pub checks_passed: bool,
}
