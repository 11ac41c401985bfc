//! Run configuration: a JSON file merged with command-line overrides.

use std::path::{Path, PathBuf};

use mfqec::builders::CodeKind;
use mfqec::circuit::Variant;
use mfqec::montecarlo::DEFAULT_MAX_CYCLES;
use serde_json::{Map, Value};

pub const DEFAULT_TRIALS: usize = 1000;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {reason}")]
    Read { path: String, reason: String },
    #[error("config file is not valid JSON: {0}")]
    Json(String),
    #[error("config must be a JSON object")]
    NotAnObject,
    #[error("unknown config field `{0}`")]
    UnknownField(String),
    #[error("field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("field `{0}` is required")]
    Missing(&'static str),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

/// Values as they arrive from a file or flags, before validation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    pub code: Option<String>,
    pub variant: Option<String>,
    pub p_grid: Option<Vec<f64>>,
    pub trials: Option<u64>,
    pub master_seed: Option<u64>,
    pub max_cycles: Option<u64>,
    pub workers: Option<u64>,
    pub output_path: Option<PathBuf>,
}

const FIELDS: [&str; 8] = ["code", "variant", "p_grid", "trials", "master_seed", "max_cycles", "workers", "output_path"];

fn as_string(v: &Value, field: &'static str) -> Result<String, ConfigError> {
    v.as_str().map(str::to_owned).ok_or_else(|| invalid(field, "expected a string"))
}

fn as_count(v: &Value, field: &'static str) -> Result<u64, ConfigError> {
    v.as_u64().ok_or_else(|| invalid(field, format!("expected a non-negative integer, got {v}")))
}

impl RawConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
        let Value::Object(map) = value else { return Err(ConfigError::NotAnObject) };
        Self::from_map(&map)
    }

    fn from_map(map: &Map<String, Value>) -> Result<Self, ConfigError> {
        if let Some(k) = map.keys().find(|k| !FIELDS.contains(&k.as_str())) {
            return Err(ConfigError::UnknownField(k.clone()));
        }
        let mut raw = RawConfig::default();
        if let Some(v) = map.get("code") {
            raw.code = Some(as_string(v, "code")?);
        }
        if let Some(v) = map.get("variant") {
            raw.variant = Some(as_string(v, "variant")?);
        }
        if let Some(v) = map.get("p_grid") {
            let values = match v {
                Value::Array(items) => items
                    .iter()
                    .map(|x| x.as_f64().ok_or_else(|| invalid("p_grid", format!("expected numbers, got {x}"))))
                    .collect::<Result<Vec<_>, _>>()?,
                Value::Number(n) => vec![n.as_f64().unwrap_or(f64::NAN)],
                _ => return Err(invalid("p_grid", "expected an array of numbers")),
            };
            raw.p_grid = Some(values);
        }
        if let Some(v) = map.get("trials") {
            raw.trials = Some(as_count(v, "trials")?);
        }
        if let Some(v) = map.get("master_seed") {
            raw.master_seed = Some(as_count(v, "master_seed")?);
        }
        if let Some(v) = map.get("max_cycles") {
            raw.max_cycles = Some(as_count(v, "max_cycles")?);
        }
        if let Some(v) = map.get("workers") {
            raw.workers = Some(as_count(v, "workers")?);
        }
        if let Some(v) = map.get("output_path") {
            raw.output_path = Some(PathBuf::from(as_string(v, "output_path")?));
        }
        Ok(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Read { path: path.display().to_string(), reason: e.to_string() })?;
        Self::from_json(&text)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overridden_by(self, other: RawConfig) -> RawConfig {
        RawConfig {
            code: other.code.or(self.code),
            variant: other.variant.or(self.variant),
            p_grid: other.p_grid.or(self.p_grid),
            trials: other.trials.or(self.trials),
            master_seed: other.master_seed.or(self.master_seed),
            max_cycles: other.max_cycles.or(self.max_cycles),
            workers: other.workers.or(self.workers),
            output_path: other.output_path.or(self.output_path),
        }
    }

    pub fn validate(self) -> Result<RunConfig, ConfigError> {
        let code_name = self.code.ok_or(ConfigError::Missing("code"))?;
        let code = parse_code(&code_name)?;
        let variant_name = self.variant.ok_or(ConfigError::Missing("variant"))?;
        let variant = parse_variant(&variant_name)?;
        let p_grid = self.p_grid.ok_or(ConfigError::Missing("p_grid"))?;
        if p_grid.is_empty() {
            return Err(invalid("p_grid", "must contain at least one value"));
        }
        for (i, &p) in p_grid.iter().enumerate() {
            if !(p > 0.0 && p < 1.0) {
                return Err(invalid("p_grid", format!("value {p} is outside (0, 1)")));
            }
            if i > 0 && p <= p_grid[i - 1] {
                return Err(invalid("p_grid", format!("values must be strictly increasing ({} then {p})", p_grid[i - 1])));
            }
        }
        let positive = |v: Option<u64>, field: &'static str, default: u64| -> Result<u64, ConfigError> {
            match v.unwrap_or(default) {
                0 => Err(invalid(field, "must be positive")),
                n => Ok(n),
            }
        };
        let default_workers = std::thread::available_parallelism().map(|n| n.get() as u64).unwrap_or(1);
        Ok(RunConfig {
            code,
            code_name,
            variant,
            variant_name,
            p_grid,
            trials: positive(self.trials, "trials", DEFAULT_TRIALS as u64)? as usize,
            master_seed: self.master_seed.unwrap_or(0),
            max_cycles: positive(self.max_cycles, "max_cycles", DEFAULT_MAX_CYCLES)?,
            workers: positive(self.workers, "workers", default_workers)? as usize,
            output_path: self.output_path,
        })
    }
}

pub fn parse_code(name: &str) -> Result<CodeKind, ConfigError> {
    match name {
        "bf" => Ok(CodeKind::BitFlip),
        "surface17" => Ok(CodeKind::Surface17),
        other => Err(invalid("code", format!("expected \"bf\" or \"surface17\", got {other:?}"))),
    }
}

/// `None` is the uncorrected baseline.
pub fn parse_variant(name: &str) -> Result<Option<Variant>, ConfigError> {
    match name {
        "perfect" => Ok(Some(Variant::Perfect)),
        "simplified" => Ok(Some(Variant::Simplified)),
        "none" => Ok(None),
        other => Err(invalid("variant", format!("expected \"perfect\", \"simplified\" or \"none\", got {other:?}"))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub code: CodeKind,
    pub code_name: String,
    pub variant: Option<Variant>,
    pub variant_name: String,
    pub p_grid: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub max_cycles: u64,
    pub workers: usize,
    pub output_path: Option<PathBuf>,
}
