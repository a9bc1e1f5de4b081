//! Service and CLI configuration: one TOML file, overridable by
//! `GASROTOR_*` environment variables.
//!
//! | key | env | default |
//! |---|---|---|
//! | `bind` | `GASROTOR_BIND` | `127.0.0.1:8080` |
//! | `model_dir` | `GASROTOR_MODEL_DIR` | none |
//! | `model` | `GASROTOR_MODEL` | none (first valid file of `model_dir`) |
//! | `fluids` | `GASROTOR_FLUIDS` | none (built-in fluids) |
//! | `timeout_s` | `GASROTOR_TIMEOUT_S` | 60 |
//! | `oracle.grid_n` | `GASROTOR_ORACLE_GRID_N` | 101 |
//! | `oracle.eps` | `GASROTOR_ORACLE_EPS` | 1e-3 |
//! | `sweep.grid_n` | `GASROTOR_SWEEP_GRID_N` | 21 |
//! | `sweep.speed_count` | `GASROTOR_SWEEP_SPEED_COUNT` | 11 |
//!
//! `ranges` (feature sampling ranges) and `training` (network shapes and
//! optimiser settings) are file-only.

use std::path::{Path, PathBuf};
use std::time::Duration;

use gasrotor_core::bearing::{DEFAULT_GRID_N, DEFAULT_PERTURBATION};
use gasrotor_core::design::OracleSettings;
use gasrotor_core::fluid::FluidRegistry;
use gasrotor_core::robustness::{DEFAULT_GRID_N as SWEEP_GRID_N, DEFAULT_SPEED_COUNT};
use gasrotor_core::surrogate::{FeatureRanges, TrainingConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ENV_PREFIX: &str = "GASROTOR_";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("environment variable {name}: cannot parse '{value}'")]
    Env { name: String, value: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub grid_n: usize,
    pub eps: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { grid_n: DEFAULT_GRID_N, eps: DEFAULT_PERTURBATION }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub grid_n: usize,
    pub speed_count: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { grid_n: SWEEP_GRID_N, speed_count: DEFAULT_SPEED_COUNT }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub bind: String,
    pub model_dir: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub fluids: Option<PathBuf>,
    pub timeout_s: f64,
    pub oracle: OracleConfig,
    pub sweep: SweepConfig,
    pub ranges: FeatureRanges,
    pub training: TrainingConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
            model_dir: None,
            model: None,
            fluids: None,
            timeout_s: 60.0,
            oracle: OracleConfig::default(),
            sweep: SweepConfig::default(),
            ranges: FeatureRanges::default(),
            training: TrainingConfig::default(),
        }
    }
}

fn parse_env<T: std::str::FromStr>(name: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Env { name: name.into(), value: value.into() })
}

impl Config {
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.into(), message: e.to_string() })
    }

    /// The file at `path` (defaults if `None`), then the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io { path: p.into(), source })?;
                Self::from_toml_str(&text, p)?
            }
            None => Self::default(),
        };
        config.apply_env(std::env::vars())?;
        config.validate()?;
        Ok(config)
    }

    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<(), ConfigError> {
        for (name, value) in vars {
            let Some(key) = name.strip_prefix(ENV_PREFIX) else { continue };
            match key {
                "BIND" => self.bind = value,
                "MODEL_DIR" => self.model_dir = Some(value.into()),
                "MODEL" => self.model = Some(value.into()),
                "FLUIDS" => self.fluids = Some(value.into()),
                "TIMEOUT_S" => self.timeout_s = parse_env(&name, &value)?,
                "ORACLE_GRID_N" => self.oracle.grid_n = parse_env(&name, &value)?,
                "ORACLE_EPS" => self.oracle.eps = parse_env(&name, &value)?,
                "SWEEP_GRID_N" => self.sweep.grid_n = parse_env(&name, &value)?,
                "SWEEP_SPEED_COUNT" => self.sweep.speed_count = parse_env(&name, &value)?,
                _ => {}
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.timeout_s.is_finite() && self.timeout_s > 0.0) {
            return Err(ConfigError::Invalid(format!("timeout_s must be positive, got {}", self.timeout_s)));
        }
        if self.sweep.grid_n.is_multiple_of(2) || self.sweep.speed_count == 0 {
            return Err(ConfigError::Invalid("sweep.grid_n must be odd and sweep.speed_count positive".into()));
        }
        self.ranges.validate().map_err(ConfigError::Invalid)?;
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_s)
    }

    pub fn oracle_settings(&self) -> OracleSettings {
        OracleSettings { grid_n: self.oracle.grid_n, eps: self.oracle.eps, ..OracleSettings::default() }
    }

    pub fn fluid_registry(&self) -> Result<FluidRegistry, ConfigError> {
        match &self.fluids {
            Some(p) => FluidRegistry::from_file(p).map_err(|e| ConfigError::Parse { path: p.clone(), message: e.to_string() }),
            None => Ok(FluidRegistry::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn environment_overrides_file() {
        let mut c = Config::from_toml_str("timeout_s = 5\n[sweep]\ngrid_n = 11\n", Path::new("x.toml")).unwrap();
        assert_eq!((c.timeout_s, c.sweep.grid_n, c.sweep.speed_count), (5.0, 11, 11));
        let vars = [("GASROTOR_TIMEOUT_S", "7.5"), ("GASROTOR_SWEEP_GRID_N", "5"), ("OTHER", "1")];
        c.apply_env(vars.map(|(a, b)| (a.to_string(), b.to_string()))).unwrap();
        assert_eq!((c.timeout_s, c.sweep.grid_n), (7.5, 5));
        let bad = c.apply_env([("GASROTOR_TIMEOUT_S".to_string(), "soon".to_string())]);
        assert!(matches!(bad, Err(ConfigError::Env { .. })));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::from_toml_str("colour = 1", Path::new("x.toml")).is_err());
    }
}
