//! Gas property registry.
//!
//! Viscosity follows Sutherland's law, `mu(T) = mu_ref (T/T_ref)^1.5 (T_ref + S)/(T + S)`.
//! The built-in table ships air and nitrogen; additional gases can be loaded
//! from a TOML registry file of the form
//!
//! ```toml
//! [helium]
//! mu_ref = 1.87e-5
//! T_ref = 273.15
//! S = 79.4
//! R_gas = 2077.1
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Temperature range over which the Sutherland fits are trusted.
pub const VALID_TEMPERATURE_K: (f64, f64) = (150.0, 600.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FluidError {
    #[error("unknown fluid '{0}'")]
    UnknownFluid(String),
    #[error("temperature {t} K outside validated range [{lo}, {hi}] K")]
    TemperatureOutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("invalid fluid constants for '{name}': {reason}")]
    InvalidConstants { name: String, reason: String },
    #[error("failed to read fluid registry: {0}")]
    Io(String),
    #[error("failed to parse fluid registry: {0}")]
    Parse(String),
}

/// Sutherland constants and gas constant for one fluid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SutherlandConstants {
    pub mu_ref: f64,
    #[serde(rename = "T_ref")]
    pub t_ref: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "R_gas")]
    pub r_gas: f64,
}

impl SutherlandConstants {
    pub fn viscosity(&self, t: f64) -> f64 {
        self.mu_ref * (t / self.t_ref).powf(1.5) * (self.t_ref + self.s) / (t + self.s)
    }

    fn validate(&self, name: &str) -> Result<(), FluidError> {
        let fields = [("mu_ref", self.mu_ref), ("T_ref", self.t_ref), ("S", self.s), ("R_gas", self.r_gas)];
        for (field, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(FluidError::InvalidConstants {
                    name: name.to_string(),
                    reason: format!("{field} must be positive and finite, got {value}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidProperties {
    /// Dynamic viscosity, Pa·s.
    pub mu: f64,
    /// Specific gas constant, J/(kg·K).
    pub r_gas: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidRegistry {
    fluids: BTreeMap<String, SutherlandConstants>,
}

impl Default for FluidRegistry {
    fn default() -> Self {
        let mut fluids = BTreeMap::new();
        fluids.insert(
            "air".to_string(),
            SutherlandConstants { mu_ref: 1.716e-5, t_ref: 273.15, s: 110.4, r_gas: 287.05 },
        );
        fluids.insert(
            "nitrogen".to_string(),
            SutherlandConstants { mu_ref: 1.663e-5, t_ref: 273.15, s: 106.7, r_gas: 296.8 },
        );
        Self { fluids }
    }
}

impl FluidRegistry {
    /// Built-in fluids extended (and overridden) by the entries of a TOML file.
    pub fn from_toml_str(text: &str) -> Result<Self, FluidError> {
        let extra: BTreeMap<String, SutherlandConstants> =
            toml::from_str(text).map_err(|e| FluidError::Parse(e.to_string()))?;
        let mut registry = Self::default();
        for (name, constants) in extra {
            constants.validate(&name)?;
            registry.fluids.insert(name, constants);
        }
        Ok(registry)
    }

    pub fn from_file(path: &Path) -> Result<Self, FluidError> {
        let text = std::fs::read_to_string(path).map_err(|e| FluidError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.fluids.keys().map(String::as_str)
    }

    pub fn constants(&self, fluid: &str) -> Result<&SutherlandConstants, FluidError> {
        self.fluids.get(fluid).ok_or_else(|| FluidError::UnknownFluid(fluid.to_string()))
    }

    /// Viscosity and gas constant of `fluid` at temperature `t` (K).
    ///
    /// The ambient pressure is accepted for interface symmetry; an ideal gas
    /// with Sutherland viscosity has no pressure dependence.
    pub fn properties(&self, fluid: &str, t: f64, _p_a: f64) -> Result<FluidProperties, FluidError> {
        let constants = self.constants(fluid)?;
        let (lo, hi) = VALID_TEMPERATURE_K;
        if !(t >= lo && t <= hi) {
            return Err(FluidError::TemperatureOutOfRange { t, lo, hi });
        }
        Ok(FluidProperties { mu: constants.viscosity(t), r_gas: constants.r_gas })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn air_at_room_temperature() {
        let props = FluidRegistry::default().properties("air", 293.15, 1e5).unwrap();
        // Hand evaluation: 1.716e-5 * (293.15/273.15)^1.5 * 383.55/403.55
        let expected = 1.716e-5 * 1.111_816_309_464_6 * (383.55 / 403.55);
        assert!((props.mu - expected).abs() / expected < 1e-6, "{}", props.mu);
        assert!((props.mu - 1.814e-5).abs() / 1.814e-5 < 1e-3);
    }

    #[test]
    fn reference_temperature_is_identity() {
        let registry = FluidRegistry::default();
        let props = registry.properties("air", 273.15, 1e5).unwrap();
        assert_eq!(props.mu, 1.716e-5);
    }

    #[test]
    fn unknown_fluid_and_range() {
        let registry = FluidRegistry::default();
        assert_eq!(
            registry.properties("unobtainium", 300.0, 1e5),
            Err(FluidError::UnknownFluid("unobtainium".into()))
        );
        assert!(matches!(
            registry.properties("air", 700.0, 1e5),
            Err(FluidError::TemperatureOutOfRange { .. })
        ));
    }

    #[test]
    fn registry_file_extends_defaults() {
        let text = "[helium]\nmu_ref = 1.87e-5\nT_ref = 273.15\nS = 79.4\nR_gas = 2077.1\n";
        let registry = FluidRegistry::from_toml_str(text).unwrap();
        assert!(registry.constants("air").is_ok());
        assert_eq!(registry.constants("helium").unwrap().r_gas, 2077.1);
        let bad = "[x]\nmu_ref = -1.0\nT_ref = 273.15\nS = 1.0\nR_gas = 1.0\n";
        assert!(matches!(FluidRegistry::from_toml_str(bad), Err(FluidError::InvalidConstants { .. })));
    }
}
