//! Physical presets: atomic and geometric constants for a memory medium.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{QmemError, Result};

/// Physical constants describing one memory configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalPreset {
    pub name: String,
    /// Signal carrier frequency omega_s (rad/s).
    pub omega_s: f64,
    /// Stokes shift omega_13 (rad/s).
    pub omega_13: f64,
    /// |1> -> |m> transition frequency (rad/s).
    pub omega_1m: f64,
    /// Atomic mass (kg).
    pub mass: f64,
    /// Control wavelength (m).
    pub lambda: f64,
    /// Default ensemble length (m).
    pub length: f64,
    /// Default control-beam cross-section (m^2).
    pub area: f64,
    /// Default ensemble temperature (K).
    pub temperature: f64,
}

impl PhysicalPreset {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_s", self.omega_s),
            ("omega_13", self.omega_13),
            ("omega_1m", self.omega_1m),
            ("mass", self.mass),
            ("lambda", self.lambda),
            ("length", self.length),
            ("area", self.area),
            ("temperature", self.temperature),
        ];
        for (name, v) in fields {
            if !(v > 0.0) {
                return Err(QmemError::Parameter(format!(
                    "preset '{}': {} must be strictly positive, got {}",
                    self.name, name, v
                )));
            }
        }
        Ok(())
    }
}

/// Cesium D2 configuration: hyperfine 6S_1/2 ground states split by
/// 2 pi * 9.2 GHz, excited state 351.7 THz (852 nm) above, vapor defaults
/// of L = 2 cm, A = 1e-7 m^2, 360 K.
pub fn cs_d2() -> PhysicalPreset {
    PhysicalPreset {
        name: "cs-d2".into(),
        omega_s: TAU * 351.7e12,
        omega_13: TAU * 9.2e9,
        omega_1m: TAU * 351.7e12,
        mass: 2.21e-25,
        lambda: 852e-9,
        length: 0.02,
        area: 1e-7,
        temperature: 360.0,
    }
}

/// Look up a built-in preset by name.
pub fn builtin(name: &str) -> Result<PhysicalPreset> {
    match name {
        "cs-d2" => Ok(cs_d2()),
        other => Err(QmemError::UnknownPreset(other.to_string())),
    }
}

/// Load a preset from a key-value config file. Schema (all keys required
/// unless noted):
///
/// ```text
/// name = my-medium
/// omega_s = 2.21e15        # rad/s
/// omega_13 = 5.78e10       # rad/s
/// omega_1m = 2.21e15       # rad/s
/// mass = 2.21e-25          # kg
/// lambda = 852e-9          # m
/// length = 0.02            # m
/// area = 1e-7              # m^2
/// temperature = 360        # K
/// ```
pub fn load_preset(path: &Path) -> Result<PhysicalPreset> {
    let text = std::fs::read_to_string(path)?;
    let kv = crate::config::parse_kv(&text, true)?;
    preset_from_kv(&kv)
}

pub(crate) fn preset_from_kv(kv: &BTreeMap<String, (usize, String)>) -> Result<PhysicalPreset> {
    let get = |key: &str| -> Result<f64> {
        let (line, raw) = kv
            .get(key)
            .ok_or_else(|| QmemError::ConfigGeneral(format!("preset file missing key '{key}'")))?;
        raw.parse::<f64>().map_err(|_| QmemError::Config {
            line: *line,
            msg: format!("key '{key}': expected a number, got '{raw}'"),
        })
    };
    let name = kv
        .get("name")
        .map(|(_, v)| v.clone())
        .ok_or_else(|| QmemError::ConfigGeneral("preset file missing key 'name'".into()))?;
    let preset = PhysicalPreset {
        name,
        omega_s: get("omega_s")?,
        omega_13: get("omega_13")?,
        omega_1m: get("omega_1m")?,
        mass: get("mass")?,
        lambda: get("lambda")?,
        length: get("length")?,
        area: get("area")?,
        temperature: get("temperature")?,
    };
    preset.validate()?;
    Ok(preset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_cs_is_valid() {
        let p = builtin("cs-d2").unwrap();
        p.validate().unwrap();
        assert!((p.omega_13 / TAU - 9.2e9).abs() < 1.0);
    }

    #[test]
    fn unknown_preset_is_an_error() {
        let err = builtin("rb-87").unwrap_err();
        assert!(matches!(err, QmemError::UnknownPreset(_)));
        assert_eq!(err.exit_code(), 2);
    }
}
