//! Closed-form design calculator: phasematching geometry, motional
//! dephasing, density scaling, mode count and validity constraints.
//!
//! Everything here is pure arithmetic on the inputs; nothing calls the
//! solvers. Where a formula's direct evaluation disagrees with the
//! estimate commonly quoted for the cesium configuration (storage time
//! ~200 ns, capacity ~100 modes), the report carries both numbers side by
//! side rather than preferring either.

use serde::{Deserialize, Serialize};

use crate::error::{QmemError, Result};
use crate::params::{BOLTZMANN, SPEED_OF_LIGHT};
use crate::presets::PhysicalPreset;
use crate::solver::phasematch_angle;

/// Density scaling constant Theta in n = Theta / T^2 (m^-3 s^2).
pub const DENSITY_THETA: f64 = 1.0;

/// Quoted reference estimates for the cesium configuration, reported
/// alongside the directly computed values.
pub const QUOTED_STORAGE_TIME_S: f64 = 200e-9;
pub const QUOTED_MODE_COUNT: f64 = 100.0;

/// Inputs of the design formulas. Geometry fields default from the preset
/// but may be overridden independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignInput {
    pub preset: PhysicalPreset,
    /// Signal duration T (s).
    pub pulse_t: f64,
    /// Ensemble length L (m).
    pub length: f64,
    /// Beam cross-section A (m^2).
    pub area: f64,
    /// Ensemble temperature (K).
    pub temperature: f64,
    /// Storage time t_s (s).
    pub t_s: f64,
    /// Largest usable detuning Delta_max (rad/s).
    pub delta_max: f64,
    /// Angular channel spacing Delta_theta (rad).
    pub delta_theta: f64,
    /// Fidelity floor for the storage-time bound, in (0, 1).
    pub f_min: f64,
}

impl DesignInput {
    /// Defaults for a preset: T = 250 ps, t_s = 100 ns, Delta_max = 2 pi * 100 GHz,
    /// diffraction-limited channel spacing Delta_theta = lambda / sqrt(A),
    /// F_min = 0.9; geometry copied from the preset.
    pub fn for_preset(preset: &PhysicalPreset) -> Self {
        Self {
            preset: preset.clone(),
            pulse_t: 250e-12,
            length: preset.length,
            area: preset.area,
            temperature: preset.temperature,
            t_s: 100e-9,
            delta_max: std::f64::consts::TAU * 100e9,
            delta_theta: preset.lambda / preset.area.sqrt(),
            f_min: 0.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.preset.validate()?;
        let fields = [
            ("pulse_t", self.pulse_t),
            ("length", self.length),
            ("area", self.area),
            ("temperature", self.temperature),
            ("delta_theta", self.delta_theta),
        ];
        for (name, v) in fields {
            if !(v > 0.0) {
                return Err(QmemError::Parameter(format!(
                    "design input: {name} must be strictly positive, got {v}"
                )));
            }
        }
        if !(self.t_s >= 0.0) || !(self.delta_max >= 0.0) {
            return Err(QmemError::Parameter(
                "design input: t_s and delta_max must be nonnegative".into(),
            ));
        }
        if !(self.f_min > 0.0 && self.f_min < 1.0) {
            return Err(QmemError::Parameter(format!(
                "design input: f_min must lie in (0, 1), got {}",
                self.f_min
            )));
        }
        Ok(())
    }

    fn k_c(&self) -> f64 {
        (self.preset.omega_s + self.preset.omega_13) / SPEED_OF_LIGHT
    }
}

/// Entanglement fidelity after storage time t_s with an angled control:
/// F = exp[-|k_c|^2 theta_c^2 t_s^2 k_B T_e / M].
pub fn motional_fidelity(input: &DesignInput, theta_c: f64) -> Result<f64> {
    input.validate()?;
    let exponent = (input.k_c() * theta_c * input.t_s).powi(2) * BOLTZMANN * input.temperature
        / input.preset.mass;
    Ok((-exponent).exp())
}

/// Longest storage time keeping the motional fidelity above `f_min`:
/// t_s = sqrt(-ln F_min * M / (k_B T_e)) / (|k_c| theta_c).
pub fn max_storage_time(input: &DesignInput, theta_c: f64, f_min: f64) -> Result<f64> {
    input.validate()?;
    if !(f_min > 0.0 && f_min < 1.0) {
        return Err(QmemError::Parameter(format!("f_min must lie in (0, 1), got {f_min}")));
    }
    if theta_c == 0.0 {
        return Ok(f64::INFINITY);
    }
    let t = (-f_min.ln() * input.preset.mass / (BOLTZMANN * input.temperature)).sqrt()
        / (input.k_c() * theta_c.abs());
    Ok(t)
}

/// Number density for high-efficiency storage of pulses of duration T:
/// n = Theta / T^2 with Theta = 1 m^-3 s^2.
pub fn required_density(pulse_t: f64) -> Result<f64> {
    if !(pulse_t > 0.0) {
        return Err(QmemError::Parameter(format!("pulse_t must be positive, got {pulse_t}")));
    }
    Ok(DENSITY_THETA / (pulse_t * pulse_t))
}

/// Angular-multiplexing capacity:
/// n_m = floor( { theta_max - sqrt(2 omega_13 / (omega_1m + Delta_max)) } / Delta_theta )
/// with theta_max = sqrt(A) / L, clamped below at zero.
pub fn mode_count(input: &DesignInput) -> Result<u64> {
    input.validate()?;
    if !(input.delta_theta > 0.0) {
        return Err(QmemError::Parameter("delta_theta must be positive".into()));
    }
    let theta_max = input.area.sqrt() / input.length;
    let theta_min =
        (2.0 * input.preset.omega_13 / (input.preset.omega_1m + input.delta_max)).sqrt();
    let n = (theta_max - theta_min) / input.delta_theta;
    Ok(if n > 0.0 { n.floor() as u64 } else { 0 })
}

/// Tolerances for the qualitative inequalities: `strong` is the minimum
/// ratio for "much greater than"; `similar` brackets "of the same order".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintMargins {
    pub strong: f64,
    pub similar: (f64, f64),
}

impl Default for ConstraintMargins {
    fn default() -> Self {
        Self { strong: 10.0, similar: (0.2, 5.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub left: f64,
    pub right: f64,
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub margins: ConstraintMargins,
    pub checks: Vec<ConstraintCheck>,
    pub all_pass: bool,
}

/// Validity constraints of the paraxial, walk-off-free treatment, each
/// reported as (left, right, ratio, pass).
pub fn validate_constraints(
    input: &DesignInput,
    theta_c: f64,
    margins: ConstraintMargins,
) -> Result<ConstraintReport> {
    input.validate()?;
    let tc = input.pulse_t * SPEED_OF_LIGHT;
    let sqrt_a = input.area.sqrt();
    let mut checks = Vec::new();
    let strong = |name: &str, left: f64, right: f64| {
        let ratio = if right == 0.0 { f64::INFINITY } else { left / right };
        ConstraintCheck { name: name.into(), left, right, ratio, pass: ratio >= margins.strong }
    };
    checks.push(strong("sqrt(T c / L) >> theta_c", (tc / input.length).sqrt(), theta_c));
    checks.push(strong("sqrt(A) / L >> theta_c", sqrt_a / input.length, theta_c));
    checks.push(strong("T c >> L", tc, input.length));
    checks.push(strong("L >> sqrt(A)", input.length, sqrt_a));
    checks.push(strong("T omega_13 >> 1", input.pulse_t * input.preset.omega_13, 1.0));
    {
        let left = input.area;
        let right = input.preset.lambda * input.length;
        let ratio = left / right;
        checks.push(ConstraintCheck {
            name: "A ~ lambda L".into(),
            left,
            right,
            ratio,
            pass: ratio >= margins.similar.0 && ratio <= margins.similar.1,
        });
    }
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(ConstraintReport { margins, checks, all_pass })
}

/// Full design report: every formula evaluated on one input set, with the
/// quoted reference estimates echoed beside the computed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub input: DesignInput,
    pub phasematch_angle_rad: f64,
    pub phasematch_angle_deg: f64,
    pub motional_fidelity: f64,
    pub max_storage_time_s: f64,
    pub quoted_storage_time_s: f64,
    pub required_density_m3: f64,
    pub mode_count: u64,
    pub quoted_mode_count: f64,
    pub constraints: ConstraintReport,
}

pub fn design_report(input: &DesignInput, margins: ConstraintMargins) -> Result<DesignReport> {
    input.validate()?;
    let theta_c = phasematch_angle(input.preset.omega_s, input.preset.omega_13);
    Ok(DesignReport {
        input: input.clone(),
        phasematch_angle_rad: theta_c,
        phasematch_angle_deg: theta_c.to_degrees(),
        motional_fidelity: motional_fidelity(input, theta_c)?,
        max_storage_time_s: max_storage_time(input, theta_c, input.f_min)?,
        quoted_storage_time_s: QUOTED_STORAGE_TIME_S,
        required_density_m3: required_density(input.pulse_t)?,
        mode_count: mode_count(input)?,
        quoted_mode_count: QUOTED_MODE_COUNT,
        constraints: validate_constraints(input, theta_c, margins)?,
    })
}
