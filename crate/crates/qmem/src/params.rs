//! Memory parameters and the bridge from physical inputs to the
//! dimensionless equations.
//!
//! All physical quantities are SI scalars: angular frequencies and decay
//! rates in rad/s, lengths in m, durations in s, masses in kg.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QmemError, Result};
use crate::presets::PhysicalPreset;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Dimensionless coupling and scaling parameters of a single-mode memory,
/// together with the raw physical inputs they derive from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryParams {
    /// Dimensionless coupling C = |kappa| sqrt(L w(T)) / |Gamma|.
    pub c: f64,
    /// Paraxial factor q = |k_s| c / omega_1m.
    pub q: f64,
    /// Dimensionless transverse control momentum.
    pub p: f64,
    /// Optical-polarization decay rate (rad/s).
    pub gamma: f64,
    /// One-photon detuning Delta (rad/s).
    pub delta: f64,
    /// Resonant optical depth.
    pub d: f64,
    /// Ensemble length (m).
    pub length: f64,
    /// Integrated Rabi frequency w(T) (rad/s... rad^2/s integrated; see docs).
    pub omega_t: f64,
    /// Stokes shift omega_13 (rad/s).
    pub stokes_shift: f64,
    /// Frequency of the |1> -> |m> transition (rad/s).
    pub omega_1m: f64,
    /// Signal pulse duration T (s).
    pub pulse_t: f64,
}

impl MemoryParams {
    /// Purely dimensionless parameter set: coupling, paraxial factor and
    /// transverse control momentum given directly, all physical bookkeeping
    /// fields zeroed. With `gamma = delta = 0` the Stark/group-velocity
    /// exponent chi is disabled (far-detuned limit).
    pub fn dimensionless(c: f64, q: f64, p: f64) -> Result<Self> {
        if !(c >= 0.0) {
            return Err(QmemError::Parameter(format!("coupling must be >= 0, got {c}")));
        }
        if !(q > 0.0) {
            return Err(QmemError::Parameter(format!("q must be positive, got {q}")));
        }
        Ok(Self {
            c,
            q,
            p,
            gamma: 0.0,
            delta: 0.0,
            d: 0.0,
            length: 0.0,
            omega_t: 0.0,
            stokes_shift: 0.0,
            omega_1m: 0.0,
            pulse_t: 0.0,
        })
    }

    /// Dimensionless coupling with the geometric scales (length, Stokes
    /// shift, transition frequency) taken from a preset. The chi exponent
    /// stays disabled (gamma = delta = 0), so residual-phase evaluations
    /// carry only the wavevector-mismatch terms.
    pub fn dimensionless_with_preset(
        c: f64,
        q: f64,
        p: f64,
        preset: &PhysicalPreset,
    ) -> Result<Self> {
        let mut params = Self::dimensionless(c, q, p)?;
        params.length = preset.length;
        params.stokes_shift = preset.omega_13;
        params.omega_1m = preset.omega_1m;
        Ok(params)
    }

    /// Construct from physical inputs.
    ///
    /// `|kappa|^2 = d gamma / L`, `C = sqrt(d gamma w(T)) / |Gamma|`,
    /// `q = |k_s| c / omega_1m` and
    /// `p = |k_c| sin(theta_c) (omega_1m / 2 L c)^{-1/2}` with
    /// `|k_s| = omega_s / c` and `|k_c| = (omega_s + omega_13) / c` for the
    /// phasematched level ordering.
    #[allow(clippy::too_many_arguments)]
    pub fn from_physical(
        preset: &PhysicalPreset,
        delta: f64,
        omega_t: f64,
        pulse_t: f64,
        theta_c: f64,
        d: f64,
        gamma: f64,
    ) -> Result<Self> {
        preset.validate()?;
        if !(pulse_t > 0.0) {
            return Err(QmemError::Parameter(format!("pulse_t must be positive, got {pulse_t}")));
        }
        if !(omega_t >= 0.0) || !(d >= 0.0) || !(gamma >= 0.0) {
            return Err(QmemError::Parameter(
                "omega_t, optical depth and gamma must be nonnegative".into(),
            ));
        }
        let gamma_abs = Complex64::new(delta, -gamma).norm();
        if gamma_abs == 0.0 && d * gamma * omega_t > 0.0 {
            return Err(QmemError::Parameter(
                "Gamma = Delta - i gamma must be nonzero for a coupled memory".into(),
            ));
        }
        let c = if d * gamma * omega_t == 0.0 {
            0.0
        } else {
            (d * gamma * omega_t).sqrt() / gamma_abs
        };
        let k_s = preset.omega_s / SPEED_OF_LIGHT;
        let k_c = (preset.omega_s + preset.omega_13) / SPEED_OF_LIGHT;
        let q = k_s * SPEED_OF_LIGHT / preset.omega_1m;
        let x_scale = (preset.omega_1m / (2.0 * preset.length * SPEED_OF_LIGHT)).sqrt();
        let p = k_c * theta_c.sin() / x_scale;
        Ok(Self {
            c,
            q,
            p,
            gamma,
            delta,
            d,
            length: preset.length,
            omega_t,
            stokes_shift: preset.omega_13,
            omega_1m: preset.omega_1m,
            pulse_t,
        })
    }

    /// 1/Gamma with Gamma = Delta - i gamma, or zero when both components
    /// vanish (dimensionless parameter sets, where chi is disabled).
    pub fn inv_gamma(&self) -> Complex64 {
        let g = Complex64::new(self.delta, -self.gamma);
        if g.norm_sqr() == 0.0 {
            Complex64::default()
        } else {
            g.inv()
        }
    }

    /// |kappa|^2 L = d gamma, the per-ensemble absorption rate entering chi.
    pub fn kappa2_l(&self) -> f64 {
        self.d * self.gamma
    }

    /// Stark/group-velocity exponent chi(tau, z) = [w(tau) + |kappa|^2 z] / Gamma,
    /// evaluated with w(tau) and the dimensionless position zeta = z / L.
    pub fn chi(&self, omega_tau: f64, zeta: f64) -> Complex64 {
        self.inv_gamma() * (omega_tau + self.kappa2_l() * zeta)
    }

    /// Copy with a different coupling (used for read-out stages where only
    /// the control pulse energy changes).
    pub fn with_coupling(&self, c: f64) -> Self {
        Self { c, ..*self }
    }
}
