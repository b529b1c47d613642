//! Two-component storage: two frequency-distinct signal modes written into
//! one spin wave by separately angled control fields, with cross-mode
//! mixing and selective read-out.
//!
//! The coupled system generalizes the single-mode equations to two optical
//! channels sharing one coherence,
//!
//! ```text
//! d a_j / d zeta = C_m c_j exp[-i (p_j X + zeta / R_j)] b + (i / 4q) d^2 a_j / dX^2
//! d b / d eps    = - C_m^* sum_j cbar_j exp[+i (p_j X + zeta / R_j)] a_j
//! ```
//!
//! so each stored component carries transverse momentum +p_j and the
//! mode-resolved structure is visible in the spin wave's k_X spectrum.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{QmemError, Result};
use crate::fft::TransverseFft;
use crate::field::{SignalField, SpinWave};
use crate::grid::GridSpec;
use crate::params::SPEED_OF_LIGHT;
use crate::presets::PhysicalPreset;
use crate::solver::{Channel, Propagator, SolveOptions};

/// One signal component of the two-mode memory.
#[derive(Debug, Clone, Copy)]
pub struct ModeChannel {
    /// Peak Rabi frequency Omega_j (rad/s, complex for a relative phase).
    pub omega: Complex64,
    /// One-photon detuning of this component (rad/s).
    pub delta: f64,
    /// Polarization decay rate (rad/s).
    pub gamma: f64,
    /// Control angle (rad).
    pub theta_c: f64,
    /// Dimensionless transverse control momentum.
    pub p: f64,
    /// Normalized coupling weight c_j = sqrt(T/W) Omega_j / Gamma_j.
    pub c: Complex64,
    /// Conjugate-side weight cbar_j = sqrt(T/W) Omega_j^* / Gamma_j.
    pub cbar: Complex64,
    /// Dimensionless longitudinal dephasing 1/R_j = |kappa| sqrt(L) / (Gamma_j sqrt(W)).
    pub inv_r: Complex64,
    /// Extra longitudinal frequency offset of the read-out control
    /// (dimensionless, rad per unit zeta); see [`paraxial_retuning`].
    pub retune: f64,
}

/// Parameters of the two-component memory.
#[derive(Debug, Clone, Copy)]
pub struct MultimodeParams {
    /// Shared coupling C_m = |kappa| sqrt(L W).
    pub c_m: Complex64,
    /// W = sum_j omega_j(T) / |Gamma_j|^2 with omega_j(T) = |Omega_j|^2 T.
    pub w: f64,
    /// Paraxial factor.
    pub q: f64,
    /// Signal duration T (s); zero for purely dimensionless parameter sets.
    pub pulse_t: f64,
    pub modes: [ModeChannel; 2],
}

impl MultimodeParams {
    /// Dimensionless construction: shared coupling, weights and transverse
    /// momenta given directly. The conjugate weights follow the real-Gamma
    /// (far-detuned) limit cbar_j = c_j^* and longitudinal dephasing is off.
    pub fn dimensionless(
        c_m: f64,
        q: f64,
        weights: [Complex64; 2],
        ps: [f64; 2],
    ) -> Result<Self> {
        if !(c_m >= 0.0) {
            return Err(QmemError::Parameter(format!("coupling must be >= 0, got {c_m}")));
        }
        if !(q > 0.0) {
            return Err(QmemError::Parameter(format!("q must be positive, got {q}")));
        }
        let mode = |j: usize| ModeChannel {
            omega: Complex64::default(),
            delta: 0.0,
            gamma: 0.0,
            theta_c: 0.0,
            p: ps[j],
            c: weights[j],
            cbar: weights[j].conj(),
            inv_r: Complex64::default(),
            retune: 0.0,
        };
        Ok(Self {
            c_m: Complex64::new(c_m, 0.0),
            w: 0.0,
            q,
            pulse_t: 0.0,
            modes: [mode(0), mode(1)],
        })
    }

    /// Physical construction from per-component Rabi frequencies, detunings
    /// and control angles. `d` is the resonant optical depth; the shared
    /// `|kappa|^2 = d gamma_ref / L` uses the first component's gamma.
    #[allow(clippy::too_many_arguments)]
    pub fn from_physical(
        preset: &PhysicalPreset,
        d: f64,
        pulse_t: f64,
        omegas: [Complex64; 2],
        deltas: [f64; 2],
        gammas: [f64; 2],
        thetas: [f64; 2],
    ) -> Result<Self> {
        preset.validate()?;
        if !(pulse_t > 0.0) {
            return Err(QmemError::Parameter(format!("pulse_t must be positive, got {pulse_t}")));
        }
        if !(d >= 0.0) || gammas.iter().any(|g| !(*g >= 0.0)) {
            return Err(QmemError::Parameter("optical depth and gammas must be nonnegative".into()));
        }
        let gamma_big = |j: usize| Complex64::new(deltas[j], -gammas[j]);
        for j in 0..2 {
            if gamma_big(j).norm_sqr() == 0.0 && omegas[j].norm_sqr() > 0.0 {
                return Err(QmemError::Parameter(format!(
                    "component {j}: Gamma = Delta - i gamma must be nonzero"
                )));
            }
        }
        let w: f64 = (0..2)
            .map(|j| {
                let g2 = gamma_big(j).norm_sqr();
                if g2 == 0.0 { 0.0 } else { omegas[j].norm_sqr() * pulse_t / g2 }
            })
            .sum();
        if !(w > 0.0) {
            return Err(QmemError::Parameter("at least one component must couple (W > 0)".into()));
        }
        let kappa = (d * gammas[0] / preset.length).sqrt();
        let c_m = Complex64::new(kappa * (preset.length * w).sqrt(), 0.0);
        let k_c = (preset.omega_s + preset.omega_13) / SPEED_OF_LIGHT;
        let x_scale = (preset.omega_1m / (2.0 * preset.length * SPEED_OF_LIGHT)).sqrt();
        let q = preset.omega_s / preset.omega_1m;
        let sqrt_t_w = (pulse_t / w).sqrt();
        let mode = |j: usize| ModeChannel {
            omega: omegas[j],
            delta: deltas[j],
            gamma: gammas[j],
            theta_c: thetas[j],
            p: k_c * thetas[j].sin() / x_scale,
            c: omegas[j] * sqrt_t_w / gamma_big(j),
            cbar: omegas[j].conj() * sqrt_t_w / gamma_big(j),
            inv_r: if gamma_big(j).norm_sqr() == 0.0 {
                Complex64::default()
            } else {
                kappa * preset.length.sqrt() / (gamma_big(j) * w.sqrt())
            },
            retune: 0.0,
        };
        Ok(Self { c_m, w, q, pulse_t, modes: [mode(0), mode(1)] })
    }

    /// sum_j |c_j|^2; exactly 1 for the physical construction.
    pub fn weight_sum(&self) -> f64 {
        self.modes.iter().map(|m| m.c.norm_sqr()).sum()
    }

    /// Whether the two components are spectrally distinct enough that each
    /// signal interacts with only its own control: |Delta_1 - Delta_2|
    /// must dominate the summed signal bandwidths ~ 1/T. Returns `None`
    /// for dimensionless parameter sets (no physical frequencies).
    pub fn frequency_separation_ok(&self, margin: f64) -> Option<bool> {
        if self.pulse_t <= 0.0 {
            return None;
        }
        let split = (self.modes[0].delta - self.modes[1].delta).abs();
        let bandwidth = 2.0 / self.pulse_t;
        Some(split >= margin * bandwidth)
    }

    /// Effective single-mode coupling of component j in isolation.
    pub fn effective_single_coupling(&self, j: usize) -> f64 {
        (self.c_m * self.modes[j].c).norm()
    }

    fn channels(&self) -> Vec<Channel> {
        self.modes
            .iter()
            .map(|m| Channel {
                g: self.c_m * m.c,
                h: self.c_m.conj() * m.cbar,
                px: -m.p,
                rz: -m.inv_r + Complex64::new(m.retune, 0.0),
            })
            .collect()
    }
}

/// Joint state of the two optical components and the spin wave at the end
/// of a stage: transmitted fields per component plus the coherence.
#[derive(Debug, Clone)]
pub struct MultimodeState {
    pub a1: SignalField,
    pub a2: SignalField,
    pub b: SpinWave,
}

impl MultimodeState {
    pub fn total_norm2(&self) -> f64 {
        self.a1.norm2() + self.a2.norm2() + self.b.norm2()
    }

    pub fn assert_finite(&self) -> Result<()> {
        self.a1.assert_finite("multimode a1")?;
        self.a2.assert_finite("multimode a2")?;
        self.b.assert_finite("multimode b")
    }
}

fn multimode_propagator(mp: &MultimodeParams, grid: GridSpec, opts: SolveOptions) -> Propagator {
    Propagator::new(grid, mp.q, mp.channels(), opts.absorbing_mask)
}

/// Storage of both components: boundary fields enter at zeta = 0, the spin
/// wave starts from zero.
pub fn solve_multimode_storage(
    mp: &MultimodeParams,
    grid: &GridSpec,
    a1_in: &SignalField,
    a2_in: &SignalField,
) -> Result<MultimodeState> {
    solve_multimode_storage_with(mp, grid, a1_in, a2_in, SolveOptions::default())
}

pub fn solve_multimode_storage_with(
    mp: &MultimodeParams,
    grid: &GridSpec,
    a1_in: &SignalField,
    a2_in: &SignalField,
    opts: SolveOptions,
) -> Result<MultimodeState> {
    if a1_in.grid != *grid || a2_in.grid != *grid {
        return Err(QmemError::Shape("input field grids do not match solver grid".into()));
    }
    a1_in.assert_finite("multimode storage input 1")?;
    a2_in.assert_finite("multimode storage input 2")?;
    let prop = multimode_propagator(mp, *grid, opts);
    let out = prop.march(
        &Array2::zeros((grid.n_zeta, grid.n_x)),
        &[a1_in.data.clone(), a2_in.data.clone()],
    );
    let mut trans = out.transmitted.into_iter();
    let state = MultimodeState {
        a1: SignalField::from_data(*grid, trans.next().unwrap())?,
        a2: SignalField::from_data(*grid, trans.next().unwrap())?,
        b: SpinWave::from_data(*grid, out.b)?,
    };
    state.assert_finite()?;
    Ok(state)
}

/// Storage efficiency of a joint run: stored coherence over total input.
pub fn multimode_storage_efficiency(
    state: &MultimodeState,
    a1_in: &SignalField,
    a2_in: &SignalField,
) -> f64 {
    let n_in = a1_in.norm2() + a2_in.norm2();
    if n_in > 0.0 {
        state.b.norm2() / n_in
    } else {
        0.0
    }
}

/// Read-out with one or both control components active. The spin wave
/// drives the active channels with zero optical input; inactive channels
/// stay identically zero.
pub fn solve_multimode_retrieval(
    mp_out: &MultimodeParams,
    grid: &GridSpec,
    b_in: &SpinWave,
    selection: [bool; 2],
) -> Result<MultimodeState> {
    solve_multimode_retrieval_with(mp_out, grid, b_in, selection, SolveOptions::default())
}

pub fn solve_multimode_retrieval_with(
    mp_out: &MultimodeParams,
    grid: &GridSpec,
    b_in: &SpinWave,
    selection: [bool; 2],
    opts: SolveOptions,
) -> Result<MultimodeState> {
    if b_in.grid != *grid {
        return Err(QmemError::Shape("spin wave grid does not match solver grid".into()));
    }
    b_in.assert_finite("multimode retrieval input")?;
    let mut gated = *mp_out;
    for (m, active) in gated.modes.iter_mut().zip(selection) {
        if !active {
            m.c = Complex64::default();
            m.cbar = Complex64::default();
        }
    }
    let prop = multimode_propagator(&gated, *grid, opts);
    let zeros = Array2::zeros((grid.n_eps, grid.n_x));
    let out = prop.march(&b_in.data, &[zeros.clone(), zeros]);
    let mut trans = out.transmitted.into_iter();
    let state = MultimodeState {
        a1: SignalField::from_data(*grid, trans.next().unwrap())?,
        a2: SignalField::from_data(*grid, trans.next().unwrap())?,
        b: SpinWave::from_data(*grid, out.b)?,
    };
    state.assert_finite()?;
    Ok(state)
}

/// Longitudinal control-frequency offset that phasematches read-out of a
/// spin-wave band centered at `p_band` by a control with transverse
/// momentum `p_read`: the retrieved light leaves at k_X = p_band - p_read
/// and its paraxial phase is cancelled by detuning the control so the
/// channel acquires exp(i delta zeta) with delta = -(p_band - p_read)^2 / 4q.
pub fn paraxial_retuning(p_band: f64, p_read: f64, q: f64) -> f64 {
    -(p_band - p_read).powi(2) / (4.0 * q)
}

/// Transverse band membership for the mode-resolved energy split: bands
/// are intervals of half-width |p_1 - p_2| / 4 around each +p_j.
pub fn band_half_width(mp: &MultimodeParams) -> f64 {
    (mp.modes[0].p - mp.modes[1].p).abs() / 4.0
}

/// Spectral energy of the spin wave inside a k_X band (trapezoid-weighted
/// over zeta, matching `norm2` when the band covers the full axis).
pub fn spinwave_band_energy(beta: &SpinWave, center: f64, half_width: f64) -> f64 {
    let grid = beta.grid;
    if grid.is_1d() {
        return if center.abs() <= half_width { beta.norm2() } else { 0.0 };
    }
    let fft = TransverseFft::new(grid.n_x);
    let spectra = fft.row_spectra(&beta.data);
    let ks = grid.kx_nodes();
    let mut acc = 0.0;
    for (row, w) in spectra.outer_iter().zip(grid.zeta_weights()) {
        for (v, k) in row.iter().zip(ks.iter()) {
            if (k - center).abs() <= half_width {
                acc += w * v;
            }
        }
    }
    acc * 2.0 * grid.x_half_width
}

fn check_bands(mp: &MultimodeParams, grid: &GridSpec) -> Result<f64> {
    let hw = band_half_width(mp);
    if hw == 0.0 {
        return Err(QmemError::UnseparableBands(
            "the two control momenta coincide; k_X bands cannot be separated".into(),
        ));
    }
    let k_max = grid.kx_nodes().iter().cloned().fold(0.0, f64::max);
    let needed = mp.modes.iter().map(|m| m.p.abs()).fold(0.0, f64::max) + hw;
    if grid.is_1d() || needed > k_max {
        return Err(QmemError::UnseparableBands(format!(
            "k_X band edge {needed:.3} exceeds the grid's maximum wavenumber {k_max:.3}"
        )));
    }
    Ok(hw)
}

/// Cross-mode mixing fraction: inject only component 1 and measure the
/// share of stored spectral energy appearing in component 2's k_X band.
pub fn mixing_metric(mp: &MultimodeParams, grid: &GridSpec, a1_in: &SignalField) -> Result<f64> {
    let hw = check_bands(mp, grid)?;
    let state = solve_multimode_storage(mp, grid, a1_in, &SignalField::zeros(*grid))?;
    let e1 = spinwave_band_energy(&state.b, mp.modes[0].p, hw);
    let e2 = spinwave_band_energy(&state.b, mp.modes[1].p, hw);
    let total = e1 + e2;
    if total <= 0.0 {
        return Ok(0.0);
    }
    Ok(e2 / total)
}
