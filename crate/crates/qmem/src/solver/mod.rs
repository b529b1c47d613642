//! Single-mode storage and retrieval dynamics, backward-readout geometry
//! and the full store -> flip/phase -> retrieve efficiency chain.

mod propagator;

pub(crate) use propagator::{Channel, Propagator};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QmemError, Result};
use crate::field::{SignalField, SpinWave};
use crate::grid::GridSpec;
use crate::params::{MemoryParams, SPEED_OF_LIGHT};
use crate::presets::PhysicalPreset;

/// Control-field angle eliminating the longitudinal spin-wave momentum:
/// theta_c = arccos(omega_s / (omega_s + omega_13)).
pub fn phasematch_angle(omega_s: f64, omega_13: f64) -> f64 {
    (omega_s / (omega_s + omega_13)).clamp(-1.0, 1.0).acos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadoutDirection {
    Forward,
    Backward,
}

/// Read-out configuration: control direction and angle plus the wavevector
/// mismatch components of the write and read stages.
///
/// Mismatches follow dk = k_s - k_c; `dk_perp` holds the (x, y) components,
/// of which only x enters the simulated dynamics (one transverse dimension).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutGeometry {
    pub direction: ReadoutDirection,
    /// Read-out control angle (rad).
    pub theta_r: f64,
    /// Read-out control frequency (rad/s).
    pub omega_c_r: f64,
    pub dk_perp: [f64; 2],
    pub dk_z: f64,
    pub dk_perp_r: [f64; 2],
    pub dk_z_r: f64,
    /// Read-out stage polarization decay (rad/s).
    pub gamma_r: f64,
    /// Read-out stage detuning (rad/s).
    pub delta_r: f64,
}

impl ReadoutGeometry {
    /// Phasematched backward read-out: write control angled at theta_c with
    /// the initial state energetically above the storage state, read-out
    /// control reversed at the same angle. Longitudinal mismatches vanish by
    /// construction and the transverse components cancel pairwise.
    pub fn phasematched(preset: &PhysicalPreset, gamma_r: f64, delta_r: f64) -> Self {
        let theta = phasematch_angle(preset.omega_s, preset.omega_13);
        let k_c = (preset.omega_s + preset.omega_13) / SPEED_OF_LIGHT;
        Self {
            direction: ReadoutDirection::Backward,
            theta_r: theta,
            omega_c_r: preset.omega_s + preset.omega_13,
            dk_perp: [-k_c * theta.sin(), 0.0],
            dk_z: 0.0,
            dk_perp_r: [k_c * theta.sin(), 0.0],
            dk_z_r: 0.0,
            gamma_r,
            delta_r,
        }
    }

    /// Colinear backward read-out with the conventional level ordering
    /// (initial state below the storage state): the Stokes shift leaves a
    /// longitudinal mismatch -omega_13/c on both stages.
    pub fn colinear_backward(preset: &PhysicalPreset, gamma_r: f64, delta_r: f64) -> Self {
        let dk_z = -preset.omega_13 / SPEED_OF_LIGHT;
        Self {
            direction: ReadoutDirection::Backward,
            theta_r: 0.0,
            omega_c_r: preset.omega_s - preset.omega_13,
            dk_perp: [0.0; 2],
            dk_z,
            dk_perp_r: [0.0; 2],
            dk_z_r: dk_z,
            gamma_r,
            delta_r,
        }
    }

    /// Colinear forward read-out: the read stage reabsorbs the stored
    /// mismatch exactly, so no residual phase remains.
    pub fn colinear_forward(preset: &PhysicalPreset, gamma_r: f64, delta_r: f64) -> Self {
        Self {
            direction: ReadoutDirection::Forward,
            theta_r: 0.0,
            omega_c_r: preset.omega_s - preset.omega_13,
            dk_perp: [0.0; 2],
            dk_z: 0.0,
            dk_perp_r: [0.0; 2],
            dk_z_r: 0.0,
            gamma_r,
            delta_r,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StorageResult {
    /// Spin wave at eps = 1.
    pub beta: SpinWave,
    /// Optical amplitude leaving the far face, per eps node.
    pub alpha_transmitted: SignalField,
    /// norm2(beta) / norm2(alpha_in).
    pub eta_storage: f64,
    /// Solver warnings (e.g. a failed convergence probe).
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RetrievalResult {
    /// Retrieved optical amplitude at zeta = 1, per eps node.
    pub alpha_out: SignalField,
    /// Spin wave left in the medium at eps = 1.
    pub beta_remaining: SpinWave,
    /// norm2(alpha_out) / norm2(beta_in).
    pub eta_retrieval: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    /// Apply a smooth cosine absorbing mask over the outer 10% of the
    /// transverse domain (for angled-beam runs).
    pub absorbing_mask: bool,
}

pub(crate) fn single_mode_propagator(
    params: &MemoryParams,
    grid: GridSpec,
    opts: SolveOptions,
) -> Propagator {
    Propagator::new(grid, params.q, vec![Channel::real(params.c, params.p)], opts.absorbing_mask)
}

/// Integrate the storage stage: boundary field `alpha_in` enters at
/// zeta = 0, the spin wave starts from zero.
pub fn solve_storage(
    params: &MemoryParams,
    grid: &GridSpec,
    alpha_in: &SignalField,
) -> Result<StorageResult> {
    solve_storage_with(params, grid, alpha_in, SolveOptions::default())
}

pub fn solve_storage_with(
    params: &MemoryParams,
    grid: &GridSpec,
    alpha_in: &SignalField,
    opts: SolveOptions,
) -> Result<StorageResult> {
    if alpha_in.grid != *grid {
        return Err(QmemError::Shape("input field grid does not match solver grid".into()));
    }
    alpha_in.assert_finite("storage input")?;
    let prop = single_mode_propagator(params, *grid, opts);
    let out = prop.march(&SpinWave::zeros(*grid).data, std::slice::from_ref(&alpha_in.data));
    let beta = SpinWave::from_data(*grid, out.b)?;
    let transmitted = SignalField::from_data(*grid, out.transmitted.into_iter().next().unwrap())?;
    beta.assert_finite("storage")?;
    transmitted.assert_finite("storage")?;
    let n_in = alpha_in.norm2();
    let eta = if n_in > 0.0 { beta.norm2() / n_in } else { 0.0 };
    Ok(StorageResult { beta, alpha_transmitted: transmitted, eta_storage: eta, warnings: vec![] })
}

/// Storage with a 2x-refinement convergence probe: if the storage
/// efficiency changes by more than 5% relative, an "unconverged" warning is
/// attached to the result.
pub fn solve_storage_checked(
    params: &MemoryParams,
    grid: &GridSpec,
    alpha_in: &SignalField,
) -> Result<StorageResult> {
    let mut result = solve_storage(params, grid, alpha_in)?;
    let rel = storage_convergence_probe(params, grid, alpha_in)?;
    if rel > 0.05 {
        result
            .warnings
            .push(format!("unconverged: storage efficiency changes by {:.1}% under 2x refinement", rel * 100.0));
    }
    Ok(result)
}

/// Relative change of the storage efficiency under 2x refinement in eps and
/// zeta (the input is linearly interpolated onto the refined grid).
pub fn storage_convergence_probe(
    params: &MemoryParams,
    grid: &GridSpec,
    alpha_in: &SignalField,
) -> Result<f64> {
    let coarse = solve_storage(params, grid, alpha_in)?;
    let fine_grid = grid.refined(2);
    let fine_in = refine_signal(alpha_in, fine_grid)?;
    let fine = solve_storage(params, &fine_grid, &fine_in)?;
    let denom = fine.eta_storage.max(1e-30);
    Ok((fine.eta_storage - coarse.eta_storage).abs() / denom)
}

fn refine_signal(field: &SignalField, fine: GridSpec) -> Result<SignalField> {
    let mut data = Array2::zeros((fine.n_eps, fine.n_x));
    for j in 0..fine.n_eps {
        if j % 2 == 0 {
            data.row_mut(j).assign(&field.data.row(j / 2));
        } else {
            let lo = field.data.row(j / 2);
            let hi = field.data.row(j / 2 + 1);
            for m in 0..fine.n_x {
                data[[j, m]] = 0.5 * (lo[m] + hi[m]);
            }
        }
    }
    SignalField::from_data(fine, data)
}

/// Integrate the retrieval stage: the spin wave `beta_in` drives the
/// optical field with zero input at zeta = 0.
pub fn solve_retrieval(
    params_out: &MemoryParams,
    grid: &GridSpec,
    beta_in: &SpinWave,
) -> Result<RetrievalResult> {
    solve_retrieval_with(params_out, grid, beta_in, SolveOptions::default())
}

pub fn solve_retrieval_with(
    params_out: &MemoryParams,
    grid: &GridSpec,
    beta_in: &SpinWave,
    opts: SolveOptions,
) -> Result<RetrievalResult> {
    if beta_in.grid != *grid {
        return Err(QmemError::Shape("spin wave grid does not match solver grid".into()));
    }
    beta_in.assert_finite("retrieval input")?;
    let prop = single_mode_propagator(params_out, *grid, opts);
    let zero_in = SignalField::zeros(*grid);
    let out = prop.march(&beta_in.data, std::slice::from_ref(&zero_in.data));
    let alpha_out = SignalField::from_data(*grid, out.transmitted.into_iter().next().unwrap())?;
    let beta_remaining = SpinWave::from_data(*grid, out.b)?;
    alpha_out.assert_finite("retrieval")?;
    beta_remaining.assert_finite("retrieval")?;
    let n_in = beta_in.norm2();
    let eta = if n_in > 0.0 { alpha_out.norm2() / n_in } else { 0.0 };
    Ok(RetrievalResult { alpha_out, beta_remaining, eta_retrieval: eta, warnings: vec![] })
}

/// Residual phase phi(zeta, X) acquired between storage and backward
/// read-out:
///
/// ```text
/// phi = (dk_perp_x + dk_perp_x^r) x + (dk_z + dk_z^r) L zeta
///       + chi[T, L zeta] - chi^r[0, L (1 - zeta)]
/// ```
///
/// with chi(tau, z) = [w(tau) + |kappa|^2 z] / Gamma. The transverse term is
/// evaluated through the same momentum rescaling that defines p, so it only
/// contributes on grids with a transverse dimension.
pub fn residual_phase(
    geom: &ReadoutGeometry,
    params: &MemoryParams,
    grid: &GridSpec,
) -> Result<Array2<Complex64>> {
    let dk_perp_sum = geom.dk_perp[0] + geom.dk_perp_r[0];
    let x_coeff = if dk_perp_sum == 0.0 || grid.is_1d() {
        0.0
    } else {
        if !(params.omega_1m > 0.0) || !(params.length > 0.0) {
            return Err(QmemError::Parameter(
                "transverse mismatch requires physical omega_1m and length".into(),
            ));
        }
        let x_scale = (params.omega_1m / (2.0 * params.length * SPEED_OF_LIGHT)).sqrt();
        dk_perp_sum / x_scale
    };
    let z_slope = (geom.dk_z + geom.dk_z_r) * params.length;
    let inv_gamma_r = {
        let g = Complex64::new(geom.delta_r, -geom.gamma_r);
        if g.norm_sqr() == 0.0 { Complex64::default() } else { g.inv() }
    };
    let kappa2_l = params.kappa2_l();

    let xs = grid.x_nodes();
    let mut phi = Array2::zeros((grid.n_zeta, grid.n_x));
    for (l, zeta) in grid.zeta_nodes().iter().enumerate() {
        let chi_write = params.chi(params.omega_t, *zeta);
        let chi_read = inv_gamma_r * (kappa2_l * (1.0 - zeta));
        let longitudinal = Complex64::new(z_slope * zeta, 0.0) + chi_write - chi_read;
        for (m, x) in xs.iter().enumerate() {
            phi[[l, m]] = longitudinal + Complex64::new(x_coeff * x, 0.0);
        }
    }
    Ok(phi)
}

/// Dress the stored spin wave for backward read-out: mirror in zeta and
/// multiply by exp(i phi). The norm is preserved whenever Im phi = 0.
pub fn prepare_backward(beta: &SpinWave, phi: &Array2<Complex64>) -> Result<SpinWave> {
    if phi.dim() != beta.data.dim() {
        return Err(QmemError::Shape("phase field shape does not match spin wave".into()));
    }
    let mirrored = beta.mirrored();
    let mut data = mirrored.data;
    for (v, p) in data.iter_mut().zip(phi.iter()) {
        *v *= (Complex64::new(0.0, 1.0) * p).exp();
    }
    SpinWave::from_data(beta.grid, data)
}

#[derive(Debug, Clone)]
pub struct RoundtripResult {
    /// Retrieval probability over the full chain.
    pub nu: f64,
    pub eta_storage: f64,
    pub eta_retrieval: f64,
    pub alpha_out: SignalField,
    pub beta_stored: SpinWave,
    pub warnings: Vec<String>,
}

/// Full store -> (flip/phase) -> retrieve chain; nu is the energy ratio of
/// the retrieved output to the input signal.
pub fn total_efficiency(
    params_in: &MemoryParams,
    params_out: &MemoryParams,
    geom: &ReadoutGeometry,
    grid: &GridSpec,
    alpha_in: &SignalField,
) -> Result<RoundtripResult> {
    let storage = solve_storage(params_in, grid, alpha_in)?;
    let readout_wave = match geom.direction {
        ReadoutDirection::Backward => {
            let phi = residual_phase(geom, params_in, grid)?;
            prepare_backward(&storage.beta, &phi)?
        }
        ReadoutDirection::Forward => storage.beta.clone(),
    };
    let retrieval = solve_retrieval(params_out, grid, &readout_wave)?;
    let n_in = alpha_in.norm2();
    let nu = if n_in > 0.0 { retrieval.alpha_out.norm2() / n_in } else { 0.0 };
    let mut warnings = storage.warnings.clone();
    warnings.extend(retrieval.warnings.iter().cloned());
    Ok(RoundtripResult {
        nu,
        eta_storage: storage.eta_storage,
        eta_retrieval: retrieval.eta_retrieval,
        alpha_out: retrieval.alpha_out,
        beta_stored: storage.beta,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_gaussian_input;
    use crate::presets::cs_d2;
    use std::f64::consts::TAU;

    fn grid_1d() -> GridSpec {
        GridSpec::new_1d(96, 96).unwrap()
    }

    #[test]
    fn zero_coupling_transmits_everything() {
        let grid = grid_1d();
        let params = MemoryParams::dimensionless(0.0, 1.0, 0.0).unwrap();
        let input = make_gaussian_input(grid, 0.5, 0.08, 0.5).unwrap();
        let out = solve_storage(&params, &grid, &input).unwrap();
        assert_eq!(out.beta.norm2(), 0.0);
        assert!((out.alpha_transmitted.norm2() - input.norm2()).abs() < 1e-12);
    }

    #[test]
    fn zero_input_gives_zero_everything() {
        let grid = grid_1d();
        let params = MemoryParams::dimensionless(2.0, 1.0, 0.0).unwrap();
        let out = solve_storage(&params, &grid, &SignalField::zeros(grid)).unwrap();
        assert_eq!(out.beta.norm2(), 0.0);
        assert_eq!(out.alpha_transmitted.norm2(), 0.0);

        let r = solve_retrieval(&params, &grid, &SpinWave::zeros(grid)).unwrap();
        assert_eq!(r.alpha_out.norm2(), 0.0);
    }

    #[test]
    fn excitation_is_conserved_without_decay() {
        let grid = grid_1d();
        let params = MemoryParams::dimensionless(2.0, 1.0, 0.0).unwrap();
        let input = make_gaussian_input(grid, 0.5, 0.1, 0.5).unwrap();
        let out = solve_storage(&params, &grid, &input).unwrap();
        let total = out.beta.norm2() + out.alpha_transmitted.norm2();
        assert!(
            (total - input.norm2()).abs() < 1e-3,
            "conservation defect {}",
            (total - input.norm2()).abs()
        );
    }

    #[test]
    fn retrieval_conserves_excitation() {
        let grid = grid_1d();
        let params = MemoryParams::dimensionless(1.5, 1.0, 0.0).unwrap();
        let mut beta = SpinWave::zeros(grid);
        for (l, z) in grid.zeta_nodes().iter().enumerate() {
            beta.data[[l, 0]] = Complex64::new((-3.0 * z).exp(), 0.0);
        }
        let beta = beta.normalized().unwrap();
        let r = solve_retrieval(&params, &grid, &beta).unwrap();
        let total = r.alpha_out.norm2() + r.beta_remaining.norm2();
        assert!((total - 1.0).abs() < 1e-3, "conservation defect {}", (total - 1.0).abs());
    }

    #[test]
    fn phasematch_angle_limits() {
        assert_eq!(phasematch_angle(1.0e15, 0.0), 0.0);
        let preset = cs_d2();
        let theta = phasematch_angle(preset.omega_s, preset.omega_13);
        let deg = theta.to_degrees();
        assert!((0.4..0.6).contains(&deg), "theta_c = {deg} deg");
        // small-angle expansion
        let approx = (2.0 * preset.omega_13 / preset.omega_s).sqrt();
        assert!((theta - approx).abs() / theta < 0.01);
    }

    #[test]
    fn residual_phase_vanishes_without_mismatch() {
        let grid = grid_1d();
        let params = MemoryParams::dimensionless(2.0, 1.0, 0.0).unwrap();
        let preset = cs_d2();
        let mut geom = ReadoutGeometry::phasematched(&preset, 0.0, 0.0);
        geom.dk_perp = [0.0; 2];
        geom.dk_perp_r = [0.0; 2];
        let phi = residual_phase(&geom, &params, &grid).unwrap();
        assert!(phi.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn colinear_slope_matches_arithmetic() {
        let grid = grid_1d();
        let preset = cs_d2();
        let params = MemoryParams::dimensionless_with_preset(2.0, 1.0, 0.0, &preset).unwrap();
        let geom = ReadoutGeometry::colinear_backward(&preset, 0.0, 0.0);
        let phi = residual_phase(&geom, &params, &grid).unwrap();
        let total = phi[[grid.n_zeta - 1, 0]].re - phi[[0, 0]].re;
        let expected = -2.0 * preset.omega_13 * preset.length / SPEED_OF_LIGHT;
        assert!((total - expected).abs() / expected.abs() < 1e-12);
        assert!((expected.abs() - 7.7).abs() < 0.1, "slope magnitude {}", expected.abs());
    }

    #[test]
    fn prepare_backward_preserves_norm_for_real_phase() {
        let grid = grid_1d();
        let mut beta = SpinWave::zeros(grid);
        for (l, z) in grid.zeta_nodes().iter().enumerate() {
            beta.data[[l, 0]] = Complex64::new((-2.0 * z).exp(), 0.3 * z);
        }
        let phi = Array2::from_elem((grid.n_zeta, 1), Complex64::new(1.3, 0.0));
        let dressed = prepare_backward(&beta, &phi).unwrap();
        assert!((dressed.norm2() - beta.norm2()).abs() < 1e-12);

        // phi = 0 on a symmetric wave reproduces the input
        let mut sym = SpinWave::zeros(grid);
        for (l, z) in grid.zeta_nodes().iter().enumerate() {
            sym.data[[l, 0]] = Complex64::new((z - 0.5).powi(2), 0.0);
        }
        let id = prepare_backward(&sym, &Array2::zeros((grid.n_zeta, 1))).unwrap();
        let diff: f64 = (&id.data - &sym.data).iter().map(|v| v.norm()).sum();
        assert!(diff < 1e-14);
    }

    #[test]
    fn solver_is_linear_in_the_input() {
        let grid = grid_1d();
        let params = MemoryParams::dimensionless(1.3, 1.0, 0.0).unwrap();
        let f1 = make_gaussian_input(grid, 0.35, 0.08, 0.5).unwrap();
        let f2 = make_gaussian_input(grid, 0.65, 0.1, 0.5).unwrap();
        let a = Complex64::new(0.7, -0.4);
        let b = Complex64::new(-0.2, 1.1);
        let mut combo = SignalField::zeros(grid);
        combo.data = f1.data.mapv(|v| v * a) + f2.data.mapv(|v| v * b);
        let o1 = solve_storage(&params, &grid, &f1).unwrap();
        let o2 = solve_storage(&params, &grid, &f2).unwrap();
        let oc = solve_storage(&params, &grid, &combo).unwrap();
        let expect = o1.beta.data.mapv(|v| v * a) + o2.beta.data.mapv(|v| v * b);
        let diff: f64 = (&oc.beta.data - &expect).iter().map(|v| v.norm()).max_by(f64::total_cmp).unwrap();
        assert!(diff < 1e-10);
    }

    #[test]
    fn paraxial_leakage_is_negligible_for_wide_domains() {
        let grid = GridSpec::new(48, 48, 64, 4.0).unwrap();
        let params = MemoryParams::dimensionless(0.0, 1.0, 0.0).unwrap();
        let input = make_gaussian_input(grid, 0.5, 0.1, 0.5).unwrap();
        let out = solve_storage(&params, &grid, &input).unwrap();
        assert!((out.alpha_transmitted.norm2() - input.norm2()).abs() < 1e-6);
    }

    #[test]
    fn convergence_probe_reports_small_change_on_fine_grids() {
        let grid = GridSpec::new_1d(64, 64).unwrap();
        let params = MemoryParams::dimensionless(2.0, 1.0, 0.0).unwrap();
        let input = make_gaussian_input(grid, 0.5, 0.12, 0.5).unwrap();
        let rel = storage_convergence_probe(&params, &grid, &input).unwrap();
        assert!(rel < 0.01, "probe = {rel}");
        let checked = solve_storage_checked(&params, &grid, &input).unwrap();
        assert!(checked.warnings.is_empty());
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let grid = grid_1d();
        let other = GridSpec::new_1d(32, 32).unwrap();
        let params = MemoryParams::dimensionless(1.0, 1.0, 0.0).unwrap();
        let input = make_gaussian_input(other, 0.5, 0.1, 0.5).unwrap();
        assert!(solve_storage(&params, &grid, &input).is_err());
    }

    #[test]
    fn geometry_constructors_are_consistent() {
        let preset = cs_d2();
        let pm = ReadoutGeometry::phasematched(&preset, 0.0, TAU * 10e9);
        assert_eq!(pm.dk_z + pm.dk_z_r, 0.0);
        assert_eq!(pm.dk_perp[0] + pm.dk_perp_r[0], 0.0);
        let cb = ReadoutGeometry::colinear_backward(&preset, 0.0, TAU * 10e9);
        assert!(cb.dk_z < 0.0);
        let cf = ReadoutGeometry::colinear_forward(&preset, 0.0, TAU * 10e9);
        assert_eq!(cf.direction, ReadoutDirection::Forward);
    }
}
