//! Optimal input and retrieval modes by singular-mode analysis of the
//! discretized storage and retrieval maps.
//!
//! The maps are never materialized: power iteration composes the forward
//! solver with its exact discrete adjoint (realized by reversed marching
//! with conjugated couplings), with quadrature weights folded in so that
//! sigma^2 is the energy efficiency of the leading mode.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{QmemError, Result};
use crate::field::{signal_inner, spinwave_inner, SignalField, SpinWave};
use crate::grid::GridSpec;
use crate::params::MemoryParams;
use crate::solver::{single_mode_propagator, SolveOptions};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 500;
/// Fixed seed for the random start vector (reproducible runs).
pub const START_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, Serialize)]
pub struct ModeDiagnostics {
    /// Leading singular value; sigma^2 is the mode's energy efficiency.
    pub sigma: f64,
    pub iterations: usize,
    /// Last change of the sigma estimate.
    pub residual: f64,
    pub converged: bool,
    /// Set when the coupling vanishes and the map is identically zero.
    pub zero_coupling: bool,
    /// Rough estimate of the subleading-to-leading eigenvalue ratio of the
    /// normal map, from the decay of successive sigma updates.
    pub gap_ratio: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct StorageModeResult {
    /// Unit-norm optimal input field.
    pub mode: SignalField,
    pub diagnostics: ModeDiagnostics,
}

#[derive(Debug, Clone)]
pub struct RetrievalModeResult {
    /// Unit-norm optimal spin-wave mode for retrieval.
    pub mode: SpinWave,
    pub diagnostics: ModeDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Storage,
    Retrieval,
}

/// Forward storage map: input field -> stored spin wave.
pub fn storage_apply(params: &MemoryParams, grid: &GridSpec, input: &SignalField) -> SpinWave {
    let prop = single_mode_propagator(params, *grid, SolveOptions::default());
    let out = prop.march(&Array2::zeros((grid.n_zeta, grid.n_x)), std::slice::from_ref(&input.data));
    SpinWave { grid: *grid, data: out.b }
}

/// Adjoint of the storage map with respect to the trapezoidal inner
/// products on both lattices.
pub fn storage_adjoint(params: &MemoryParams, grid: &GridSpec, cotangent: &SpinWave) -> SignalField {
    let prop = single_mode_propagator(params, *grid, SolveOptions::default());
    let mut weighted = cotangent.data.clone();
    for (mut row, w) in weighted.outer_iter_mut().zip(grid.zeta_weights()) {
        row.mapv_inplace(|v| v * w * grid.d_x());
    }
    let zeros: Vec<Array2<Complex64>> = vec![Array2::zeros((grid.n_eps, grid.n_x))];
    let (_, mut inbars) = prop.march_adjoint(&weighted, &zeros);
    let mut data = inbars.remove(0);
    for (mut row, w) in data.outer_iter_mut().zip(grid.eps_weights()) {
        row.mapv_inplace(|v| v / (w * grid.d_x()));
    }
    SignalField { grid: *grid, data }
}

/// Forward retrieval map: spin wave -> retrieved field at zeta = 1.
pub fn retrieval_apply(params: &MemoryParams, grid: &GridSpec, spin: &SpinWave) -> SignalField {
    let prop = single_mode_propagator(params, *grid, SolveOptions::default());
    let zero_in = vec![Array2::zeros((grid.n_eps, grid.n_x))];
    let out = prop.march(&spin.data, &zero_in);
    SignalField { grid: *grid, data: out.transmitted.into_iter().next().unwrap() }
}

/// Adjoint of the retrieval map (trapezoidal inner products).
pub fn retrieval_adjoint(
    params: &MemoryParams,
    grid: &GridSpec,
    cotangent: &SignalField,
) -> SpinWave {
    let prop = single_mode_propagator(params, *grid, SolveOptions::default());
    let mut weighted = cotangent.data.clone();
    for (mut row, w) in weighted.outer_iter_mut().zip(grid.eps_weights()) {
        row.mapv_inplace(|v| v * w * grid.d_x());
    }
    let (mut bbar, _) =
        prop.march_adjoint(&Array2::zeros((grid.n_zeta, grid.n_x)), std::slice::from_ref(&weighted));
    for (mut row, w) in bbar.outer_iter_mut().zip(grid.zeta_weights()) {
        row.mapv_inplace(|v| v / (w * grid.d_x()));
    }
    SpinWave { grid: *grid, data: bbar }
}

fn random_signal(grid: &GridSpec, seed: u64) -> SignalField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = Array2::from_shape_fn((grid.n_eps, grid.n_x), |_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    SignalField { grid: *grid, data }
}

fn random_spinwave(grid: &GridSpec, seed: u64) -> SpinWave {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let data = Array2::from_shape_fn((grid.n_zeta, grid.n_x), |_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    SpinWave { grid: *grid, data }
}

/// Optimal storage input mode by power iteration on the normal map.
pub fn optimal_storage_mode(
    params: &MemoryParams,
    grid: &GridSpec,
    tol: f64,
    max_iter: usize,
) -> Result<StorageModeResult> {
    optimal_storage_mode_deflated(params, grid, tol, max_iter, &[])
}

/// Same, orthogonalized against previously found modes (for the leading-k
/// subspace by deflation).
pub fn optimal_storage_mode_deflated(
    params: &MemoryParams,
    grid: &GridSpec,
    tol: f64,
    max_iter: usize,
    deflate: &[SignalField],
) -> Result<StorageModeResult> {
    if !(tol > 0.0) {
        return Err(QmemError::Parameter("tolerance must be positive".into()));
    }
    let mut v = random_signal(grid, START_SEED).normalized()?;
    project_out_signal(&mut v, deflate);
    v = v.normalized()?;
    if params.c == 0.0 {
        return Ok(StorageModeResult {
            mode: v,
            diagnostics: ModeDiagnostics {
                sigma: 0.0,
                iterations: 0,
                residual: 0.0,
                converged: true,
                zero_coupling: true,
                gap_ratio: None,
            },
        });
    }
    let mut sigma_prev = f64::NAN;
    let mut delta_prev = f64::NAN;
    let mut sigma = 0.0;
    let mut residual = f64::NAN;
    let mut gap = None;
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=max_iter {
        iterations = it;
        let w = storage_apply(params, grid, &v);
        let s2 = w.norm2();
        sigma = s2.sqrt();
        if sigma_prev.is_finite() {
            residual = (sigma - sigma_prev).abs();
            if delta_prev.is_finite() && delta_prev > 0.0 {
                gap = Some((residual / delta_prev).min(1.0));
            }
            delta_prev = residual;
            if residual < tol {
                converged = true;
                break;
            }
        }
        sigma_prev = sigma;
        let mut next = storage_adjoint(params, grid, &w);
        project_out_signal(&mut next, deflate);
        v = next.normalized()?;
    }
    Ok(StorageModeResult {
        mode: v,
        diagnostics: ModeDiagnostics {
            sigma,
            iterations,
            residual,
            converged,
            zero_coupling: false,
            gap_ratio: gap,
        },
    })
}

/// Optimal retrieval spin-wave mode by power iteration on the retrieval
/// normal map.
pub fn optimal_retrieval_mode(
    params: &MemoryParams,
    grid: &GridSpec,
    tol: f64,
    max_iter: usize,
) -> Result<RetrievalModeResult> {
    if !(tol > 0.0) {
        return Err(QmemError::Parameter("tolerance must be positive".into()));
    }
    let mut v = random_spinwave(grid, START_SEED).normalized()?;
    if params.c == 0.0 {
        return Ok(RetrievalModeResult {
            mode: v,
            diagnostics: ModeDiagnostics {
                sigma: 0.0,
                iterations: 0,
                residual: 0.0,
                converged: true,
                zero_coupling: true,
                gap_ratio: None,
            },
        });
    }
    let mut sigma_prev = f64::NAN;
    let mut delta_prev = f64::NAN;
    let mut sigma = 0.0;
    let mut residual = f64::NAN;
    let mut gap = None;
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=max_iter {
        iterations = it;
        let w = retrieval_apply(params, grid, &v);
        let s2 = w.norm2();
        sigma = s2.sqrt();
        if sigma_prev.is_finite() {
            residual = (sigma - sigma_prev).abs();
            if delta_prev.is_finite() && delta_prev > 0.0 {
                gap = Some((residual / delta_prev).min(1.0));
            }
            delta_prev = residual;
            if residual < tol {
                converged = true;
                break;
            }
        }
        sigma_prev = sigma;
        v = retrieval_adjoint(params, grid, &w).normalized()?;
    }
    Ok(RetrievalModeResult {
        mode: v,
        diagnostics: ModeDiagnostics {
            sigma,
            iterations,
            residual,
            converged,
            zero_coupling: false,
            gap_ratio: gap,
        },
    })
}

/// Leading k <= 8 storage modes by deflated power iteration.
pub fn leading_storage_modes(
    params: &MemoryParams,
    grid: &GridSpec,
    k: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<StorageModeResult>> {
    if k == 0 || k > 8 {
        return Err(QmemError::Parameter(format!("subspace size must be 1..=8, got {k}")));
    }
    let mut found: Vec<StorageModeResult> = Vec::with_capacity(k);
    for _ in 0..k {
        let prior: Vec<SignalField> = found.iter().map(|m| m.mode.clone()).collect();
        let next = optimal_storage_mode_deflated(params, grid, tol, max_iter, &prior)?;
        found.push(next);
    }
    Ok(found)
}

fn project_out_signal(v: &mut SignalField, basis: &[SignalField]) {
    for b in basis {
        let coeff = signal_inner(b, v) / b.norm2();
        v.data = &v.data - &b.data.mapv(|x| x * coeff);
    }
}

/// Squared-distance between unit modes after optimal global-phase
/// alignment: min over phase of ||a - e^{i phi} b||^2.
pub fn aligned_signal_distance2(a: &SignalField, b: &SignalField) -> f64 {
    let ip = signal_inner(a, b);
    (a.norm2() + b.norm2() - 2.0 * ip.norm()).max(0.0)
}

pub fn aligned_spinwave_distance2(a: &SpinWave, b: &SpinWave) -> f64 {
    let ip = spinwave_inner(a, b);
    (a.norm2() + b.norm2() - 2.0 * ip.norm()).max(0.0)
}

/// Explicit dense matrix of the storage or retrieval map: columns are
/// solver responses to Euclidean basis impulses of the flattened input
/// lattice (row-major). Intended for oracle tests on small grids; larger
/// grids are refused.
pub fn assemble_dense_map(
    params: &MemoryParams,
    grid: &GridSpec,
    kind: MapKind,
) -> Result<Array2<Complex64>> {
    let total = grid.n_eps * grid.n_zeta * grid.n_x;
    if total > 1 << 14 {
        return Err(QmemError::DenseMapTooLarge(format!(
            "grid has {total} points, dense assembly is limited to 2^14"
        )));
    }
    let (n_in, n_out) = match kind {
        MapKind::Storage => (grid.n_eps * grid.n_x, grid.n_zeta * grid.n_x),
        MapKind::Retrieval => (grid.n_zeta * grid.n_x, grid.n_eps * grid.n_x),
    };
    let mut matrix = Array2::zeros((n_out, n_in));
    for j in 0..n_in {
        match kind {
            MapKind::Storage => {
                let mut input = SignalField::zeros(*grid);
                input.data.as_slice_mut().unwrap()[j] = Complex64::new(1.0, 0.0);
                let out = storage_apply(params, grid, &input);
                for (i, v) in out.data.as_slice().unwrap().iter().enumerate() {
                    matrix[[i, j]] = *v;
                }
            }
            MapKind::Retrieval => {
                let mut input = SpinWave::zeros(*grid);
                input.data.as_slice_mut().unwrap()[j] = Complex64::new(1.0, 0.0);
                let out = retrieval_apply(params, grid, &input);
                for (i, v) in out.data.as_slice().unwrap().iter().enumerate() {
                    matrix[[i, j]] = *v;
                }
            }
        }
    }
    Ok(matrix)
}

/// Flattened quadrature weights of the input and output lattices of a map,
/// for forming the weighted matrix W_out^{1/2} A W_in^{-1/2} in oracle
/// comparisons.
pub fn map_weights(grid: &GridSpec, kind: MapKind) -> (Vec<f64>, Vec<f64>) {
    let eps: Vec<f64> = grid
        .eps_weights()
        .iter()
        .flat_map(|w| std::iter::repeat(w * grid.d_x()).take(grid.n_x))
        .collect();
    let zeta: Vec<f64> = grid
        .zeta_weights()
        .iter()
        .flat_map(|w| std::iter::repeat(w * grid.d_x()).take(grid.n_x))
        .collect();
    match kind {
        MapKind::Storage => (eps, zeta),
        MapKind::Retrieval => (zeta, eps),
    }
}
