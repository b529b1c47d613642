//! Brute-force oracle for the mode optimizer: the storage and retrieval
//! maps are assembled as dense matrices on small grids and their singular
//! values computed by an independent cyclic Jacobi eigensolver, then
//! compared against the matrix-free power iteration.

mod common;

use common::{dense_singular_values, hermitian_eigenvalues};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmem::grid::GridSpec;
use qmem::modes::{
    assemble_dense_map, leading_storage_modes, optimal_retrieval_mode, optimal_storage_mode,
    retrieval_apply, storage_apply, MapKind,
};
use qmem::params::MemoryParams;
use qmem::{SignalField, SpinWave};

#[test]
fn jacobi_solves_a_known_hermitian_matrix() {
    // H = U diag(3, 1) U^H for the unitary U = [[0.6, 0.8i], [0.8i, 0.6]]:
    // H = [[1.72, -0.96i], [0.96i, 2.28]] by hand
    let h = ndarray::array![
        [Complex64::new(1.72, 0.0), Complex64::new(0.0, -0.96)],
        [Complex64::new(0.0, 0.96), Complex64::new(2.28, 0.0)]
    ];
    let mut eigs = hermitian_eigenvalues(h);
    eigs.sort_by(f64::total_cmp);
    assert!((eigs[0] - 1.0).abs() < 1e-12);
    assert!((eigs[1] - 3.0).abs() < 1e-12);
}

#[test]
fn power_iteration_matches_dense_svd_for_storage() {
    let grid = GridSpec::new_1d(32, 32).unwrap();
    for c in [0.8, 2.0] {
        let params = MemoryParams::dimensionless(c, 1.0, 0.0).unwrap();
        let sigma_dense = dense_singular_values(&params, &grid, MapKind::Storage)[0];
        let iter = optimal_storage_mode(&params, &grid, 1e-10, 500).unwrap();
        assert!(iter.diagnostics.converged);
        assert!(
            (iter.diagnostics.sigma - sigma_dense).abs() < 1e-6,
            "C = {c}: power iteration {} vs dense {}",
            iter.diagnostics.sigma,
            sigma_dense
        );
    }
}

#[test]
fn power_iteration_matches_dense_svd_for_retrieval() {
    let grid = GridSpec::new_1d(32, 32).unwrap();
    let params = MemoryParams::dimensionless(1.5, 1.0, 0.0).unwrap();
    let sigma_dense = dense_singular_values(&params, &grid, MapKind::Retrieval)[0];
    let iter = optimal_retrieval_mode(&params, &grid, 1e-10, 500).unwrap();
    assert!(iter.diagnostics.converged);
    assert!(
        (iter.diagnostics.sigma - sigma_dense).abs() < 1e-6,
        "power iteration {} vs dense {}",
        iter.diagnostics.sigma,
        sigma_dense
    );
}

#[test]
fn all_weighted_singular_values_are_bounded_by_unity() {
    let grid = GridSpec::new_1d(48, 48).unwrap();
    let params = MemoryParams::dimensionless(2.0, 1.0, 0.0).unwrap();
    for s in dense_singular_values(&params, &grid, MapKind::Storage) {
        assert!(s <= 1.0 + 1e-3, "singular value {s} above unity");
    }
}

#[test]
fn assembled_matrix_agrees_with_solver_application() {
    let grid = GridSpec::new_1d(24, 24).unwrap();
    let params = MemoryParams::dimensionless(1.3, 1.0, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);

    let a = assemble_dense_map(&params, &grid, MapKind::Storage).unwrap();
    let mut input = SignalField::zeros(grid);
    for v in input.data.iter_mut() {
        *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let direct = storage_apply(&params, &grid, &input);
    let flat = input.data.as_slice().unwrap();
    for i in 0..grid.n_zeta {
        let mut acc = Complex64::default();
        for (j, x) in flat.iter().enumerate() {
            acc += a[[i, j]] * x;
        }
        assert!((acc - direct.data[[i, 0]]).norm() < 1e-10);
    }

    let r = assemble_dense_map(&params, &grid, MapKind::Retrieval).unwrap();
    let mut wave = SpinWave::zeros(grid);
    for v in wave.data.iter_mut() {
        *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let direct = retrieval_apply(&params, &grid, &wave);
    let flat = wave.data.as_slice().unwrap();
    for i in 0..grid.n_eps {
        let mut acc = Complex64::default();
        for (j, x) in flat.iter().enumerate() {
            acc += r[[i, j]] * x;
        }
        assert!((acc - direct.data[[i, 0]]).norm() < 1e-10);
    }
}

#[test]
fn deflated_second_mode_matches_dense_spectrum() {
    let grid = GridSpec::new_1d(32, 32).unwrap();
    let params = MemoryParams::dimensionless(2.0, 1.0, 0.0).unwrap();
    let sigmas = dense_singular_values(&params, &grid, MapKind::Storage);
    let modes = leading_storage_modes(&params, &grid, 2, 1e-10, 500).unwrap();
    assert!((modes[0].diagnostics.sigma - sigmas[0]).abs() < 1e-6);
    assert!(
        (modes[1].diagnostics.sigma - sigmas[1]).abs() < 1e-4,
        "second mode {} vs dense {}",
        modes[1].diagnostics.sigma,
        sigmas[1]
    );
}
