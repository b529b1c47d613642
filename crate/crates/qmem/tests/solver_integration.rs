//! Cross-module physics checks that exercise the solver chain end to end
//! on moderate grids.

use qmem::field::{make_gaussian_input, SpinWave};
use qmem::grid::GridSpec;
use qmem::modes::{optimal_storage_mode, storage_apply};
use qmem::params::MemoryParams;
use qmem::presets::cs_d2;
use qmem::solver::{
    solve_retrieval, solve_storage, total_efficiency, ReadoutGeometry,
};

#[test]
fn phasematched_backward_beats_colinear_backward() {
    let grid = GridSpec::new_1d(128, 128).unwrap();
    let preset = cs_d2();
    for c in [1.0, 2.0, 3.0] {
        let params = MemoryParams::dimensionless_with_preset(c, 1.0, 0.0, &preset).unwrap();
        let input = optimal_storage_mode(&params, &grid, 1e-8, 500).unwrap().mode;
        let pm = ReadoutGeometry::phasematched(&preset, 0.0, 0.0);
        let cb = ReadoutGeometry::colinear_backward(&preset, 0.0, 0.0);
        let nu_pm = total_efficiency(&params, &params, &pm, &grid, &input).unwrap().nu;
        let nu_cb = total_efficiency(&params, &params, &cb, &grid, &input).unwrap().nu;
        assert!(nu_pm > nu_cb, "C = {c}: phasematched {nu_pm} vs colinear {nu_cb}");
    }
}

#[test]
fn roundtrip_efficiency_grows_with_coupling() {
    let grid = GridSpec::new_1d(128, 128).unwrap();
    let preset = cs_d2();
    let geom = ReadoutGeometry::phasematched(&preset, 0.0, 0.0);
    let mut last = 0.0;
    for c in [0.5, 1.0, 2.0, 4.0] {
        let params = MemoryParams::dimensionless_with_preset(c, 1.0, 0.0, &preset).unwrap();
        let input = optimal_storage_mode(&params, &grid, 1e-8, 500).unwrap().mode;
        let nu = total_efficiency(&params, &params, &geom, &grid, &input).unwrap().nu;
        assert!(nu > last, "nu not increasing at C = {c}: {nu} <= {last}");
        last = nu;
    }
    assert!(last > 0.97, "nu at C = 4 should approach unity, got {last}");
}

#[test]
fn strong_readout_extracts_a_mirrored_optimal_wave() {
    // readout at C = 10 is stiff; 512 steps keep the scheme's conservation
    // defect below 1e-3
    let grid = GridSpec::new_1d(512, 512).unwrap();
    let params = MemoryParams::dimensionless(2.0, 1.0, 0.0).unwrap();
    let input = optimal_storage_mode(&params, &grid, 1e-9, 500).unwrap().mode;
    let beta = solve_storage(&params, &grid, &input).unwrap().beta.normalized().unwrap();
    let strong = params.with_coupling(10.0);
    let r = solve_retrieval(&strong, &grid, &beta.mirrored()).unwrap();
    assert!(r.eta_retrieval > 0.95, "eta_retrieval = {}", r.eta_retrieval);
    assert!(r.eta_retrieval <= 1.0 + 1e-3, "eta_retrieval = {}", r.eta_retrieval);
}

#[test]
fn retrieval_momentum_reflects_the_control_angle() {
    // store with an angled control (p = 4), then read out either with the
    // same angle (output at k ~ 0) or colinearly (output at k ~ -4)
    let grid = GridSpec::new(48, 48, 64, 3.0).unwrap();
    let p = 4.0;
    let angled = MemoryParams::dimensionless(2.0, 1.0, p).unwrap();
    let straight = MemoryParams::dimensionless(2.0, 1.0, 0.0).unwrap();
    let input = make_gaussian_input(grid, 0.5, 0.12, 0.6).unwrap();
    let beta = solve_storage(&angled, &grid, &input).unwrap().beta;

    let peak_of = |wave: &qmem::field::SignalField| {
        let fft = qmem::fft::TransverseFft::new(grid.n_x);
        let spec = fft.row_spectra(&wave.data);
        let mut power = vec![0.0; grid.n_x];
        for (row, w) in spec.outer_iter().zip(grid.eps_weights()) {
            for (acc, v) in power.iter_mut().zip(row.iter()) {
                *acc += w * v;
            }
        }
        let ks = grid.kx_nodes();
        ks.iter()
            .zip(power.iter())
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| *k)
            .unwrap()
    };
    let dk = std::f64::consts::PI / grid.x_half_width;

    let same_angle = solve_retrieval(&angled, &grid, &beta).unwrap();
    assert!(peak_of(&same_angle.alpha_out).abs() <= 1.5 * dk);

    let colinear = solve_retrieval(&straight, &grid, &beta).unwrap();
    assert!((peak_of(&colinear.alpha_out) + p).abs() <= 1.5 * dk);
}

#[test]
fn stored_wave_decays_into_the_medium_at_strong_coupling() {
    // at large C the optimal stored wave concentrates toward the input face
    let grid = GridSpec::new_1d(128, 128).unwrap();
    let params = MemoryParams::dimensionless(3.0, 1.0, 0.0).unwrap();
    let input = optimal_storage_mode(&params, &grid, 1e-9, 500).unwrap().mode;
    let beta = storage_apply(&params, &grid, &input);
    let half = grid.n_zeta / 2;
    let front: f64 = beta.data.iter().take(half).map(|v| v.norm_sqr()).sum();
    let back: f64 = beta.data.iter().skip(half).map(|v| v.norm_sqr()).sum();
    assert!(front > back, "front {front} vs back {back}");
}

#[test]
fn empty_medium_readout_emits_nothing() {
    let grid = GridSpec::new_1d(64, 64).unwrap();
    let params = MemoryParams::dimensionless(2.0, 1.0, 0.0).unwrap();
    let r = solve_retrieval(&params, &grid, &SpinWave::zeros(grid)).unwrap();
    assert_eq!(r.alpha_out.norm2(), 0.0);
    assert_eq!(r.eta_retrieval, 0.0);
}
