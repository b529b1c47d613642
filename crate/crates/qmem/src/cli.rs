//! Command-line front end: subcommand dispatch, config resolution, sweep
//! orchestration and artifact writing.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{self, GeometryKind, OptimizeKind, RunConfig, RunMode};
use crate::design::{design_report, ConstraintMargins, DesignInput};
use crate::error::{QmemError, Result};
use crate::fft::TransverseFft;
use crate::field::{make_gaussian_input, SignalField, SpinWave};
use crate::grid::GridSpec;
use crate::io;
use crate::modes::{optimal_retrieval_mode, optimal_storage_mode};
use crate::multimode::{
    band_half_width, mixing_metric, paraxial_retuning, solve_multimode_retrieval,
    solve_multimode_storage, spinwave_band_energy, MultimodeParams,
};
use crate::params::MemoryParams;
use crate::presets::{builtin, load_preset, PhysicalPreset};
use crate::solver::{
    solve_retrieval, solve_storage_checked, total_efficiency, ReadoutGeometry,
};

#[derive(Parser)]
#[command(name = "qmem", version, about = "Ensemble quantum memory simulator")]
pub struct Cli {
    /// Run configuration file (key = value format).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Built-in preset name (overrides the config).
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    /// Worker threads for sweep cells (default: hardware parallelism).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Treat unknown or duplicate config keys as errors.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Storage stage only: input field in, spin wave out.
    Store,
    /// Retrieval stage only: spin wave in, output field out.
    Retrieve,
    /// Full store -> flip/phase -> retrieve chain.
    Roundtrip,
    /// Grid of roundtrips over (C_in, C_out).
    Sweep,
    /// Two-component storage and selective read-out.
    Multimode,
    /// Optimal input or retrieval mode by power iteration.
    Optimize,
    /// Closed-form design report for a physical preset.
    Physical,
}

impl Command {
    fn mode(&self) -> RunMode {
        match self {
            Command::Store => RunMode::Store,
            Command::Retrieve => RunMode::Retrieve,
            Command::Roundtrip => RunMode::Roundtrip,
            Command::Sweep => RunMode::Sweep,
            Command::Multimode => RunMode::Multimode,
            Command::Optimize => RunMode::Optimize,
            Command::Physical => RunMode::Physical,
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own help/version on stdout with status 0
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let start = Instant::now();
    let mut loaded = match &cli.config {
        Some(path) => config::load_config(path, cli.strict)?,
        None => config::LoadedConfig { config: RunConfig::default(), warnings: vec![] },
    };
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let cfg = &mut loaded.config;
    cfg.mode = cli.command.mode();
    if let Some(name) = &cli.preset {
        cfg.preset = name.clone();
        cfg.preset_file = None;
    }

    let out_dir = resolve_out_dir(cli, cfg)?;
    let preset = match &cfg.preset_file {
        Some(path) => load_preset(Path::new(path))?,
        None => builtin(&cfg.preset)?,
    };

    let summary = match cfg.mode {
        RunMode::Store => run_store(cfg, &preset, &out_dir)?,
        RunMode::Retrieve => run_retrieve(cfg, &preset, &out_dir)?,
        RunMode::Roundtrip => run_roundtrip(cfg, &preset, &out_dir)?,
        RunMode::Sweep => run_sweep(cli, cfg, &preset, &out_dir)?,
        RunMode::Multimode => run_multimode(cfg, &preset, &out_dir)?,
        RunMode::Optimize => run_optimize(cfg, &preset, &out_dir)?,
        RunMode::Physical => run_physical(&preset)?,
    };

    if cfg.formats.json {
        io::write_json(&out_dir.join("summary.json"), &summary)?;
        io::write_meta(&out_dir.join("meta.json"), start.elapsed())?;
    }
    println!("{}", serde_json::to_string_pretty(&summary).unwrap());
    Ok(())
}

fn resolve_out_dir(cli: &Cli, cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os("QMEM_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let probe = dir.join(".qmem-writable");
    std::fs::write(&probe, b"")?;
    std::fs::remove_file(&probe)?;
    Ok(dir)
}

fn build_params(cfg: &RunConfig, preset: &PhysicalPreset, c: f64) -> Result<MemoryParams> {
    MemoryParams::dimensionless_with_preset(c, cfg.q, cfg.p, preset)
}

fn build_geometry(cfg: &RunConfig, preset: &PhysicalPreset) -> ReadoutGeometry {
    match cfg.geometry {
        GeometryKind::Phasematched => ReadoutGeometry::phasematched(preset, 0.0, 0.0),
        GeometryKind::ColinearBackward => ReadoutGeometry::colinear_backward(preset, 0.0, 0.0),
        GeometryKind::ColinearForward => ReadoutGeometry::colinear_forward(preset, 0.0, 0.0),
    }
}

fn storage_input(cfg: &RunConfig, params: &MemoryParams, grid: &GridSpec) -> Result<SignalField> {
    if cfg.input.optimal {
        Ok(optimal_storage_mode(params, grid, cfg.tol, cfg.max_iter)?.mode)
    } else {
        make_gaussian_input(*grid, cfg.input.eps_center, cfg.input.eps_width, cfg.input.x_width)
    }
}

fn run_store(cfg: &RunConfig, preset: &PhysicalPreset, out: &Path) -> Result<Value> {
    let params = build_params(cfg, preset, cfg.c_in)?;
    let input = storage_input(cfg, &params, &cfg.grid)?;
    let result = solve_storage_checked(&params, &cfg.grid, &input)?;
    if cfg.formats.grid {
        io::write_signal(&out.join("input.qmg"), &input)?;
        io::write_spinwave(&out.join("beta.qmg"), &result.beta)?;
        io::write_signal(&out.join("transmitted.qmg"), &result.alpha_transmitted)?;
    }
    Ok(json!({
        "mode": "store",
        "preset": preset.name,
        "c_in": cfg.c_in,
        "grid": cfg.grid,
        "eta_storage": result.eta_storage,
        "beta_norm2": result.beta.norm2(),
        "transmitted_norm2": result.alpha_transmitted.norm2(),
        "warnings": result.warnings,
    }))
}

fn run_retrieve(cfg: &RunConfig, preset: &PhysicalPreset, out: &Path) -> Result<Value> {
    let params = build_params(cfg, preset, cfg.c_out)?;
    let beta = if cfg.input.optimal {
        optimal_retrieval_mode(&params, &cfg.grid, cfg.tol, cfg.max_iter)?.mode
    } else {
        let mut flat = SpinWave::zeros(cfg.grid);
        flat.data.fill(Complex64::new(1.0, 0.0));
        flat.normalized()?
    };
    let result = solve_retrieval(&params, &cfg.grid, &beta)?;
    if cfg.formats.grid {
        io::write_spinwave(&out.join("beta_in.qmg"), &beta)?;
        io::write_signal(&out.join("alpha_out.qmg"), &result.alpha_out)?;
    }
    Ok(json!({
        "mode": "retrieve",
        "preset": preset.name,
        "c_out": cfg.c_out,
        "grid": cfg.grid,
        "eta_retrieval": result.eta_retrieval,
        "alpha_out_norm2": result.alpha_out.norm2(),
        "beta_remaining_norm2": result.beta_remaining.norm2(),
        "warnings": result.warnings,
    }))
}

fn run_roundtrip(cfg: &RunConfig, preset: &PhysicalPreset, out: &Path) -> Result<Value> {
    let params_in = build_params(cfg, preset, cfg.c_in)?;
    let params_out = build_params(cfg, preset, cfg.c_out)?;
    let geom = build_geometry(cfg, preset);
    let input = storage_input(cfg, &params_in, &cfg.grid)?;
    let result = total_efficiency(&params_in, &params_out, &geom, &cfg.grid, &input)?;
    if cfg.formats.grid {
        io::write_signal(&out.join("input.qmg"), &input)?;
        io::write_spinwave(&out.join("beta.qmg"), &result.beta_stored)?;
        io::write_signal(&out.join("alpha_out.qmg"), &result.alpha_out)?;
    }
    Ok(json!({
        "mode": "roundtrip",
        "preset": preset.name,
        "geometry": cfg.geometry.as_str(),
        "c_in": cfg.c_in,
        "c_out": cfg.c_out,
        "grid": cfg.grid,
        "nu": result.nu,
        "eta_storage": result.eta_storage,
        "eta_retrieval": result.eta_retrieval,
        "warnings": result.warnings,
    }))
}

fn run_sweep(cli: &Cli, cfg: &RunConfig, preset: &PhysicalPreset, out: &Path) -> Result<Value> {
    let c_ins = cfg.sweep_c_in.values();
    let c_outs = cfg.sweep_c_out.values();
    let geom = build_geometry(cfg, preset);

    // one input per C_in, shared across the row
    let inputs: Vec<Result<(MemoryParams, SignalField)>> = c_ins
        .iter()
        .map(|&c_in| {
            let params_in = build_params(cfg, preset, c_in)?;
            let input = storage_input(cfg, &params_in, &cfg.grid)?;
            Ok((params_in, input))
        })
        .collect();

    let cells_of = || -> Vec<io::SweepCell> {
        let mut jobs = Vec::new();
        for (i, &c_in) in c_ins.iter().enumerate() {
            for &c_out in &c_outs {
                jobs.push((i, c_in, c_out));
            }
        }
        jobs.par_iter()
            .map(|&(i, c_in, c_out)| {
                let run = || -> Result<(f64, f64, f64)> {
                    let (params_in, input) = match &inputs[i] {
                        Ok(pair) => pair,
                        Err(e) => return Err(QmemError::Format(e.to_string())),
                    };
                    let params_out = build_params(cfg, preset, c_out)?;
                    let r = total_efficiency(params_in, &params_out, &geom, &cfg.grid, input)?;
                    Ok((r.nu, r.eta_storage, r.eta_retrieval))
                };
                match run() {
                    Ok((nu, es, er)) => io::SweepCell {
                        c_in,
                        c_out,
                        nu: Some(nu),
                        eta_storage: Some(es),
                        eta_retrieval: Some(er),
                        error: None,
                    },
                    Err(e) => io::SweepCell {
                        c_in,
                        c_out,
                        nu: None,
                        eta_storage: None,
                        eta_retrieval: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    };

    let cells = match cli.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| QmemError::Format(format!("thread pool: {e}")))?
            .install(cells_of),
        None => cells_of(),
    };

    if cfg.formats.csv {
        io::write_sweep_csv(&out.join("sweep.csv"), &cells)?;
    }
    let nu_matrix: Vec<Vec<Option<f64>>> = c_ins
        .iter()
        .enumerate()
        .map(|(i, _)| (0..c_outs.len()).map(|j| cells[i * c_outs.len() + j].nu).collect())
        .collect();
    let n_failed = cells.iter().filter(|c| c.error.is_some()).count();
    Ok(json!({
        "mode": "sweep",
        "preset": preset.name,
        "geometry": cfg.geometry.as_str(),
        "grid": cfg.grid,
        "c_in_values": c_ins,
        "c_out_values": c_outs,
        "nu": nu_matrix,
        "cells_failed": n_failed,
    }))
}

fn run_multimode(cfg: &RunConfig, _preset: &PhysicalPreset, out: &Path) -> Result<Value> {
    if cfg.grid.n_x < 2 {
        return Err(QmemError::ConfigGeneral(
            "multimode runs need a transverse grid (grid.n_x > 1)".into(),
        ));
    }
    let p0 = cfg.multimode_p;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let w = Complex64::new(s, 0.0);
    let mp = MultimodeParams::dimensionless(cfg.multimode_c_m, cfg.q, [w, w], [p0, -p0])?;
    let input =
        make_gaussian_input(cfg.grid, cfg.input.eps_center, cfg.input.eps_width, cfg.input.x_width)?;
    let stored = solve_multimode_storage(&mp, &cfg.grid, &input, &input)?;
    let mixing = mixing_metric(&mp, &cfg.grid, &input)?;

    // simultaneous read-out with one control orientation (+p0); the
    // component stored at -p0 leaves at k_X = -2 p0 and needs retuning
    let mut mp_read = MultimodeParams::dimensionless(cfg.multimode_c_m, cfg.q, [w, w], [p0, p0])?;
    mp_read.modes[1].retune = paraxial_retuning(-p0, p0, cfg.q);
    let retrieved = solve_multimode_retrieval(&mp_read, &cfg.grid, &stored.b, [true, true])?;

    let fft = TransverseFft::new(cfg.grid.n_x);
    let weights = cfg.grid.eps_weights();
    let mut power = vec![0.0; cfg.grid.n_x];
    for field in [&retrieved.a1, &retrieved.a2] {
        let spec = fft.row_spectra(&field.data);
        for (row, wgt) in spec.outer_iter().zip(weights.iter()) {
            for (p, v) in power.iter_mut().zip(row.iter()) {
                *p += wgt * v;
            }
        }
    }
    if cfg.formats.csv {
        io::write_spectrum_csv(&out.join("output_spectrum.csv"), &cfg.grid.kx_nodes(), &power)?;
    }
    if cfg.formats.grid {
        io::write_spinwave(&out.join("beta.qmg"), &stored.b)?;
        io::write_two_component(&out.join("alpha_out.qmg"), &retrieved.a1, &retrieved.a2)?;
    }

    let hw = band_half_width(&mp);
    let total_in = 2.0 * input.norm2();
    Ok(json!({
        "mode": "multimode",
        "c_m": cfg.multimode_c_m,
        "p": p0,
        "grid": cfg.grid,
        "eta_storage": stored.b.norm2() / total_in,
        "mixing_fraction": mixing,
        "stored_band_energy_plus": spinwave_band_energy(&stored.b, p0, hw),
        "stored_band_energy_minus": spinwave_band_energy(&stored.b, -p0, hw),
        "retrieved_norm2": retrieved.a1.norm2() + retrieved.a2.norm2(),
    }))
}

fn run_optimize(cfg: &RunConfig, preset: &PhysicalPreset, out: &Path) -> Result<Value> {
    let params = build_params(cfg, preset, cfg.c_in)?;
    match cfg.optimize {
        OptimizeKind::Storage => {
            let r = optimal_storage_mode(&params, &cfg.grid, cfg.tol, cfg.max_iter)?;
            if cfg.formats.grid {
                io::write_signal(&out.join("mode.qmg"), &r.mode)?;
            }
            Ok(json!({
                "mode": "optimize",
                "kind": "storage",
                "c": cfg.c_in,
                "grid": cfg.grid,
                "sigma": r.diagnostics.sigma,
                "efficiency": r.diagnostics.sigma * r.diagnostics.sigma,
                "diagnostics": r.diagnostics,
            }))
        }
        OptimizeKind::Retrieval => {
            let r = optimal_retrieval_mode(&params, &cfg.grid, cfg.tol, cfg.max_iter)?;
            if cfg.formats.grid {
                io::write_spinwave(&out.join("mode.qmg"), &r.mode)?;
            }
            Ok(json!({
                "mode": "optimize",
                "kind": "retrieval",
                "c": cfg.c_in,
                "grid": cfg.grid,
                "sigma": r.diagnostics.sigma,
                "efficiency": r.diagnostics.sigma * r.diagnostics.sigma,
                "diagnostics": r.diagnostics,
            }))
        }
    }
}

fn run_physical(preset: &PhysicalPreset) -> Result<Value> {
    let input = DesignInput::for_preset(preset);
    let report = design_report(&input, ConstraintMargins::default())?;
    Ok(serde_json::to_value(&report).map_err(|e| QmemError::Format(format!("json: {e}")))?)
}
