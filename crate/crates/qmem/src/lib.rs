//! Simulation library for an ensemble quantum memory in dimensionless
//! Maxwell-Bloch form: single-mode storage and retrieval with angled
//! control fields and backward read-out, optimal-mode analysis by power
//! iteration, a two-component multimode extension, and closed-form design
//! formulas (phasematching angle, motional fidelity, density scaling,
//! mode count, validity constraints).

pub mod cli;
pub mod config;
pub mod design;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod modes;
pub mod multimode;
pub mod params;
pub mod presets;
pub mod solver;

pub use error::{QmemError, Result};
pub use field::{make_gaussian_input, signal_inner, spinwave_inner, SignalField, SpinWave};
pub use grid::GridSpec;
pub use params::MemoryParams;
pub use presets::PhysicalPreset;
