//! Key-value run configuration: a small line-oriented `key = value` format
//! with `#` comments, dotted key paths and line-anchored error messages.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{QmemError, Result};
use crate::grid::GridSpec;

/// Parse `key = value` lines into a map of key -> (line number, value).
/// Blank lines and `#` comments are skipped; text after ` #` on a value is
/// treated as a trailing comment. Duplicate keys are an error in strict
/// mode; otherwise the last occurrence wins.
pub fn parse_kv(text: &str, strict: bool) -> Result<BTreeMap<String, (usize, String)>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(QmemError::Config {
                line: line_no,
                msg: format!("expected 'key = value', got '{line}'"),
            });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(QmemError::Config { line: line_no, msg: "empty key".into() });
        }
        let mut value = value.trim();
        if let Some(pos) = value.find(" #") {
            value = value[..pos].trim_end();
        }
        if strict {
            if let Some((first_line, _)) = map.get(key) {
                return Err(QmemError::Config {
                    line: line_no,
                    msg: format!("duplicate key '{key}' (first set at line {first_line})"),
                });
            }
        }
        map.insert(key.to_string(), (line_no, value.to_string()));
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Store,
    Retrieve,
    Roundtrip,
    Sweep,
    Multimode,
    Physical,
    Optimize,
}

impl RunMode {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "store" => Self::Store,
            "retrieve" => Self::Retrieve,
            "roundtrip" => Self::Roundtrip,
            "sweep" => Self::Sweep,
            "multimode" => Self::Multimode,
            "physical" => Self::Physical,
            "optimize" => Self::Optimize,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Store => "store",
            Self::Retrieve => "retrieve",
            Self::Roundtrip => "roundtrip",
            Self::Sweep => "sweep",
            Self::Multimode => "multimode",
            Self::Physical => "physical",
            Self::Optimize => "optimize",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryKind {
    Phasematched,
    ColinearBackward,
    ColinearForward,
}

impl GeometryKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "phasematched" => Self::Phasematched,
            "colinear-backward" => Self::ColinearBackward,
            "colinear-forward" => Self::ColinearForward,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Phasematched => "phasematched",
            Self::ColinearBackward => "colinear-backward",
            Self::ColinearForward => "colinear-forward",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizeKind {
    Storage,
    Retrieval,
}

impl OptimizeKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "storage" => Self::Storage,
            "retrieval" => Self::Retrieval,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Storage => "storage",
            Self::Retrieval => "retrieval",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepRange {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let d = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.min + i as f64 * d).collect()
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.steps < 1 {
            return Err(QmemError::ConfigGeneral(format!("{what}: steps must be >= 1")));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(QmemError::ConfigGeneral(format!(
                "{what}: need finite min <= max, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    /// Use the numerically optimal input mode instead of a Gaussian.
    pub optimal: bool,
    pub eps_center: f64,
    pub eps_width: f64,
    pub x_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFormats {
    pub json: bool,
    pub csv: bool,
    pub grid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: RunMode,
    /// Built-in preset name; ignored when `preset_file` is set.
    pub preset: String,
    pub preset_file: Option<String>,
    pub grid: GridSpec,
    pub c_in: f64,
    pub c_out: f64,
    pub q: f64,
    pub p: f64,
    pub geometry: GeometryKind,
    pub input: InputSpec,
    pub sweep_c_in: SweepRange,
    pub sweep_c_out: SweepRange,
    /// Two-component run: shared coupling and band momentum (modes at +/- p).
    pub multimode_c_m: f64,
    pub multimode_p: f64,
    pub optimize: OptimizeKind,
    pub tol: f64,
    pub max_iter: usize,
    pub formats: OutputFormats,
    pub out_dir: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: RunMode::Roundtrip,
            preset: "cs-d2".into(),
            preset_file: None,
            grid: GridSpec { n_eps: 256, n_zeta: 256, n_x: 128, x_half_width: 3.0 },
            c_in: 2.0,
            c_out: 2.0,
            q: 1.0,
            p: 0.0,
            geometry: GeometryKind::Phasematched,
            input: InputSpec { optimal: true, eps_center: 0.5, eps_width: 0.12, x_width: 0.5 },
            sweep_c_in: SweepRange { min: 0.5, max: 3.0, steps: 8 },
            sweep_c_out: SweepRange { min: 0.5, max: 3.0, steps: 8 },
            multimode_c_m: 2.0,
            multimode_p: 28.0,
            optimize: OptimizeKind::Storage,
            tol: 1e-8,
            max_iter: 500,
            formats: OutputFormats { json: true, csv: false, grid: false },
            out_dir: None,
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "mode",
    "preset",
    "preset_file",
    "grid.n_eps",
    "grid.n_zeta",
    "grid.n_x",
    "grid.x_half_width",
    "params.c_in",
    "params.c_out",
    "params.q",
    "params.p",
    "geometry",
    "input.optimal",
    "input.eps_center",
    "input.eps_width",
    "input.x_width",
    "sweep.c_in_min",
    "sweep.c_in_max",
    "sweep.c_in_steps",
    "sweep.c_out_min",
    "sweep.c_out_max",
    "sweep.c_out_steps",
    "multimode.c_m",
    "multimode.p",
    "optimize.kind",
    "optimize.tol",
    "optimize.max_iter",
    "output.formats",
    "output.dir",
];

#[derive(Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    /// Lax-mode notes about ignored keys.
    pub warnings: Vec<String>,
}

pub fn load_config(path: &Path, strict: bool) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)?;
    config_from_text(&text, strict)
}

pub fn config_from_text(text: &str, strict: bool) -> Result<LoadedConfig> {
    let kv = parse_kv(text, strict)?;
    let mut warnings = Vec::new();
    for (key, (line, _)) in &kv {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            if strict {
                return Err(QmemError::Config {
                    line: *line,
                    msg: format!("unknown key '{key}'"),
                });
            }
            warnings.push(format!("line {line}: ignoring unknown key '{key}'"));
        }
    }

    let mut cfg = RunConfig::default();
    let get_f64 = |key: &str, default: f64| -> Result<f64> {
        match kv.get(key) {
            None => Ok(default),
            Some((line, raw)) => raw.parse::<f64>().map_err(|_| QmemError::Config {
                line: *line,
                msg: format!("key '{key}': expected a number, got '{raw}'"),
            }),
        }
    };
    let get_usize = |key: &str, default: usize| -> Result<usize> {
        match kv.get(key) {
            None => Ok(default),
            Some((line, raw)) => raw.parse::<usize>().map_err(|_| QmemError::Config {
                line: *line,
                msg: format!("key '{key}': expected a nonnegative integer, got '{raw}'"),
            }),
        }
    };
    let get_bool = |key: &str, default: bool| -> Result<bool> {
        match kv.get(key) {
            None => Ok(default),
            Some((line, raw)) => match raw.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(QmemError::Config {
                    line: *line,
                    msg: format!("key '{key}': expected true/false, got '{raw}'"),
                }),
            },
        }
    };

    if let Some((line, raw)) = kv.get("mode") {
        cfg.mode = RunMode::parse(raw).ok_or_else(|| QmemError::Config {
            line: *line,
            msg: format!("unknown mode '{raw}'"),
        })?;
    }
    if let Some((_, raw)) = kv.get("preset") {
        cfg.preset = raw.clone();
    }
    if let Some((_, raw)) = kv.get("preset_file") {
        cfg.preset_file = Some(raw.clone());
    }
    cfg.grid = GridSpec::new(
        get_usize("grid.n_eps", cfg.grid.n_eps)?,
        get_usize("grid.n_zeta", cfg.grid.n_zeta)?,
        get_usize("grid.n_x", cfg.grid.n_x)?,
        get_f64("grid.x_half_width", cfg.grid.x_half_width)?,
    )?;
    cfg.c_in = get_f64("params.c_in", cfg.c_in)?;
    cfg.c_out = get_f64("params.c_out", cfg.c_out)?;
    cfg.q = get_f64("params.q", cfg.q)?;
    cfg.p = get_f64("params.p", cfg.p)?;
    if let Some((line, raw)) = kv.get("geometry") {
        cfg.geometry = GeometryKind::parse(raw).ok_or_else(|| QmemError::Config {
            line: *line,
            msg: format!("unknown geometry '{raw}' (phasematched, colinear-backward, colinear-forward)"),
        })?;
    }
    cfg.input = InputSpec {
        optimal: get_bool("input.optimal", cfg.input.optimal)?,
        eps_center: get_f64("input.eps_center", cfg.input.eps_center)?,
        eps_width: get_f64("input.eps_width", cfg.input.eps_width)?,
        x_width: get_f64("input.x_width", cfg.input.x_width)?,
    };
    cfg.sweep_c_in = SweepRange {
        min: get_f64("sweep.c_in_min", cfg.sweep_c_in.min)?,
        max: get_f64("sweep.c_in_max", cfg.sweep_c_in.max)?,
        steps: get_usize("sweep.c_in_steps", cfg.sweep_c_in.steps)?,
    };
    cfg.sweep_c_out = SweepRange {
        min: get_f64("sweep.c_out_min", cfg.sweep_c_out.min)?,
        max: get_f64("sweep.c_out_max", cfg.sweep_c_out.max)?,
        steps: get_usize("sweep.c_out_steps", cfg.sweep_c_out.steps)?,
    };
    cfg.multimode_c_m = get_f64("multimode.c_m", cfg.multimode_c_m)?;
    cfg.multimode_p = get_f64("multimode.p", cfg.multimode_p)?;
    if let Some((line, raw)) = kv.get("optimize.kind") {
        cfg.optimize = OptimizeKind::parse(raw).ok_or_else(|| QmemError::Config {
            line: *line,
            msg: format!("unknown optimize kind '{raw}' (storage, retrieval)"),
        })?;
    }
    cfg.tol = get_f64("optimize.tol", cfg.tol)?;
    cfg.max_iter = get_usize("optimize.max_iter", cfg.max_iter)?;
    if let Some((line, raw)) = kv.get("output.formats") {
        let mut formats = OutputFormats { json: false, csv: false, grid: false };
        for part in raw.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "json" => formats.json = true,
                "csv" => formats.csv = true,
                "grid" => formats.grid = true,
                other => {
                    return Err(QmemError::Config {
                        line: *line,
                        msg: format!("unknown output format '{other}' (json, csv, grid)"),
                    })
                }
            }
        }
        cfg.formats = formats;
    }
    if let Some((_, raw)) = kv.get("output.dir") {
        cfg.out_dir = Some(raw.clone());
    }

    cfg.validate()?;
    Ok(LoadedConfig { config: cfg, warnings })
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.sweep_c_in.validate("sweep.c_in")?;
        self.sweep_c_out.validate("sweep.c_out")?;
        if !(self.c_in >= 0.0) || !(self.c_out >= 0.0) {
            return Err(QmemError::ConfigGeneral("couplings must be nonnegative".into()));
        }
        if !(self.q > 0.0) {
            return Err(QmemError::ConfigGeneral(format!("q must be positive, got {}", self.q)));
        }
        if !(self.tol > 0.0) {
            return Err(QmemError::ConfigGeneral("optimize.tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(QmemError::ConfigGeneral("optimize.max_iter must be >= 1".into()));
        }
        if !(self.formats.json || self.formats.csv || self.formats.grid) {
            return Err(QmemError::ConfigGeneral("at least one output format is required".into()));
        }
        Ok(())
    }

    /// Serialize back into the key-value text format; `config_from_text` on
    /// the result reproduces this config exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("mode", self.mode.as_str().into());
        push("preset", self.preset.clone());
        if let Some(f) = &self.preset_file {
            push("preset_file", f.clone());
        }
        push("grid.n_eps", self.grid.n_eps.to_string());
        push("grid.n_zeta", self.grid.n_zeta.to_string());
        push("grid.n_x", self.grid.n_x.to_string());
        push("grid.x_half_width", format!("{:?}", self.grid.x_half_width));
        push("params.c_in", format!("{:?}", self.c_in));
        push("params.c_out", format!("{:?}", self.c_out));
        push("params.q", format!("{:?}", self.q));
        push("params.p", format!("{:?}", self.p));
        push("geometry", self.geometry.as_str().into());
        push("input.optimal", self.input.optimal.to_string());
        push("input.eps_center", format!("{:?}", self.input.eps_center));
        push("input.eps_width", format!("{:?}", self.input.eps_width));
        push("input.x_width", format!("{:?}", self.input.x_width));
        push("sweep.c_in_min", format!("{:?}", self.sweep_c_in.min));
        push("sweep.c_in_max", format!("{:?}", self.sweep_c_in.max));
        push("sweep.c_in_steps", self.sweep_c_in.steps.to_string());
        push("sweep.c_out_min", format!("{:?}", self.sweep_c_out.min));
        push("sweep.c_out_max", format!("{:?}", self.sweep_c_out.max));
        push("sweep.c_out_steps", self.sweep_c_out.steps.to_string());
        push("multimode.c_m", format!("{:?}", self.multimode_c_m));
        push("multimode.p", format!("{:?}", self.multimode_p));
        push("optimize.kind", self.optimize.as_str().into());
        push("optimize.tol", format!("{:?}", self.tol));
        push("optimize.max_iter", self.max_iter.to_string());
        let mut formats = Vec::new();
        if self.formats.json {
            formats.push("json");
        }
        if self.formats.csv {
            formats.push("csv");
        }
        if self.formats.grid {
            formats.push("grid");
        }
        push("output.formats", formats.join(","));
        if let Some(dir) = &self.out_dir {
            push("output.dir", dir.clone());
        }
        out
    }
}
