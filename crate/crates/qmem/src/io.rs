//! Result serialization: QMEMGRID binary field snapshots, CSV tables and
//! JSON summaries.
//!
//! QMEMGRID layout: 8-byte magic `QMEMGRID`, three little-endian u32 dims
//! (unused trailing dims set to 1), then row-major interleaved little-endian
//! f64 pairs (re, im) with the last index fastest.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{QmemError, Result};
use crate::field::{SignalField, SpinWave};

const MAGIC: &[u8; 8] = b"QMEMGRID";

pub fn write_grid(path: &Path, dims: [u32; 3], data: &[Complex64]) -> Result<()> {
    let expected = dims.iter().map(|&d| d as usize).product::<usize>();
    if data.len() != expected {
        return Err(QmemError::Shape(format!(
            "grid data has {} values but dims {:?} require {}",
            data.len(),
            dims,
            expected
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    for d in dims {
        w.write_all(&d.to_le_bytes())?;
    }
    for v in data {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_grid(path: &Path) -> Result<([u32; 3], Vec<Complex64>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(QmemError::Format(format!(
            "{}: not a QMEMGRID file (bad magic)",
            path.display()
        )));
    }
    let mut dims = [0u32; 3];
    for d in dims.iter_mut() {
        let mut buf = [0u8; 4];
        r.read_exact(&mut buf)?;
        *d = u32::from_le_bytes(buf);
    }
    let count = dims.iter().map(|&d| d as usize).product::<usize>();
    let mut data = Vec::with_capacity(count);
    let mut buf = [0u8; 16];
    for _ in 0..count {
        r.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
        let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
        data.push(Complex64::new(re, im));
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(QmemError::Format(format!(
            "{}: trailing bytes after {} values",
            path.display(),
            count
        )));
    }
    Ok((dims, data))
}

pub fn write_signal(path: &Path, field: &SignalField) -> Result<()> {
    let dims = [field.grid.n_eps as u32, field.grid.n_x as u32, 1];
    write_grid(path, dims, field.data.as_slice().unwrap())
}

pub fn write_spinwave(path: &Path, wave: &SpinWave) -> Result<()> {
    let dims = [wave.grid.n_zeta as u32, wave.grid.n_x as u32, 1];
    write_grid(path, dims, wave.data.as_slice().unwrap())
}

/// Two optical components interleaved in the third dim slot.
pub fn write_two_component(path: &Path, a1: &SignalField, a2: &SignalField) -> Result<()> {
    if a1.grid != a2.grid {
        return Err(QmemError::Shape("two-component fields must share a grid".into()));
    }
    let dims = [a1.grid.n_eps as u32, a1.grid.n_x as u32, 2];
    let mut data = Vec::with_capacity(2 * a1.data.len());
    for (v1, v2) in a1.data.iter().zip(a2.data.iter()) {
        data.push(*v1);
        data.push(*v2);
    }
    write_grid(path, dims, &data)
}

/// k_X power spectrum rows as CSV `k_x,power`, sorted by wavenumber.
pub fn write_spectrum_csv(path: &Path, ks: &[f64], power: &[f64]) -> Result<()> {
    if ks.len() != power.len() {
        return Err(QmemError::Shape("spectrum axes must have equal length".into()));
    }
    let mut order: Vec<usize> = (0..ks.len()).collect();
    order.sort_by(|&a, &b| ks[a].total_cmp(&ks[b]));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["k_x", "power"]).map_err(csv_err)?;
    for i in order {
        w.write_record([format!("{:?}", ks[i]), format!("{:?}", power[i])]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub c_in: f64,
    pub c_out: f64,
    pub nu: Option<f64>,
    pub eta_storage: Option<f64>,
    pub eta_retrieval: Option<f64>,
    pub error: Option<String>,
}

pub fn write_sweep_csv(path: &Path, cells: &[SweepCell]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["c_in", "c_out", "nu", "eta_storage", "eta_retrieval", "status"])
        .map_err(csv_err)?;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
    for cell in cells {
        w.write_record([
            format!("{:?}", cell.c_in),
            format!("{:?}", cell.c_out),
            fmt(cell.nu),
            fmt(cell.eta_storage),
            fmt(cell.eta_retrieval),
            cell.error.clone().unwrap_or_else(|| "ok".into()),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> QmemError {
    QmemError::Format(format!("csv: {e}"))
}

/// Deterministic pretty JSON (runtime metadata belongs in `write_meta`).
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| QmemError::Format(format!("json: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub unix_time_s: u64,
    pub wall_ms: u128,
}

pub fn write_meta(path: &Path, wall: std::time::Duration) -> Result<()> {
    let meta = RunMeta {
        unix_time_s: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        wall_ms: wall.as_millis(),
    };
    write_json(path, &meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_gaussian_input;
    use crate::grid::GridSpec;

    #[test]
    fn grid_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.qmg");
        let grid = GridSpec::new(9, 5, 4, 2.0).unwrap();
        let field = make_gaussian_input(grid, 0.5, 0.3, 2.5).unwrap();
        write_signal(&path, &field).unwrap();
        let (dims, data) = read_grid(&path).unwrap();
        assert_eq!(dims, [9, 4, 1]);
        assert_eq!(data.len(), 36);
        for (a, b) in data.iter().zip(field.data.iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.qmg");
        std::fs::write(&path, b"NOTAGRID\x01\x00\x00\x00").unwrap();
        let err = read_grid(&path).unwrap_err();
        assert!(matches!(err, QmemError::Format(_)));
    }

    #[test]
    fn two_component_interleaves_components() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("two.qmg");
        let grid = GridSpec::new(6, 4, 3, 1.5).unwrap();
        let a1 = make_gaussian_input(grid, 0.4, 0.45, 2.2).unwrap();
        let a2 = a1.scaled(Complex64::new(0.0, 2.0));
        write_two_component(&path, &a1, &a2).unwrap();
        let (dims, data) = read_grid(&path).unwrap();
        assert_eq!(dims, [6, 3, 2]);
        assert_eq!(data[0], a1.data[[0, 0]]);
        assert_eq!(data[1], a2.data[[0, 0]]);
        assert_eq!(data[2], a1.data[[0, 1]]);
    }

    #[test]
    fn sweep_csv_has_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let cells = vec![
            SweepCell {
                c_in: 0.5,
                c_out: 1.0,
                nu: Some(0.25),
                eta_storage: Some(0.5),
                eta_retrieval: Some(0.5),
                error: None,
            },
            SweepCell {
                c_in: 1.0,
                c_out: 1.0,
                nu: None,
                eta_storage: None,
                eta_retrieval: None,
                error: Some("boom".into()),
            },
        ];
        write_sweep_csv(&path, &cells).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "c_in,c_out,nu,eta_storage,eta_retrieval,status");
        assert!(lines[1].ends_with("ok"));
        assert!(lines[2].ends_with("boom"));
    }

    #[test]
    fn spectrum_csv_is_sorted_by_wavenumber() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spec.csv");
        let ks = [0.0, 1.0, -1.0];
        let power = [3.0, 2.0, 1.0];
        write_spectrum_csv(&path, &ks, &power).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k_x,power");
        assert!(lines[1].starts_with("-1"));
        assert!(lines[3].starts_with('1'));
    }

    #[test]
    fn json_writes_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.json");
        let p2 = dir.path().join("b.json");
        #[derive(Serialize)]
        struct S {
            x: f64,
            name: String,
        }
        let v = S { x: 0.1 + 0.2, name: "cell".into() };
        write_json(&p1, &v).unwrap();
        write_json(&p2, &v).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }
}
