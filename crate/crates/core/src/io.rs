//! CSV and JSON file formats.
//!
//! Grids and masks are stored as `ly` rows of `lx` comma-separated values,
//! row `y` holding sites `(0..lx, y)`. Floats are written with the shortest
//! representation that round-trips exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GprError, Result};
use crate::grid::{GridDims, GridField, ObservationMask};
use crate::synthdata::WmSpec;

fn parse_error(path: &Path, row: usize, column: usize, reason: impl Into<String>) -> GprError {
    GprError::Parse {
        file: path.display().to_string(),
        row,
        column,
        reason: reason.into(),
    }
}

/// Reads a rectangular table of cells; row and column numbers in errors are
/// 1-based.
fn read_table<T>(path: &Path, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Result<(GridDims, Vec<T>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_error(path, 0, 0, e.to_string()))?;
    let mut values = Vec::new();
    let mut lx = None;
    let mut ly = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_error(path, r + 1, 0, e.to_string()))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match lx {
            None => lx = Some(record.len()),
            Some(n) if n != record.len() => {
                return Err(parse_error(
                    path,
                    r + 1,
                    record.len().min(n) + 1,
                    format!("expected {n} columns, found {}", record.len()),
                ))
            }
            _ => {}
        }
        for (c, cell) in record.iter().enumerate() {
            values.push(parse(cell).map_err(|reason| parse_error(path, r + 1, c + 1, reason))?);
        }
        ly += 1;
    }
    let lx = lx.ok_or_else(|| parse_error(path, 1, 1, "empty file"))?;
    let dims = GridDims::new(lx, ly)?;
    Ok((dims, values))
}

pub fn read_grid(path: &Path) -> Result<GridField> {
    let (dims, values) = read_table(path, |s| {
        let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("`{s}` is not finite"))
        }
    })?;
    GridField::new(dims, values)
}

/// Like [`read_grid`], but empty cells and `NaN` are accepted as gaps.
pub fn read_sample(path: &Path) -> Result<GridField> {
    let (dims, values) = read_table(path, |s| {
        if s.is_empty() || s.eq_ignore_ascii_case("nan") {
            return Ok(f64::NAN);
        }
        let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("`{s}` is not finite"))
        }
    })?;
    GridField::new(dims, values)
}

pub fn read_mask(path: &Path) -> Result<ObservationMask> {
    let (dims, values) = read_table(path, |s| match s {
        "1" => Ok(true),
        "0" => Ok(false),
        _ => Err(format!("`{s}` is not 0 or 1")),
    })?;
    ObservationMask::new(dims, values)
}

fn write_rows(path: &Path, dims: GridDims, cell: impl Fn(usize) -> String) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for y in 0..dims.ly {
        let row: Vec<String> = (0..dims.lx).map(|x| cell(dims.index(x, y))).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_grid(path: &Path, field: &GridField) -> Result<()> {
    write_rows(path, field.dims, |i| field.values[i].to_string())
}

pub fn write_mask(path: &Path, mask: &ObservationMask) -> Result<()> {
    write_rows(path, mask.dims, |i| if mask.observed[i] { "1" } else { "0" }.to_string())
}

/// Bias angles on the full grid.
pub fn write_bias(path: &Path, dims: GridDims, h: &[f64]) -> Result<()> {
    if h.len() != dims.len() {
        return Err(GprError::Length {
            expected: dims.len(),
            actual: h.len(),
        });
    }
    write_rows(path, dims, |i| h[i].to_string())
}

pub fn write_energy_trace(path: &Path, trace: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
    w.write_record(["sweep", "specific_energy"]).map_err(csv_io)?;
    for (k, e) in trace.iter().enumerate() {
        w.write_record([(k + 1).to_string(), e.to_string()]).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per prediction site.
pub fn write_predictions(path: &Path, dims: GridDims, sites: &[usize], values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
    w.write_record(["x", "y", "prediction"]).map_err(csv_io)?;
    for (&s, v) in sites.iter().zip(values) {
        let (x, y) = dims.coords(s);
        w.write_record([x.to_string(), y.to_string(), v.to_string()]).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_io(e: csv::Error) -> GprError {
    GprError::Io(std::io::Error::other(e))
}

/// Provenance written next to a generated field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldProvenance {
    pub dims: GridDims,
    pub spec: WmSpec,
    pub n_modes: usize,
    pub seed: u64,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Reads JSON; syntax and schema errors report the line and column.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| parse_error(path, e.line(), e.column(), e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let dims = GridDims::new(3, 2).unwrap();
        let f = GridField::new(dims, vec![0.1, 1.0 / 3.0, -2.5e-17, 1e300, 7.0, std::f64::consts::PI]).unwrap();
        let p = dir.path().join("g.csv");
        write_grid(&p, &f).unwrap();
        assert_eq!(read_grid(&p).unwrap(), f);
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn mask_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let dims = GridDims::new(2, 3).unwrap();
        let m = ObservationMask::new(dims, vec![true, false, true, true, false, true]).unwrap();
        let p = dir.path().join("m.csv");
        write_mask(&p, &m).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "1,0\n1,1\n0,1\n");
        assert_eq!(read_mask(&p).unwrap(), m);
    }

    #[test]
    fn parse_errors_name_position() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "1,2,3\n4,x,6\n").unwrap();
        match read_grid(&p) {
            Err(GprError::Parse { file, row, column, .. }) => {
                assert!(file.ends_with("bad.csv"));
                assert_eq!((row, column), (2, 2));
            }
            other => panic!("{other:?}"),
        }
        std::fs::write(&p, "1,0\n1,2\n").unwrap();
        assert!(matches!(read_mask(&p), Err(GprError::Parse { row: 2, column: 2, .. })));
        std::fs::write(&p, "1,,NaN\n4,5,6\n").unwrap();
        let g = read_sample(&p).unwrap();
        assert!(g.values[1].is_nan() && g.values[2].is_nan() && g.values[3] == 4.0);
        assert!(read_grid(&p).is_err());
        std::fs::write(&p, "1,0\n1\n").unwrap();
        assert!(matches!(read_mask(&p), Err(GprError::Parse { row: 2, .. })));
    }

    #[test]
    fn prediction_and_trace_files() {
        let dir = tempfile::tempdir().unwrap();
        let dims = GridDims::new(4, 4).unwrap();
        let p = dir.path().join("p.csv");
        write_predictions(&p, dims, &[5], &[1.5]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "x,y,prediction\n1,1,1.5\n");
        write_predictions(&p, dims, &[], &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "x,y,prediction\n");
        let t = dir.path().join("t.csv");
        write_energy_trace(&t, &[-1.0, -1.5]).unwrap();
        assert_eq!(std::fs::read_to_string(&t).unwrap(), "sweep,specific_energy\n1,-1\n2,-1.5\n");
    }
}
