//! Field snapshots: CSV, raw little-endian f64 with a JSON sidecar, and
//! 16-bit binary PGM.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AxisBc, Boundary, Field, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Raw,
    Pgm,
}

impl FromStr for ExportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "raw" | "raw-f64" => Ok(Self::Raw),
            "pgm" => Ok(Self::Pgm),
            _ => Err(Error::Config(format!("unknown export format {s:?} (csv, raw, pgm)"))),
        }
    }
}

impl ExportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Raw => "f64",
            Self::Pgm => "pgm",
        }
    }
}

/// JSON sidecar of a raw export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawSidecar {
    pub dims: Vec<usize>,
    pub n_per_axis: Vec<usize>,
    pub h: Vec<f64>,
    pub bc: Vec<String>,
    /// Interleaved `re, im` pairs when set, real parts only otherwise.
    pub complex: bool,
    pub min: f64,
    pub max: f64,
    #[serde(default)]
    pub meta: serde_json::Value,
}

pub fn sidecar_path(raw: &Path) -> PathBuf {
    let mut s = raw.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn is_real(field: &Field) -> bool {
    field.values().iter().all(|v| v.im == 0.0)
}

/// Write `field` to `path`. CSV holds real parts, one row per grid line
/// along the last axis. Returns every file written.
pub fn export_field(field: &Field, path: &Path, format: ExportFormat) -> Result<Vec<PathBuf>> {
    export_field_with_meta(field, path, format, serde_json::Value::Null)
}

/// As [`export_field`], with extra metadata stored in the raw sidecar.
pub fn export_field_with_meta(
    field: &Field,
    path: &Path,
    format: ExportFormat,
    meta: serde_json::Value,
) -> Result<Vec<PathBuf>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    match format {
        ExportFormat::Csv => {
            fs::write(path, to_csv(field)).map_err(|e| Error::io(path, e))?;
            Ok(vec![path.to_path_buf()])
        }
        ExportFormat::Raw => {
            let complex = !is_real(field);
            let mut bytes = Vec::with_capacity(field.len() * if complex { 16 } else { 8 });
            for v in field.values() {
                bytes.extend_from_slice(&v.re.to_le_bytes());
                if complex {
                    bytes.extend_from_slice(&v.im.to_le_bytes());
                }
            }
            fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
            let (min, max) = value_range(field, complex);
            let grid = field.grid();
            let sidecar = RawSidecar {
                dims: grid.shape(),
                n_per_axis: grid.n_per_axis().to_vec(),
                h: grid.h_per_axis().to_vec(),
                bc: grid.bc_per_axis().iter().map(|b| b.tag().to_string()).collect(),
                complex,
                min,
                max,
                meta,
            };
            let side = sidecar_path(path);
            let json = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::io(&side, e))?;
            fs::write(&side, json).map_err(|e| Error::io(&side, e))?;
            Ok(vec![path.to_path_buf(), side])
        }
        ExportFormat::Pgm => {
            fs::write(path, to_pgm(field)?).map_err(|e| Error::io(path, e))?;
            Ok(vec![path.to_path_buf()])
        }
    }
}

fn value_range(field: &Field, complex: bool) -> (f64, f64) {
    let vals = field.values().iter().map(|v| if complex { v.norm() } else { v.re });
    vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

pub fn to_csv(field: &Field) -> String {
    let shape = field.grid().shape();
    let width = *shape.last().unwrap_or(&1);
    let mut out = String::new();
    for row in field.values().chunks(width) {
        let cells: Vec<String> = row.iter().map(|v| format!("{}", v.re)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Magnitudes mapped linearly onto `0..=65535`. Rows follow axis 0.
pub fn to_pgm(field: &Field) -> Result<Vec<u8>> {
    let shape = field.grid().shape();
    let (height, width) = match shape.as_slice() {
        [w] => (1, *w),
        [h, w] => (*h, *w),
        _ => return Err(Error::InvalidArgument("PGM export needs a 1D or 2D field".into())),
    };
    let mags: Vec<f64> = field.values().iter().map(|v| v.norm()).collect();
    let lo = mags.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = mags.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    for m in mags {
        let level = if span > 0.0 {
            ((m - lo) / span * 65535.0).round() as u16
        } else {
            0
        };
        out.write_all(&level.to_be_bytes()).expect("writing to a Vec");
    }
    Ok(out)
}

fn parse_bc(tag: &str) -> Result<AxisBc> {
    let end = |c: char| match c {
        'D' => Ok(Boundary::Dirichlet),
        'N' => Ok(Boundary::Neumann),
        _ => Err(Error::InvalidArgument(format!("bad boundary tag {tag:?}"))),
    };
    let mut chars = tag.chars();
    match (chars.next(), chars.next(), chars.next()) {
        (Some(a), Some(b), None) => Ok(AxisBc::new(end(a)?, end(b)?)),
        _ => Err(Error::InvalidArgument(format!("bad boundary tag {tag:?}"))),
    }
}

/// Read back a raw export through its sidecar.
pub fn import_raw(path: &Path) -> Result<Field> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: RawSidecar = serde_json::from_str(&text).map_err(|e| Error::io(&side, e))?;
    let bc = meta.bc.iter().map(|t| parse_bc(t)).collect::<Result<Vec<_>>>()?;
    let grid = Grid::with_spacing(&meta.n_per_axis, &meta.h, &bc)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let width = if meta.complex { 16 } else { 8 };
    if bytes.len() != grid.len() * width {
        return Err(Error::io(
            path,
            format!("expected {} bytes, found {}", grid.len() * width, bytes.len()),
        ));
    }
    let word = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().expect("8-byte slice"));
    let values = (0..grid.len())
        .map(|p| {
            if meta.complex {
                Complex64::new(word(16 * p), word(16 * p + 8))
            } else {
                Complex64::new(word(8 * p), 0.0)
            }
        })
        .collect();
    Field::new(grid, values)
}
