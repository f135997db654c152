//! Experiment drivers behind the command-line tool.

pub mod config;
pub mod export;
pub mod precond;
pub mod stekloff;
pub mod velocity;
pub mod verify;

pub use config::{Experiment, Overrides, RunConfig};
pub use velocity::VelocityField;

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Serialize `rows` as CSV with a header line.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
