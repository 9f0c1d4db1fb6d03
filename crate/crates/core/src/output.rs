//! CSV tables and run manifests.
//!
//! Floats are written in Rust's shortest round-trip form (`{:?}`), so a
//! value read back from a CSV is bit-identical to the one written and
//! identical runs produce identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::SimConfig;
use crate::error::{Error, Result};

/// Round-trip decimal form of `x`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Empty for `None`.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Writes a header and rows of pre-formatted cells.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>())?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub const MANIFEST_VERSION: u32 = 1;

/// Everything needed to reproduce a run: the resolved configuration with
/// all defaults filled in, the code version and the constants in force.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub manifest_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub parallel: bool,
    pub command: &'a str,
    pub status: &'a str,
    pub seed: u64,
    pub config: &'a SimConfig,
    pub calibrated: Calibrated,
    pub outputs: Vec<String>,
    pub summary: Value,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Calibrated {
    pub c0: f64,
    /// Empirical radius-decay constant, when the run measured one.
    pub c_emp: Option<f64>,
}

impl<'a> Manifest<'a> {
    pub fn new(command: &'a str, config: &'a SimConfig) -> Self {
        Self {
            manifest_version: MANIFEST_VERSION,
            tool: "kp5",
            version: env!("CARGO_PKG_VERSION"),
            parallel: crate::par::is_parallel(),
            command,
            status: "ok",
            seed: config.seed,
            config,
            calibrated: Calibrated {
                c0: config.delta.c0,
                c_emp: None,
            },
            outputs: Vec::new(),
            summary: Value::Null,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}
