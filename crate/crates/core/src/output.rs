//! CSV and JSON emission with reproducibility metadata.
//!
//! Every file starts with the run manifest: as `#` comment lines in CSV, as a
//! `manifest` member in JSON. Floats are written with 17 significant digits
//! so every value reads back bit for bit. Wall-clock time is deliberately not
//! part of the manifest, which keeps repeated runs byte-identical.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kernel::cache_key;
use crate::simulator::{SimulationConfig, TimeSeries};

pub const TOOL: &str = "bosecond";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub threads: usize,
    pub config: Option<SimulationConfig>,
    pub config_hash: Option<String>,
    pub grid_hash: Option<String>,
    pub kernel_cache_key: Option<String>,
    pub steps: Option<usize>,
    pub records: Option<usize>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, seed: Option<u64>, threads: usize) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            seed,
            threads,
            config: None,
            config_hash: None,
            grid_hash: None,
            kernel_cache_key: None,
            steps: None,
            records: None,
        }
    }

    /// Attaches a configuration with its hash, grid hash and table key.
    pub fn with_config(mut self, config: &SimulationConfig) -> Result<Self> {
        let grid = config.grid.build()?;
        self.config_hash = Some(config_hash(config)?);
        self.grid_hash = Some(grid.hash());
        self.kernel_cache_key = Some(cache_key(&config.kernel, &grid, config.quad));
        self.config = Some(config.clone());
        Ok(self)
    }

    pub fn with_series(mut self, series: &TimeSeries) -> Self {
        self.steps = Some(series.summary.steps);
        self.records = Some(series.rows.len());
        self
    }
}

/// First 16 hex digits of the SHA-256 of the configuration's JSON.
pub fn config_hash(config: &SimulationConfig) -> Result<String> {
    let bytes = serde_json::to_vec(config)?;
    let d = Sha256::digest(&bytes);
    Ok(d.iter().take(8).map(|b| format!("{b:02x}")).collect())
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes columns and rows as CSV behind `#` manifest lines.
pub fn write_csv(path: &Path, manifest: &RunManifest, columns: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_csv_to(&mut f, manifest, columns, rows)?;
    f.flush()?;
    Ok(())
}

pub fn write_csv_to(out: &mut impl Write, manifest: &RunManifest, columns: &[String], rows: &[Vec<f64>]) -> Result<()> {
    writeln!(out, "# {} {}", manifest.tool, manifest.version)?;
    writeln!(out, "# manifest: {}", serde_json::to_string(manifest)?)?;
    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record(columns)?;
    for r in rows {
        if r.len() != columns.len() {
            return Err(Error::Range(format!("row has {} fields for {} columns", r.len(), columns.len())));
        }
        w.write_record(r.iter().map(|x| format_float(*x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series_csv(path: &Path, manifest: &RunManifest, series: &TimeSeries) -> Result<()> {
    write_csv(path, manifest, &series.columns, &series.rows)
}

/// Columns, rows and the manifest of a CSV written by [`write_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub manifest: Option<RunManifest>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = std::fs::read_to_string(path)?;
    read_csv_str(&text)
}

pub fn read_csv_str(text: &str) -> Result<CsvTable> {
    let mut manifest = None;
    let mut body = String::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# manifest: ") {
            manifest = Some(serde_json::from_str(rest)?);
        } else if !line.starts_with('#') {
            body.push_str(line);
            body.push('\n');
        }
    }
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let columns: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        rows.push(row.map_err(|e| Error::Range(format!("unparsable CSV value: {e}")))?);
    }
    Ok(CsvTable { manifest, columns, rows })
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    manifest: &'a RunManifest,
    report: &'a T,
}

/// Pretty JSON `{ "manifest": …, "report": … }`.
pub fn to_json_string<T: Serialize>(manifest: &RunManifest, report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { manifest, report })?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, manifest: &RunManifest, report: &T) -> Result<()> {
    std::fs::write(path, to_json_string(manifest, report)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_lossless() {
        let columns: Vec<String> = ["t", "a", "b"].iter().map(|s| s.to_string()).collect();
        let rows: Vec<Vec<f64>> = (0..100)
            .map(|i| {
                let x = i as f64;
                vec![x * 0.1, (x + 0.3).sqrt() * std::f64::consts::PI, -1.0 / (x + 7.0) * 1e-300]
            })
            .collect();
        let manifest = RunManifest::new("test", Some(3), 1);
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &manifest, &columns, &rows).unwrap();
        let back = read_csv_str(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.columns, columns);
        assert_eq!(back.rows, rows);
        assert_eq!(back.manifest, Some(manifest));
    }

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(1.0).len(), "1.0000000000000000e0".len());
    }
}
