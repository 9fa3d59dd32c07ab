use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::driver::PathLog;
use crate::error::Result;

pub const INDICATOR_HEADER: [&str; 14] = [
    "path_id", "n", "t_n", "tau_n", "ndof", "eta_time1", "eta_time2", "eta_space1", "eta_space2", "eta_noise1",
    "eta_noise2", "eta_noise3", "eta_lin", "fp_iters",
];

/// One row of `indicators.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorRow {
    pub path_id: usize,
    pub n: usize,
    pub t_n: f64,
    pub tau_n: f64,
    pub ndof: usize,
    pub eta_time1: f64,
    pub eta_time2: f64,
    pub eta_space1: f64,
    pub eta_space2: f64,
    pub eta_noise1: f64,
    pub eta_noise2: f64,
    pub eta_noise3: f64,
    pub eta_lin: f64,
    pub fp_iters: usize,
}

fn real(x: f64) -> String {
    // 17 significant digits round-trip every f64
    format!("{x:.16e}")
}

/// Writes all records, ordered by path and step.
pub fn write_indicators(path: &Path, logs: &[PathLog]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(INDICATOR_HEADER)?;
    for log in logs {
        for r in &log.records {
            w.write_record([
                log.path.to_string(),
                r.step.to_string(),
                real(r.time),
                real(r.tau),
                r.ndof.to_string(),
                real(r.eta_time1),
                real(r.eta_time2),
                real(r.eta_space1),
                real(r.eta_space2),
                real(r.eta_noise1),
                real(r.eta_noise2),
                real(r.eta_noise3),
                real(r.eta_lin),
                r.fp_iters.to_string(),
            ])?;
        }
    }
    w.into_inner().map_err(|e| e.into_error())?.flush()?;
    Ok(())
}

pub fn read_indicators(path: &Path) -> Result<Vec<IndicatorRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != INDICATOR_HEADER {
        return Err(crate::error::Error::InvalidArgument(format!(
            "unexpected indicator header {header:?}"
        )));
    }
    let mut rows = Vec::new();
    for row in r.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}
