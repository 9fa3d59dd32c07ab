//! Output files: the indicator table, mesh snapshots and run summaries.

mod indicators;
mod vtk;

pub use indicators::{read_indicators, write_indicators, IndicatorRow, INDICATOR_HEADER};
pub use vtk::{read_vtk, write_vtk, VtkData};

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::driver::{Ensemble, EnsembleSummary};
use crate::error::Result;

#[derive(Serialize)]
struct SummaryFile<'a> {
    config: &'a RunConfig,
    #[serde(flatten)]
    summary: &'a EnsembleSummary,
}

/// Writes `summary.json` with the configuration and ensemble aggregates.
pub fn write_summary(path: &Path, config: &RunConfig, summary: &EnsembleSummary) -> Result<()> {
    let text = serde_json::to_string_pretty(&SummaryFile { config, summary })?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Writes everything a run produces into `dir` and returns the written paths:
/// `indicators.csv`, `summary.json` and `snapshots/path<p>_<k>.vtk`.
pub fn write_run(dir: &Path, config: &RunConfig, ensemble: &Ensemble) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv_path = dir.join("indicators.csv");
    write_indicators(&csv_path, &ensemble.logs)?;
    written.push(csv_path);
    let summary_path = dir.join("summary.json");
    write_summary(&summary_path, config, &ensemble.summary)?;
    written.push(summary_path);
    let snap_dir = dir.join("snapshots");
    for log in &ensemble.logs {
        for (k, s) in log.snapshots.iter().enumerate() {
            fs::create_dir_all(&snap_dir)?;
            let p = snap_dir.join(format!("path{}_{k}.vtk", log.path));
            let title = format!("path {} t={:.6e}", log.path, s.time);
            write_vtk(&p, &title, &s.mesh, s.solution.values(), &s.element_indicators)?;
            written.push(p);
        }
    }
    Ok(written)
}
