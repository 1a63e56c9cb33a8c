//! Run configs, binary checkpoints, and report artifacts.

pub mod checkpoint;
pub mod config;
pub mod report;

pub use checkpoint::{
    load_checkpoint, save_checkpoint, CheckpointHeader, LoadedCheckpoint, FORMAT_VERSION, MAGIC,
};
pub use config::{load_run_config, parse_run_config, RunConfig, TrainingConfig};
pub use report::{
    read_criteria_report, read_run_report, read_verdict, write_criteria_report,
    write_density_csv, write_density_sidecar, write_metrics_csv, write_run_report_csv,
    write_run_report_json, write_verdict, DensitySidecar, RunReport, RunReportRow,
};

use crate::error::{Error, Result};
use std::path::Path;

/// Write-temp-then-rename so readers never observe a partial file.
pub fn atomic_write(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::io(path, std::io::Error::other("path has no file name")))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Shortest-roundtrip decimal for `f64`; stable across runs and re-parses
/// to the identical bits.
pub(crate) fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}
