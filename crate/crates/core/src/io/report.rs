//! Report artifacts: criteria reports, density curves, per-run sweeps,
//! verdicts. JSON schemas carry `schema_version`; CSV files carry their
//! provenance (seed, config hash) as leading `#` comment lines.

use crate::criteria::{CriteriaReport, CtCriterion, HesdType, Verdict};
use crate::error::{Error, Result};
use crate::io::{atomic_write, fmt_f64};
use crate::spectral::SpectralDensity;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// JSON sidecar describing a density CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySidecar {
    pub schema_version: u32,
    pub sigma: f64,
    pub steps: usize,
    pub probes: usize,
    pub seed: u64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub qs_degenerate: bool,
    pub config_hash: String,
}

impl DensitySidecar {
    pub fn from_density(density: &SpectralDensity, config_hash: &str) -> Self {
        Self {
            schema_version: crate::SCHEMA_VERSION,
            sigma: density.sigma,
            steps: density.steps,
            probes: density.probes,
            seed: density.seed,
            lambda_min: density.lambda_min,
            lambda_max: density.lambda_max,
            qs_degenerate: density.qs_degenerate,
            config_hash: config_hash.to_string(),
        }
    }
}

pub fn write_density_csv(
    path: impl AsRef<Path>,
    density: &SpectralDensity,
    config_hash: &str,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# seed={}\n", density.seed));
    out.push_str(&format!("# config_hash={config_hash}\n"));
    out.push_str("grid,density\n");
    for (g, d) in density.grid.iter().zip(&density.density) {
        out.push_str(&fmt_f64(*g));
        out.push(',');
        out.push_str(&fmt_f64(*d));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

pub fn write_density_sidecar(
    path: impl AsRef<Path>,
    density: &SpectralDensity,
    config_hash: &str,
) -> Result<()> {
    let sidecar = DensitySidecar::from_density(density, config_hash);
    atomic_write(path, &to_pretty_json(&sidecar)?)
}

pub fn write_criteria_report(path: impl AsRef<Path>, report: &CriteriaReport) -> Result<()> {
    atomic_write(path, &to_pretty_json(report)?)
}

pub fn read_criteria_report(path: impl AsRef<Path>) -> Result<CriteriaReport> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let report: CriteriaReport = serde_json::from_slice(&bytes)?;
    report.validate_schema()?;
    Ok(report)
}

pub fn write_verdict(path: impl AsRef<Path>, verdict: &Verdict) -> Result<()> {
    atomic_write(path, &to_pretty_json(verdict)?)
}

pub fn read_verdict(path: impl AsRef<Path>) -> Result<Verdict> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// One epoch of a sweep: criteria on both splits plus the deltas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReportRow {
    pub epoch: usize,
    pub train: CriteriaSummary,
    pub generalization: CriteriaSummary,
    pub delta_re: Option<f64>,
    pub delta_kh05: Option<f64>,
    pub train_accuracy: f64,
    pub gen_accuracy: f64,
}

/// The per-split slice of a report row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaSummary {
    pub c_t: CtCriterion,
    pub r_e: Option<f64>,
    pub k_h05: Option<f64>,
    pub lambda_min_neg: Option<f64>,
    pub lambda_max_pos: Option<f64>,
    pub hesd_type: HesdType,
}

impl CriteriaSummary {
    pub fn from_report(report: &CriteriaReport) -> Self {
        Self {
            c_t: report.c_t,
            r_e: report.r_e.filter(|v| v.is_finite()),
            k_h05: report.k_h05,
            lambda_min_neg: report.lambda_min_neg,
            lambda_max_pos: report.lambda_max_pos,
            hesd_type: report.hesd_type,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub run_id: String,
    pub seed: u64,
    pub config_hash: String,
    /// Rows sorted ascending by epoch.
    pub rows: Vec<RunReportRow>,
    /// Checkpoints whose analyses were unavailable, if any.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<String>,
}

impl RunReport {
    pub fn validate_schema(&self) -> Result<()> {
        if self.schema_version > crate::SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: self.schema_version,
                supported: crate::SCHEMA_VERSION,
            });
        }
        Ok(())
    }
}

pub fn write_run_report_json(path: impl AsRef<Path>, report: &RunReport) -> Result<()> {
    atomic_write(path, &to_pretty_json(report)?)
}

pub fn read_run_report(path: impl AsRef<Path>) -> Result<RunReport> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let report: RunReport = serde_json::from_slice(&bytes)?;
    report.validate_schema()?;
    Ok(report)
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_run_report_csv(path: impl AsRef<Path>, report: &RunReport) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# seed={}\n", report.seed));
    out.push_str(&format!("# config_hash={}\n", report.config_hash));
    out.push_str(
        "epoch,ct_train,ct_gen,re_train,re_gen,kh05_train,kh05_gen,\
         lambda_min_neg_train,lambda_max_pos_train,lambda_min_neg_gen,lambda_max_pos_gen,\
         hesd_type_train,hesd_type_gen,delta_re,delta_kh05,train_acc,gen_acc\n",
    );
    for row in &report.rows {
        let ct = |c: &CtCriterion| {
            if c.value.is_finite() {
                fmt_f64(c.value)
            } else {
                "-inf".to_string()
            }
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.epoch,
            ct(&row.train.c_t),
            ct(&row.generalization.c_t),
            opt(row.train.r_e),
            opt(row.generalization.r_e),
            opt(row.train.k_h05),
            opt(row.generalization.k_h05),
            opt(row.train.lambda_min_neg),
            opt(row.train.lambda_max_pos),
            opt(row.generalization.lambda_min_neg),
            opt(row.generalization.lambda_max_pos),
            row.train.hesd_type,
            row.generalization.hesd_type,
            opt(row.delta_re),
            opt(row.delta_kh05),
            fmt_f64(row.train_accuracy),
            fmt_f64(row.gen_accuracy),
        ));
    }
    atomic_write(path, out.as_bytes())
}

/// Per-epoch training metrics.
pub fn write_metrics_csv(
    path: impl AsRef<Path>,
    rows: &[crate::optim::EpochMetrics],
    seed: u64,
    config_hash: &str,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# seed={seed}\n"));
    out.push_str(&format!("# config_hash={config_hash}\n"));
    out.push_str("epoch,mean_loss,train_acc,gen_acc\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.epoch,
            fmt_f64(row.mean_loss),
            fmt_f64(row.train_accuracy),
            fmt_f64(row.gen_accuracy),
        ));
    }
    atomic_write(path, out.as_bytes())
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}
