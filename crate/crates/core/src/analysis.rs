//! Checkpoint → report pipeline: spectral estimation, extreme
//! cross-checks, criteria evaluation, artifact emission.

use crate::criteria::{
    classify_hesd, compute_kh05, compute_re, ct_from_extremes, CriteriaReport,
    CriteriaThresholds, CtCriterion, QsTolerance, SignedExtremes,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::io::checkpoint::LoadedCheckpoint;
use crate::io::report::{CriteriaSummary, RunReport, RunReportRow};
use crate::io::{load_checkpoint, write_criteria_report, write_density_csv, write_density_sidecar};
use crate::models::{build_model, make_dataset, Batch, SplitTag};
use crate::spectral::{
    extreme_pair, slq_density, HessianOperator, LinearOperator, PowerConfig, RitzSet, SlqConfig,
    SpectralDensity,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub slq: SlqConfig,
    pub power: PowerConfig,
    pub thresholds: CriteriaThresholds,
    pub qs: QsTolerance,
}

impl AnalysisOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            slq: SlqConfig {
                seed,
                ..Default::default()
            },
            // Separate stream so power probes never alias SLQ probes.
            power: PowerConfig {
                seed: seed ^ 0x9e37_79b9_7f4a_7c15,
                ..Default::default()
            },
            thresholds: CriteriaThresholds::default(),
            qs: QsTolerance::default(),
        }
    }
}

/// Everything expensive about one analysis; classification is applied
/// afterwards so a sweep can supply its epoch-zero QS baseline.
#[derive(Debug, Clone)]
pub struct SpectralSummary {
    pub density: SpectralDensity,
    pub ritz: RitzSet,
    pub extremes: SignedExtremes,
    pub ct: CtCriterion,
    pub r_e: Option<f64>,
    pub k_h05: Option<f64>,
}

/// Estimate the spectrum of `op` and evaluate the scale-level criteria.
///
/// Extreme eigenvalues come from the Ritz set cross-checked against power
/// iteration; per side the larger-magnitude estimate wins, since both
/// methods approach the true extremes from inside.
pub fn spectral_summary(
    op: &dyn LinearOperator,
    options: &AnalysisOptions,
) -> Result<SpectralSummary> {
    let (density, ritz) = slq_density(op, &options.slq)?;
    let mut extremes = SignedExtremes::from_ritz(&ritz)?;
    let (power_min, power_max) = extreme_pair(op, &options.power)?;
    extremes.merge_candidate(power_min.eigenvalue, power_max.eigenvalue);
    let ct = ct_from_extremes(&extremes);
    let r_e = compute_re(&ct);
    let k_h05 = compute_kh05(&density).ok();
    Ok(SpectralSummary {
        density,
        ritz,
        extremes,
        ct,
        r_e,
        k_h05,
    })
}

/// Attach classification and provenance to a summary.
pub fn finalize_report(
    summary: &SpectralSummary,
    options: &AnalysisOptions,
    checkpoint_id: &str,
    tag: SplitTag,
    config_hash: &str,
) -> CriteriaReport {
    let hesd_type = classify_hesd(&summary.extremes, &summary.ct, &options.qs, &options.thresholds);
    CriteriaReport {
        schema_version: crate::SCHEMA_VERSION,
        checkpoint_id: checkpoint_id.to_string(),
        dataset_tag: tag,
        c_t: summary.ct,
        r_e: summary.r_e,
        k_h05: summary.k_h05,
        lambda_min_neg: summary.extremes.lambda_min_neg,
        lambda_max_pos: summary.extremes.lambda_max_pos,
        hesd_type,
        seed: options.slq.seed,
        config_hash: config_hash.to_string(),
    }
}

/// The fixed analysis batch for one split of a loaded checkpoint.
pub fn analysis_batch(loaded: &LoadedCheckpoint, tag: SplitTag) -> Result<Batch> {
    let config = loaded.header.run_config()?;
    let dataset = make_dataset(&config.dataset)?;
    Ok(dataset.split(tag).head(config.training.analysis_batch))
}

/// Full analysis of one checkpoint on one split.
pub fn analyze_checkpoint(
    loaded: &LoadedCheckpoint,
    tag: SplitTag,
    options: &AnalysisOptions,
) -> Result<(CriteriaReport, SpectralSummary)> {
    let config = loaded.header.run_config()?;
    let (model, template) = build_model(&config.model, config.seed)?;
    if !template.same_layout(&loaded.params) {
        return Err(Error::CheckpointFormat(
            "segment table does not match the embedded model spec".to_string(),
        ));
    }
    let batch = analysis_batch(loaded, tag)?;
    let op = HessianOperator::new(&model, &loaded.params, &batch);
    let summary = spectral_summary(&op, options)?;
    let report = finalize_report(
        &summary,
        options,
        &loaded.header.checkpoint_id(),
        tag,
        &loaded.header.config_hash,
    );
    Ok((report, summary))
}

/// Sibling artifact paths for a checkpoint analysis:
/// (report.json, density.csv, density sidecar.json).
pub fn artifact_paths(checkpoint_path: &Path, tag: SplitTag) -> (PathBuf, PathBuf, PathBuf) {
    let stem = checkpoint_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "checkpoint".to_string());
    let dir = checkpoint_path.parent().unwrap_or_else(|| Path::new("."));
    (
        dir.join(format!("{stem}.{tag}.report.json")),
        dir.join(format!("{stem}.{tag}.density.csv")),
        dir.join(format!("{stem}.{tag}.density.json")),
    )
}

/// Analyze one checkpoint file and write its three artifacts.
pub fn analyze_checkpoint_file(
    checkpoint_path: &Path,
    tag: SplitTag,
    options: &AnalysisOptions,
) -> Result<CriteriaReport> {
    let loaded = load_checkpoint(checkpoint_path)?;
    let (report, summary) = analyze_checkpoint(&loaded, tag, options)?;
    let (report_path, csv_path, sidecar_path) = artifact_paths(checkpoint_path, tag);
    write_criteria_report(&report_path, &report)?;
    write_density_csv(&csv_path, &summary.density, &report.config_hash)?;
    write_density_sidecar(&sidecar_path, &summary.density, &report.config_hash)?;
    Ok(report)
}

/// Checkpoint files in a run directory, sorted by epoch.
pub fn list_checkpoints(run_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    let entries = std::fs::read_dir(run_dir).map_err(|e| Error::io(run_dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(run_dir, e))?;
        let path = entry.path();
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with("ckpt-") && name.ends_with(".hesd") {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

pub struct SweepOutcome {
    pub report: RunReport,
    /// Checkpoints that could not be analyzed, with the error text.
    pub failures: Vec<(PathBuf, String)>,
}

/// Analyze every checkpoint in a run directory on both splits and
/// aggregate the per-epoch criteria.
///
/// Checkpoints run concurrently; rows are assembled in epoch order. The
/// QS tolerance for every epoch is keyed to the first analyzed epoch's
/// largest extreme, so late-run spectral collapse is recognized relative
/// to where the run started.
pub fn sweep_run_dir(run_dir: &Path, options: &AnalysisOptions) -> Result<SweepOutcome> {
    let paths = list_checkpoints(run_dir)?;
    if paths.is_empty() {
        return Err(Error::config(
            "run_dir",
            format!("no checkpoint files found in {}", run_dir.display()),
        ));
    }

    type PerCheckpoint = (
        PathBuf,
        std::result::Result<(LoadedCheckpoint, SpectralSummary, SpectralSummary), String>,
    );
    let analyzed: Vec<PerCheckpoint> = exec::ordered_map(paths, |path| {
        let outcome = (|| -> Result<(LoadedCheckpoint, SpectralSummary, SpectralSummary)> {
            let loaded = load_checkpoint(&path)?;
            let (_, train_summary) = analyze_checkpoint(&loaded, SplitTag::Train, options)?;
            let (_, gen_summary) =
                analyze_checkpoint(&loaded, SplitTag::Generalization, options)?;
            Ok((loaded, train_summary, gen_summary))
        })();
        (path, outcome.map_err(|e| e.to_string()))
    });

    // First successfully analyzed epoch sets the QS baseline.
    let baseline = analyzed.iter().find_map(|(_, outcome)| {
        outcome
            .as_ref()
            .ok()
            .map(|(_, train, _)| train.extremes.max_abs_extreme())
    });
    let qs = match baseline {
        Some(extreme) if extreme > 0.0 => QsTolerance {
            baseline_extreme: Some(extreme),
            ..options.qs
        },
        _ => options.qs,
    };
    let classify_options = AnalysisOptions { qs, ..*options };

    let mut rows = Vec::new();
    let mut missing = Vec::new();
    let mut failures = Vec::new();
    let mut run_meta: Option<(String, u64, String)> = None;

    for (path, outcome) in analyzed {
        match outcome {
            Err(message) => {
                missing.push(path.display().to_string());
                failures.push((path, message));
            }
            Ok((loaded, train_summary, gen_summary)) => {
                let id = loaded.header.checkpoint_id();
                let train_report = finalize_report(
                    &train_summary,
                    &classify_options,
                    &id,
                    SplitTag::Train,
                    &loaded.header.config_hash,
                );
                let gen_report = finalize_report(
                    &gen_summary,
                    &classify_options,
                    &id,
                    SplitTag::Generalization,
                    &loaded.header.config_hash,
                );
                // Keep the per-checkpoint artifacts in sync with the rows.
                let (rp, cp, sp) = artifact_paths(&path, SplitTag::Train);
                write_criteria_report(&rp, &train_report)?;
                write_density_csv(&cp, &train_summary.density, &train_report.config_hash)?;
                write_density_sidecar(&sp, &train_summary.density, &train_report.config_hash)?;
                let (rp, cp, sp) = artifact_paths(&path, SplitTag::Generalization);
                write_criteria_report(&rp, &gen_report)?;
                write_density_csv(&cp, &gen_summary.density, &gen_report.config_hash)?;
                write_density_sidecar(&sp, &gen_summary.density, &gen_report.config_hash)?;

                let deltas = crate::criteria::delta_criteria(&train_report, &gen_report)?;
                if run_meta.is_none() {
                    run_meta = Some((
                        loaded.header.run_id.clone(),
                        loaded.header.seed,
                        loaded.header.config_hash.clone(),
                    ));
                }
                rows.push(RunReportRow {
                    epoch: loaded.header.epoch,
                    train: CriteriaSummary::from_report(&train_report),
                    generalization: CriteriaSummary::from_report(&gen_report),
                    delta_re: deltas.delta_re,
                    delta_kh05: deltas.delta_kh05,
                    train_accuracy: loaded.header.train_accuracy,
                    gen_accuracy: loaded.header.gen_accuracy,
                });
            }
        }
    }

    if rows.is_empty() {
        return Err(Error::config(
            "run_dir",
            "every checkpoint analysis failed".to_string(),
        ));
    }
    rows.sort_by_key(|r| r.epoch);
    let (run_id, seed, config_hash) = run_meta.expect("at least one row");

    Ok(SweepOutcome {
        report: RunReport {
            schema_version: crate::SCHEMA_VERSION,
            run_id,
            seed,
            config_hash,
            rows,
            missing,
        },
        failures,
    })
}
