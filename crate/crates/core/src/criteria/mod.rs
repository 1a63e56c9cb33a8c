//! HESD type criterion C_t, the r_e / K_H05 generalization criteria, and
//! the unified assessment algorithm.
//!
//! C_t is the ratio of the most negative to the largest positive eigenvalue
//! of the loss Hessian. Trained networks normally keep C_t above −0.6
//! (mainly positive spectrum); values at or below it indicate a mainly
//! negative spectrum, which in practice traces back to external gradient
//! manipulation and makes the rest of the methodology unreliable. A third
//! regime — all extremes collapsing toward zero under excessive training —
//! is flagged quasi-singular; C_t itself stays well-defined there.

use crate::error::{Error, Result};
use crate::models::SplitTag;
use crate::spectral::{RitzSet, SpectralDensity};
use serde::{Deserialize, Serialize};

/// Fraction of the largest |node| below which a Ritz node is treated as
/// numerically zero when attributing signs. Kernel smoothing bleeds mass
/// across zero, so sign attribution works on the raw nodes instead.
pub const EPS_RITZ_FACTOR: f64 = 1e-4;

/// Spectral classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HesdType {
    /// Mainly positive: C_t above the threshold.
    #[serde(rename = "MP")]
    Mp,
    /// Mainly negative: deep negative spectrum.
    #[serde(rename = "MN")]
    Mn,
    /// Quasi-singular: both extremes collapsed toward zero.
    #[serde(rename = "QS")]
    Qs,
}

impl std::fmt::Display for HesdType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HesdType::Mp => write!(f, "MP"),
            HesdType::Mn => write!(f, "MN"),
            HesdType::Qs => write!(f, "QS"),
        }
    }
}

/// Decision thresholds. Defaults are the published numbers; they are
/// configuration, not constants, so sensitivity studies can move them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriteriaThresholds {
    /// MP iff C_t is strictly above this.
    pub ct_mp: f64,
    /// Good generalization needs Δr_e strictly below this.
    pub delta_re: f64,
    /// ... and ΔK_H05 strictly below this.
    pub delta_kh05: f64,
}

impl Default for CriteriaThresholds {
    fn default() -> Self {
        Self {
            ct_mp: -0.6,
            delta_re: 1.5,
            delta_kh05: 1.2,
        }
    }
}

/// C_t with its degenerate-input flags.
///
/// Sentinels: no negative nodes → 0 (flagged), negative nodes but no
/// positive ones → −∞ (flagged). The sentinels keep classification total:
/// 0 classifies MP, −∞ classifies MN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CtCriterion {
    #[serde(with = "serde_nonfinite")]
    pub value: f64,
    pub no_negative: bool,
    pub no_positive: bool,
}

/// Signed spectral extremes plus the attribution tolerance they came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedExtremes {
    /// Most negative eigenvalue, min(λ_neg).
    pub lambda_min_neg: Option<f64>,
    /// Largest positive eigenvalue, max(λ_pos).
    pub lambda_max_pos: Option<f64>,
    pub eps_ritz: f64,
}

impl SignedExtremes {
    /// Attribute signs to Ritz nodes: negative iff below −ε, positive iff
    /// above +ε, with ε = EPS_RITZ_FACTOR · max|node|.
    pub fn from_ritz(ritz: &RitzSet) -> Result<Self> {
        if ritz.is_empty() {
            return Err(Error::EmptyRitzSet);
        }
        let eps = EPS_RITZ_FACTOR * ritz.max_abs_node();
        let mut min_neg: Option<f64> = None;
        let mut max_pos: Option<f64> = None;
        for n in ritz.nodes() {
            if n.node < -eps {
                min_neg = Some(min_neg.map_or(n.node, |m: f64| m.min(n.node)));
            } else if n.node > eps {
                max_pos = Some(max_pos.map_or(n.node, |m: f64| m.max(n.node)));
            }
        }
        Ok(Self {
            lambda_min_neg: min_neg,
            lambda_max_pos: max_pos,
            eps_ritz: eps,
        })
    }

    /// Fold in independently estimated extremes (power iteration); per
    /// side, the larger-magnitude candidate wins, since Krylov methods only
    /// ever under-reach the true extremes.
    pub fn merge_candidate(&mut self, candidate_min: f64, candidate_max: f64) {
        if candidate_min < -self.eps_ritz {
            self.lambda_min_neg = Some(match self.lambda_min_neg {
                Some(cur) => cur.min(candidate_min),
                None => candidate_min,
            });
        }
        if candidate_max > self.eps_ritz {
            self.lambda_max_pos = Some(match self.lambda_max_pos {
                Some(cur) => cur.max(candidate_max),
                None => candidate_max,
            });
        }
    }

    pub fn max_abs_extreme(&self) -> f64 {
        let a = self.lambda_min_neg.map_or(0.0, f64::abs);
        let b = self.lambda_max_pos.map_or(0.0, f64::abs);
        a.max(b)
    }
}

/// C_t from already-attributed extremes.
pub fn ct_from_extremes(extremes: &SignedExtremes) -> CtCriterion {
    match (extremes.lambda_min_neg, extremes.lambda_max_pos) {
        (Some(neg), Some(pos)) => CtCriterion {
            value: neg / pos,
            no_negative: false,
            no_positive: false,
        },
        (None, pos) => CtCriterion {
            value: 0.0,
            no_negative: true,
            no_positive: pos.is_none(),
        },
        (Some(_), None) => CtCriterion {
            value: f64::NEG_INFINITY,
            no_negative: false,
            no_positive: true,
        },
    }
}

/// C_t = min(λ_neg) / max(λ_pos) over the Ritz nodes.
pub fn compute_ct(ritz: &RitzSet) -> Result<(CtCriterion, SignedExtremes)> {
    let extremes = SignedExtremes::from_ritz(ritz)?;
    Ok((ct_from_extremes(&extremes), extremes))
}

/// Threshold for the quasi-singular check. Relative to the first analyzed
/// epoch of a run when a baseline exists; absolute fallback otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QsTolerance {
    pub baseline_extreme: Option<f64>,
    pub relative: f64,
    pub absolute_fallback: f64,
}

impl Default for QsTolerance {
    fn default() -> Self {
        Self {
            baseline_extreme: None,
            relative: 1e-3,
            absolute_fallback: 1e-6,
        }
    }
}

impl QsTolerance {
    pub fn with_baseline(baseline_extreme: f64) -> Self {
        Self {
            baseline_extreme: Some(baseline_extreme),
            ..Self::default()
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self.baseline_extreme {
            Some(b) => self.relative * b.abs(),
            None => self.absolute_fallback,
        }
    }
}

/// Total classification: QS when both extremes are inside the QS
/// tolerance, otherwise MP/MN by the C_t threshold.
pub fn classify_hesd(
    extremes: &SignedExtremes,
    ct: &CtCriterion,
    qs: &QsTolerance,
    thresholds: &CriteriaThresholds,
) -> HesdType {
    if extremes.max_abs_extreme() < qs.epsilon() {
        HesdType::Qs
    } else if ct.value > thresholds.ct_mp {
        HesdType::Mp
    } else {
        HesdType::Mn
    }
}

/// r_e = −C_t, defined only when negative eigenvalues exist.
pub fn compute_re(ct: &CtCriterion) -> Option<f64> {
    if ct.no_negative {
        None
    } else {
        Some(-ct.value)
    }
}

/// Estimator for the K_H05 criterion. The definition lives in prior work;
/// this trait keeps it swappable without touching any caller.
pub trait Kh05Estimator: Send + Sync {
    fn estimate(&self, density: &SpectralDensity) -> Result<f64>;
}

/// Default stand-in definition: threshold the density at half its peak,
/// then take the ratio of surviving mass on λ < 0 to mass on λ ≥ 0.
/// Intervals straddling zero are split by linear interpolation so a
/// symmetric density scores exactly 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct HalfMaxMassRatio;

impl Kh05Estimator for HalfMaxMassRatio {
    fn estimate(&self, density: &SpectralDensity) -> Result<f64> {
        let peak = density.density.iter().fold(0.0f64, |m, &v| m.max(v));
        if peak <= 0.0 {
            return Err(Error::ZeroPositiveMass);
        }
        let cut = 0.5 * peak;
        let kept: Vec<f64> = density
            .density
            .iter()
            .map(|&v| if v >= cut { v } else { 0.0 })
            .collect();

        let mut neg = 0.0;
        let mut pos = 0.0;
        for i in 1..density.grid.len() {
            let (x0, x1) = (density.grid[i - 1], density.grid[i]);
            let (y0, y1) = (kept[i - 1], kept[i]);
            if x1 <= 0.0 {
                neg += 0.5 * (y0 + y1) * (x1 - x0);
            } else if x0 >= 0.0 {
                pos += 0.5 * (y0 + y1) * (x1 - x0);
            } else {
                // Straddles zero: split at the interpolated density value.
                let t = -x0 / (x1 - x0);
                let y_mid = y0 + t * (y1 - y0);
                neg += 0.5 * (y0 + y_mid) * (0.0 - x0);
                pos += 0.5 * (y_mid + y1) * (x1 - 0.0);
            }
        }
        if pos <= 0.0 {
            return Err(Error::ZeroPositiveMass);
        }
        Ok(neg / pos)
    }
}

/// K_H05 with the default estimator.
pub fn compute_kh05(density: &SpectralDensity) -> Result<f64> {
    HalfMaxMassRatio.estimate(density)
}

/// Everything the criteria produce for one (checkpoint, dataset) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub schema_version: u32,
    pub checkpoint_id: String,
    pub dataset_tag: SplitTag,
    pub c_t: CtCriterion,
    #[serde(with = "serde_opt_nonfinite")]
    pub r_e: Option<f64>,
    pub k_h05: Option<f64>,
    pub lambda_min_neg: Option<f64>,
    pub lambda_max_pos: Option<f64>,
    pub hesd_type: HesdType,
    pub seed: u64,
    pub config_hash: String,
}

impl CriteriaReport {
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

/// Ratios of the generalization-split criteria to the train-split ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaCriteria {
    pub delta_re: Option<f64>,
    pub delta_kh05: Option<f64>,
}

/// Δr_e = r_e.gen / r_e.train and ΔK_H05 = k_h05.gen / k_h05.train.
/// Zero denominators and missing values flag the ratio undefined rather
/// than erroring; mismatched checkpoints are an error.
pub fn delta_criteria(train: &CriteriaReport, gen: &CriteriaReport) -> Result<DeltaCriteria> {
    if train.checkpoint_id != gen.checkpoint_id {
        return Err(Error::CheckpointMismatch {
            left: train.checkpoint_id.clone(),
            right: gen.checkpoint_id.clone(),
        });
    }
    let ratio = |num: Option<f64>, den: Option<f64>| -> Option<f64> {
        match (num, den) {
            (Some(n), Some(d)) if d != 0.0 => {
                let r = n / d;
                r.is_finite().then_some(r)
            }
            _ => None,
        }
    };
    Ok(DeltaCriteria {
        delta_re: ratio(gen.r_e, train.r_e),
        delta_kh05: ratio(gen.k_h05, train.k_h05),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssessReason {
    MpOk,
    MnGradientManipulation,
    QsSpectrum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generalization {
    Good,
    Poor,
    NotAssessed,
}

/// Outcome of the unified assessment algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub schema_version: u32,
    pub checkpoint_id: String,
    pub applicable: bool,
    pub reason: AssessReason,
    pub delta_re: Option<f64>,
    pub delta_kh05: Option<f64>,
    pub generalization: Generalization,
    /// Present when deltas were undefined and generalization could not be
    /// assessed despite an applicable spectrum type.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

/// The unified assessment: type check first, then the Δ conditions.
///
/// * MN train spectrum → methodology not applicable, no verdict.
/// * QS → applicable (C_t does not degenerate there), flagged as QS.
/// * MP → applicable.
/// * Good generalization iff Δr_e < 1.5 and ΔK_H05 < 1.2 (defaults).
pub fn assess(
    train: &CriteriaReport,
    gen: &CriteriaReport,
    thresholds: &CriteriaThresholds,
) -> Result<Verdict> {
    if train.checkpoint_id != gen.checkpoint_id {
        return Err(Error::CheckpointMismatch {
            left: train.checkpoint_id.clone(),
            right: gen.checkpoint_id.clone(),
        });
    }

    if train.hesd_type == HesdType::Mn {
        return Ok(Verdict {
            schema_version: crate::SCHEMA_VERSION,
            checkpoint_id: train.checkpoint_id.clone(),
            applicable: false,
            reason: AssessReason::MnGradientManipulation,
            delta_re: None,
            delta_kh05: None,
            generalization: Generalization::NotAssessed,
            note: None,
        });
    }

    let reason = match train.hesd_type {
        HesdType::Qs => AssessReason::QsSpectrum,
        _ => AssessReason::MpOk,
    };
    let deltas = delta_criteria(train, gen)?;
    let (generalization, note) = match (deltas.delta_re, deltas.delta_kh05) {
        (Some(dre), Some(dkh)) => {
            if dre < thresholds.delta_re && dkh < thresholds.delta_kh05 {
                (Generalization::Good, None)
            } else {
                (Generalization::Poor, None)
            }
        }
        _ => (
            Generalization::NotAssessed,
            Some("delta criteria undefined (missing or zero-valued r_e / K_H05)".to_string()),
        ),
    };

    Ok(Verdict {
        schema_version: crate::SCHEMA_VERSION,
        checkpoint_id: train.checkpoint_id.clone(),
        applicable: true,
        reason,
        delta_re: deltas.delta_re,
        delta_kh05: deltas.delta_kh05,
        generalization,
        note,
    })
}

/// One epoch's worth of selection inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub epoch: usize,
    #[serde(with = "serde_nonfinite")]
    pub c_t: f64,
    pub lambda_max_pos: Option<f64>,
    pub train_accuracy: f64,
    pub gen_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    /// Epoch picked by the highest-C_t strategy.
    pub by_ct: usize,
    /// Epoch picked by the smallest-max-eigenvalue strategy.
    pub by_max_eigenvalue: usize,
}

/// Among epochs whose train accuracy is within `tie_band` of the best,
/// pick argmax C_t and argmin λ_max_pos. Ties go to the earliest epoch.
pub fn select_checkpoint(rows: &[SelectionRow], tie_band: f64) -> Result<SelectionOutcome> {
    if rows.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }
    let best_acc = rows
        .iter()
        .map(|r| r.train_accuracy)
        .fold(f64::NEG_INFINITY, f64::max);
    let candidates: Vec<&SelectionRow> = rows
        .iter()
        .filter(|r| r.train_accuracy >= best_acc - tie_band)
        .collect();
    if candidates.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }

    let mut by_ct = candidates[0];
    for row in &candidates[1..] {
        if row.c_t > by_ct.c_t || (row.c_t == by_ct.c_t && row.epoch < by_ct.epoch) {
            by_ct = row;
        }
    }

    let mut by_eig: Option<&SelectionRow> = None;
    for row in &candidates {
        let Some(lm) = row.lambda_max_pos else { continue };
        match by_eig {
            None => by_eig = Some(row),
            Some(cur) => {
                let cur_lm = cur.lambda_max_pos.unwrap();
                if lm < cur_lm || (lm == cur_lm && row.epoch < cur.epoch) {
                    by_eig = Some(row);
                }
            }
        }
    }
    let by_eig = by_eig.ok_or(Error::EmptyCandidateSet)?;

    Ok(SelectionOutcome {
        by_ct: by_ct.epoch,
        by_max_eigenvalue: by_eig.epoch,
    })
}

/// JSON mapping for possibly non-finite floats: finite values pass
/// through, anything else serializes as null. The paired flags on the
/// owning struct disambiguate on load.
mod serde_nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let opt = Option::<f64>::deserialize(d)?;
        Ok(opt.unwrap_or(f64::NEG_INFINITY))
    }
}

mod serde_opt_nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) if x.is_finite() => s.serialize_some(x),
            _ => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<f64>::deserialize(d)
    }
}

#[cfg(test)]
mod tests;
