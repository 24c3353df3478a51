use serde::Serialize;

use super::confusion::ConfusionMatrix;
use crate::domain::{ClassLabel, NUM_CLASSES};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub class: ClassLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub specificity: f64,
    pub support: u64,
    /// No sample was predicted as this class, so precision is reported as 0.
    pub undefined_precision: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Filled in when scores are available.
    pub macro_auc_roc: Option<f64>,
    pub cohens_kappa: f64,
    pub balanced_accuracy: f64,
    pub mcc: f64,
    pub macro_specificity: f64,
    pub g_mean: f64,
    pub per_class: Vec<ClassMetrics>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Precision, recall, F1, specificity and support per class.
pub fn per_class_table(cm: &ConfusionMatrix) -> Vec<ClassMetrics> {
    let rows = cm.row_sums();
    let cols = cm.col_sums();
    let total = cm.total();
    ClassLabel::ALL
        .iter()
        .map(|&class| {
            let c = class.index();
            let tp = cm.counts()[c][c];
            let fp = cols[c] - tp;
            let fn_ = rows[c] - tp;
            let tn = total - tp - fp - fn_;
            let precision = ratio(tp, tp + fp);
            let recall = ratio(tp, tp + fn_).unwrap_or(0.0);
            let p = precision.unwrap_or(0.0);
            let f1 = if p + recall > 0.0 { 2.0 * p * recall / (p + recall) } else { 0.0 };
            ClassMetrics {
                class,
                precision: p,
                recall,
                f1,
                specificity: ratio(tn, tn + fp).unwrap_or(0.0),
                support: rows[c],
                undefined_precision: precision.is_none(),
            }
        })
        .collect()
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    v.sum::<f64>() / NUM_CLASSES as f64
}

/// All threshold-free metrics from a confusion matrix. Macro averages are
/// unweighted over the six classes.
pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Validation("confusion matrix is empty".into()));
    }
    let per_class = per_class_table(cm);
    let s = total as f64;
    let c = cm.trace() as f64;
    let rows = cm.row_sums().map(|v| v as f64);
    let cols = cm.col_sums().map(|v| v as f64);

    let accuracy = c / s;
    let p_e: f64 = rows.iter().zip(&cols).map(|(t, p)| t * p).sum::<f64>() / (s * s);
    let cohens_kappa = if p_e < 1.0 { (accuracy - p_e) / (1.0 - p_e) } else { 1.0 };

    let pt: f64 = rows.iter().zip(&cols).map(|(t, p)| t * p).sum();
    let pp: f64 = cols.iter().map(|p| p * p).sum();
    let tt: f64 = rows.iter().map(|t| t * t).sum();
    let denom = ((s * s - pp) * (s * s - tt)).sqrt();
    let mcc = if denom > 0.0 { (c * s - pt) / denom } else { 0.0 };

    let macro_recall = mean(per_class.iter().map(|r| r.recall));
    let macro_specificity = mean(per_class.iter().map(|r| r.specificity));
    Ok(MetricsReport {
        accuracy,
        macro_precision: mean(per_class.iter().map(|r| r.precision)),
        macro_recall,
        macro_f1: mean(per_class.iter().map(|r| r.f1)),
        macro_auc_roc: None,
        cohens_kappa,
        balanced_accuracy: macro_recall,
        mcc,
        macro_specificity,
        g_mean: (macro_recall * macro_specificity).sqrt(),
        per_class,
    })
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

impl MetricsReport {
    /// A copy with every fraction rounded to six decimals, for reporting.
    pub fn rounded(&self) -> MetricsReport {
        MetricsReport {
            accuracy: round6(self.accuracy),
            macro_precision: round6(self.macro_precision),
            macro_recall: round6(self.macro_recall),
            macro_f1: round6(self.macro_f1),
            macro_auc_roc: self.macro_auc_roc.map(round6),
            cohens_kappa: round6(self.cohens_kappa),
            balanced_accuracy: round6(self.balanced_accuracy),
            mcc: round6(self.mcc),
            macro_specificity: round6(self.macro_specificity),
            g_mean: round6(self.g_mean),
            per_class: self
                .per_class
                .iter()
                .map(|r| ClassMetrics {
                    precision: round6(r.precision),
                    recall: round6(r.recall),
                    f1: round6(r.f1),
                    specificity: round6(r.specificity),
                    ..*r
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.rounded())?)
    }

    /// `class,precision,recall,f1,specificity,support`.
    pub fn per_class_csv(&self) -> String {
        let mut out = String::from("class,precision,recall,f1,specificity,support\n");
        for r in &self.per_class {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{:.6},{}\n",
                r.class, r.precision, r.recall, r.f1, r.specificity, r.support
            ));
        }
        out
    }
}
