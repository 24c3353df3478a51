//! Confusion matrix, threshold-free classification metrics and one-vs-rest
//! ROC analysis.

mod confusion;
mod report;
mod roc;

use std::collections::BTreeMap;

pub use confusion::{confusion, ConfusionMatrix};
pub use report::{compute_metrics, per_class_table, ClassMetrics, MetricsReport};
pub use roc::{macro_auc, roc_curve, roc_curves, roc_from_scores, RocCurve, RocPoint};

use crate::domain::{ClassLabel, ProbVector};
use crate::error::Result;
use crate::predictions::argmax_labels;

/// Everything an evaluation run produces.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub confusion: ConfusionMatrix,
    pub report: MetricsReport,
    pub roc: Vec<RocCurve>,
}

/// Confusion, metrics and ROC curves for scored predictions; the predicted
/// class is the argmax of each score vector.
pub fn evaluate(labels: &BTreeMap<String, ClassLabel>, scores: &BTreeMap<String, ProbVector>) -> Result<Evaluation> {
    let cm = confusion(labels, &argmax_labels(scores))?;
    let mut report = compute_metrics(&cm)?;
    let roc = roc_curves(labels, scores)?;
    report.macro_auc_roc = Some(roc.iter().map(|c| c.auc).sum::<f64>() / roc.len() as f64);
    Ok(Evaluation {
        confusion: cm,
        report,
        roc,
    })
}
