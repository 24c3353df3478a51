use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::domain::{ClassLabel, ProbVector};
use crate::error::{Error, Result};
use crate::predictions::id_mismatch;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RocPoint {
    /// Scores at or above this value are called positive; the leading point
    /// uses `+inf`.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RocCurve {
    pub class: ClassLabel,
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    /// `threshold,fpr,tpr` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,fpr,tpr\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{:.6},{:.6}", p.threshold, p.fpr, p.tpr);
        }
        out
    }
}

/// One-vs-rest ROC from `(score, is_positive)` pairs.
pub fn roc_from_scores(class: ClassLabel, scored: &[(f64, bool)]) -> Result<RocCurve> {
    let pos = scored.iter().filter(|s| s.1).count();
    let neg = scored.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Validation(format!(
            "class {class} has {pos} positive and {neg} negative samples; ROC needs both"
        )));
    }
    let mut sorted = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        // tied scores move together
        let threshold = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == threshold {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let prev = *points.last().expect("leading point");
        let p = RocPoint {
            threshold,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        };
        auc += (p.fpr - prev.fpr) * (p.tpr + prev.tpr) / 2.0;
        points.push(p);
    }
    Ok(RocCurve { class, points, auc })
}

fn aligned(
    labels: &BTreeMap<String, ClassLabel>,
    scores: &BTreeMap<String, ProbVector>,
) -> Result<()> {
    match id_mismatch(labels.keys().map(String::as_str), scores.keys().map(String::as_str)) {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// One-vs-rest ROC for `class`, scoring each sample by its probability for
/// that class.
pub fn roc_curve(
    labels: &BTreeMap<String, ClassLabel>,
    scores: &BTreeMap<String, ProbVector>,
    class: ClassLabel,
) -> Result<RocCurve> {
    aligned(labels, scores)?;
    let scored: Vec<(f64, bool)> = labels
        .values()
        .zip(scores.values())
        .map(|(l, p)| (p.get(class), *l == class))
        .collect();
    roc_from_scores(class, &scored)
}

/// All six one-vs-rest curves, in class order.
pub fn roc_curves(
    labels: &BTreeMap<String, ClassLabel>,
    scores: &BTreeMap<String, ProbVector>,
) -> Result<Vec<RocCurve>> {
    ClassLabel::ALL.iter().map(|c| roc_curve(labels, scores, *c)).collect()
}

/// Unweighted mean of the six one-vs-rest AUCs.
pub fn macro_auc(labels: &BTreeMap<String, ClassLabel>, scores: &BTreeMap<String, ProbVector>) -> Result<f64> {
    let curves = roc_curves(labels, scores)?;
    Ok(curves.iter().map(|c| c.auc).sum::<f64>() / curves.len() as f64)
}
