use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::fuse::AlignedScores;
use super::grid::{WeightGrid, WeightTriple};
use crate::domain::{argmax_index, ClassLabel};
use crate::error::{Error, Result};
use crate::predictions::id_mismatch;

#[derive(Clone, Debug, PartialEq)]
pub struct GridSearchResult {
    pub best: WeightTriple,
    pub best_score: f64,
    /// Validation accuracy at every grid point, in grid order.
    pub scores: Vec<(WeightTriple, f64)>,
}

impl GridSearchResult {
    /// `w1,w2,w3,metric` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("w1,w2,w3,metric\n");
        for (t, s) in &self.scores {
            let [a, b, c] = t.weights();
            let _ = writeln!(out, "{a:.2},{b:.2},{c:.2},{s:.6}");
        }
        out
    }
}

/// Fraction of samples whose fused argmax matches the label.
pub fn fused_accuracy(scores: &AlignedScores, targets: &[usize], w: &[f64; 3]) -> f64 {
    let hits = (0..scores.len())
        .filter(|&i| argmax_index(&scores.fuse_row(i, w)) == targets[i])
        .count();
    hits as f64 / scores.len() as f64
}

/// Evaluate validation accuracy at every grid point and return the best.
/// Ties go to the lexicographically smallest triple.
pub fn grid_search_weights(
    scores: &AlignedScores,
    labels: &BTreeMap<String, ClassLabel>,
    grid: &WeightGrid,
) -> Result<GridSearchResult> {
    if scores.is_empty() {
        return Err(Error::Validation("grid search needs a non-empty validation set".into()));
    }
    if grid.points.is_empty() {
        return Err(Error::Validation("weight grid is empty".into()));
    }
    if let Some(e) = id_mismatch(scores.ids().iter().map(String::as_str), labels.keys().map(String::as_str)) {
        return Err(e);
    }
    // ids are sorted on both sides
    let targets: Vec<usize> = labels.values().map(|l| l.index()).collect();
    let evaluated: Vec<(WeightTriple, f64)> = grid
        .points
        .par_iter()
        .map(|t| (*t, fused_accuracy(scores, &targets, &t.weights())))
        .collect();
    let (best, best_score) = evaluated
        .iter()
        .copied()
        .reduce(|a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a })
        .expect("grid is non-empty");
    Ok(GridSearchResult {
        best,
        best_score,
        scores: evaluated,
    })
}
