use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::domain::{ClassLabel, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::predictions::id_mismatch;

/// Rows are the true class, columns the predicted class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; NUM_CLASSES]; NUM_CLASSES]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn counts(&self) -> &[[u64; NUM_CLASSES]; NUM_CLASSES] {
        &self.counts
    }

    pub fn get(&self, truth: ClassLabel, predicted: ClassLabel) -> u64 {
        self.counts[truth.index()][predicted.index()]
    }

    pub fn add(&mut self, truth: ClassLabel, predicted: ClassLabel) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_CLASSES).map(|i| self.counts[i][i]).sum()
    }

    /// Per-class support (row sums).
    pub fn row_sums(&self) -> [u64; NUM_CLASSES] {
        self.counts.map(|r| r.iter().sum())
    }

    /// Per-class predicted counts (column sums).
    pub fn col_sums(&self) -> [u64; NUM_CLASSES] {
        std::array::from_fn(|j| self.counts.iter().map(|r| r[j]).sum())
    }

    /// Class names as header row and column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for c in ClassLabel::ALL {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for (c, row) in ClassLabel::ALL.iter().zip(&self.counts) {
            out.push_str(c.name());
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Tally predictions against labels over identical id sets.
pub fn confusion(
    labels: &BTreeMap<String, ClassLabel>,
    predicted: &BTreeMap<String, ClassLabel>,
) -> Result<ConfusionMatrix> {
    if let Some(e) = id_mismatch(labels.keys().map(String::as_str), predicted.keys().map(String::as_str)) {
        return Err(e);
    }
    if labels.is_empty() {
        return Err(Error::Validation("cannot build a confusion matrix from zero samples".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (t, p) in labels.values().zip(predicted.values()) {
        cm.add(*t, *p);
    }
    Ok(cm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;

    fn map(v: &[(&str, usize)]) -> BTreeMap<String, ClassLabel> {
        v.iter().map(|(id, c)| (id.to_string(), ClassLabel::ALL[*c])).collect()
    }

    #[test]
    fn all_correct_is_diagonal() {
        let m: Vec<(String, usize)> = (0..12).map(|i| (format!("s{i}"), i % 6)).collect();
        let m: Vec<(&str, usize)> = m.iter().map(|(a, b)| (a.as_str(), *b)).collect();
        let cm = confusion(&map(&m), &map(&m)).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(cm.counts()[i][j], if i == j { 2 } else { 0 });
            }
        }
    }

    #[test]
    fn single_off_diagonal_sample() {
        let cm = confusion(&map(&[("a", 0)]), &map(&[("a", 5)])).unwrap();
        assert_eq!(cm.counts()[0][5], 1);
        assert_eq!(cm.total(), 1);
    }

    #[test]
    fn random_instance_matches_independent_tally() {
        let mut rng = Seed(9).rng();
        let rows: Vec<(String, usize, usize)> =
            (0..50).map(|i| (format!("x{i}"), rng.below(6) as usize, rng.below(6) as usize)).collect();
        let labels = rows.iter().map(|r| (r.0.clone(), ClassLabel::ALL[r.1])).collect();
        let preds = rows.iter().map(|r| (r.0.clone(), ClassLabel::ALL[r.2])).collect();
        let cm = confusion(&labels, &preds).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let n = rows.iter().filter(|r| r.1 == i && r.2 == j).count() as u64;
                assert_eq!(cm.counts()[i][j], n);
            }
        }
    }

    #[test]
    fn mismatched_or_empty_inputs_fail() {
        assert!(matches!(
            confusion(&map(&[("a", 0)]), &map(&[("b", 0)])),
            Err(Error::IdMismatch { .. })
        ));
        assert!(confusion(&map(&[]), &map(&[])).is_err());
    }

    #[test]
    fn csv_layout() {
        let cm = confusion(&map(&[("a", 1)]), &map(&[("a", 2)])).unwrap();
        let csv = cm.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 7);
        assert!(lines[0].ends_with(",healthy-skin,lsd-skin"));
        assert_eq!(lines[2], "fmd-mouth,0,0,1,0,0,0");
    }
}
