//! Per-model prediction files: the boundary where classifier outputs enter.
//!
//! Two encodings are accepted:
//!
//! * JSON Lines: a header `{"model":"vgg16","kind":"logits"}` followed by
//!   one `{"id":"...","scores":[s1,...,s6]}` object per line.
//! * CSV: a comment row `# model=vgg16,kind=probs`, then rows `id,s1,...,s6`
//!   (an optional `id,s1,...` header row is skipped).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{softmax, ClassLabel, LogitVector, ModelName, ProbVector, Split, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::io::{read_to_string, write_atomic};
use crate::manifest::DatasetManifest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    Logits,
    Probs,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scores {
    Logits(LogitVector),
    Probs(ProbVector),
}

impl Scores {
    pub fn values(&self) -> &[f64; NUM_CLASSES] {
        match self {
            Scores::Logits(z) => z.values(),
            Scores::Probs(p) => p.values(),
        }
    }

    pub fn to_probs(&self) -> ProbVector {
        match self {
            Scores::Logits(z) => softmax(z),
            Scores::Probs(p) => *p,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionSet {
    model: ModelName,
    kind: ScoreKind,
    rows: BTreeMap<String, Scores>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    model: ModelName,
    kind: ScoreKind,
}

#[derive(Serialize, Deserialize)]
struct Row {
    id: String,
    scores: Vec<f64>,
}

impl PredictionSet {
    pub fn new(model: ModelName, kind: ScoreKind) -> Self {
        PredictionSet {
            model,
            kind,
            rows: BTreeMap::new(),
        }
    }

    /// Build from probability rows.
    pub fn from_probs(model: ModelName, rows: impl IntoIterator<Item = (String, ProbVector)>) -> Self {
        PredictionSet {
            model,
            kind: ScoreKind::Probs,
            rows: rows.into_iter().map(|(id, p)| (id, Scores::Probs(p))).collect(),
        }
    }

    pub fn from_logits(model: ModelName, rows: impl IntoIterator<Item = (String, LogitVector)>) -> Self {
        PredictionSet {
            model,
            kind: ScoreKind::Logits,
            rows: rows.into_iter().map(|(id, z)| (id, Scores::Logits(z))).collect(),
        }
    }

    pub fn model(&self) -> ModelName {
        self.model
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    pub fn rows(&self) -> &BTreeMap<String, Scores> {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }

    /// Probabilities per id; logit rows are softmaxed.
    pub fn probabilities(&self) -> BTreeMap<String, ProbVector> {
        self.rows.iter().map(|(id, s)| (id.clone(), s.to_probs())).collect()
    }

    fn insert(&mut self, id: String, values: &[f64]) -> Result<()> {
        if values.len() != NUM_CLASSES {
            return Err(Error::Arity {
                record: id,
                found: values.len(),
            });
        }
        let scores = match self.kind {
            ScoreKind::Logits => Scores::Logits(
                LogitVector::from_slice(values).map_err(|e| Error::record(&id, "scores", e.to_string()))?,
            ),
            ScoreKind::Probs => Scores::Probs(
                ProbVector::from_slice(values).map_err(|e| Error::record(&id, "scores", e.to_string()))?,
            ),
        };
        if self.rows.insert(id.clone(), scores).is_some() {
            return Err(Error::record(id, "id", "duplicate id"));
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = serde_json::to_string(&Header {
            model: self.model,
            kind: self.kind,
        })?;
        out.push('\n');
        for (id, s) in &self.rows {
            out.push_str(&serde_json::to_string(&Row {
                id: id.clone(),
                scores: s.values().to_vec(),
            })?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn to_csv(&self) -> String {
        let kind = match self.kind {
            ScoreKind::Logits => "logits",
            ScoreKind::Probs => "probs",
        };
        let mut out = format!("# model={},kind={kind}\nid,s1,s2,s3,s4,s5,s6\n", self.model);
        for (id, s) in &self.rows {
            out.push_str(id);
            for v in s.values() {
                // `{:?}` keeps the shortest round-trip representation
                let _ = write!(out, ",{v:?}");
            }
            out.push('\n');
        }
        out
    }

    /// Saves as CSV when the extension is `.csv`, JSON Lines otherwise.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = if is_csv(path) { self.to_csv() } else { self.to_jsonl()? };
        write_atomic(path, text.as_bytes())
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Parse a prediction file without checking it against a manifest.
pub fn parse_predictions(text: &str) -> Result<PredictionSet> {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.trim_start().starts_with('#') {
        parse_csv(text)
    } else {
        parse_jsonl(text)
    }
}

fn parse_jsonl(text: &str) -> Result<PredictionSet> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::record("<header>", "model", "empty prediction file"))?;
    let header: Header = serde_json::from_str(header)
        .map_err(|e| Error::record("<header>", "model/kind", e.to_string()))?;
    let mut set = PredictionSet::new(header.model, header.kind);
    for (lineno, line) in lines {
        let row: Row = serde_json::from_str(line)
            .map_err(|e| Error::record(format!("line {}", lineno + 1), "id/scores", e.to_string()))?;
        set.insert(row.id, &row.scores)?;
    }
    Ok(set)
}

fn parse_csv(text: &str) -> Result<PredictionSet> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("").trim_start().trim_start_matches('#');
    let mut model = None;
    let mut kind = None;
    for part in header.split(',') {
        match part.split_once('=').map(|(k, v)| (k.trim(), v.trim())) {
            Some(("model", v)) => model = Some(v.parse::<ModelName>()?),
            Some(("kind", "logits")) => kind = Some(ScoreKind::Logits),
            Some(("kind", "probs")) => kind = Some(ScoreKind::Probs),
            Some(("kind", v)) => {
                return Err(Error::record("<header>", "kind", format!("unknown kind `{v}`")))
            }
            _ => {}
        }
    }
    let model = model.ok_or_else(|| Error::record("<header>", "model", "missing field"))?;
    let kind = kind.ok_or_else(|| Error::record("<header>", "kind", "missing field"))?;
    let mut set = PredictionSet::new(model, kind);

    let body: String = lines.collect::<Vec<_>>().join("\n");
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::record(format!("row {}", i + 1), "csv", e.to_string()))?;
        let Some(id) = rec.get(0) else { continue };
        if id.is_empty() || (i == 0 && id == "id") {
            continue;
        }
        let values = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::record(id, "scores", format!("`{v}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        set.insert(id.to_string(), &values)?;
    }
    Ok(set)
}

/// Load one model's predictions and check that they cover exactly the ids of
/// `split` in the manifest.
pub fn load_predictions(path: impl AsRef<Path>, m: &DatasetManifest, split: Split) -> Result<PredictionSet> {
    let path = path.as_ref();
    let set = parse_predictions(&read_to_string(path)?)?;
    check_against_split(&set, m, split)?;
    Ok(set)
}

pub fn check_against_split(set: &PredictionSet, m: &DatasetManifest, split: Split) -> Result<()> {
    let labels = m.labels(split);
    if let Some(id) = set.ids().find(|id| !labels.contains_key(*id)) {
        return Err(Error::record(id, "id", format!("not in the {split} split of the manifest")));
    }
    if let Some(id) = labels.keys().find(|id| !set.rows.contains_key(*id)) {
        return Err(Error::record(id.as_str(), "id", format!("missing from {} predictions", set.model)));
    }
    Ok(())
}

/// Symmetric difference of two id sets, used in alignment errors.
pub(crate) fn id_mismatch<'a>(
    left: impl IntoIterator<Item = &'a str>,
    right: impl IntoIterator<Item = &'a str>,
) -> Option<Error> {
    let l: BTreeSet<&str> = left.into_iter().collect();
    let r: BTreeSet<&str> = right.into_iter().collect();
    if l == r {
        return None;
    }
    Some(Error::IdMismatch {
        only_left: l.difference(&r).map(|s| s.to_string()).collect(),
        only_right: r.difference(&l).map(|s| s.to_string()).collect(),
    })
}

/// Convenience: predicted class per id.
pub fn argmax_labels(probs: &BTreeMap<String, ProbVector>) -> BTreeMap<String, ClassLabel> {
    probs
        .iter()
        .map(|(id, p)| (id.clone(), crate::domain::argmax_class(p)))
        .collect()
}
