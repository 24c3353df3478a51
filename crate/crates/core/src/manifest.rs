//! Dataset manifest: provenance-tracked sample records, split accounting and
//! digest-based deduplication.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::domain::{ClassLabel, Split, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::io::{read_to_string, write_atomic};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gps {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub farm_id: String,
    pub gps: Gps,
    pub timestamp: String,
    pub breed: String,
    pub age_months: u32,
    pub vet_confirmed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub path: String,
    pub class: ClassLabel,
    pub split: Split,
    pub synthetic: bool,
    pub sha256: String,
    pub source: Source,
}

const RECORD_FIELDS: &[&str] = &["id", "path", "class", "split", "synthetic", "sha256", "source"];
const SOURCE_FIELDS: &[&str] = &["farm_id", "gps", "timestamp", "breed", "age_months", "vet_confirmed"];

/// Sample tallies indexed by (class, split, synthetic).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CountTable([[[usize; 2]; 3]; NUM_CLASSES]);

fn split_slot(split: Split) -> usize {
    match split {
        Split::Training => 0,
        Split::Testing => 1,
        Split::Validation => 2,
    }
}

impl CountTable {
    pub fn get(&self, class: ClassLabel, split: Split, synthetic: bool) -> usize {
        self.0[class.index()][split_slot(split)][synthetic as usize]
    }

    pub fn set(&mut self, class: ClassLabel, split: Split, synthetic: bool, n: usize) {
        self.0[class.index()][split_slot(split)][synthetic as usize] = n;
    }

    fn bump(&mut self, class: ClassLabel, split: Split, synthetic: bool) {
        self.0[class.index()][split_slot(split)][synthetic as usize] += 1;
    }

    pub fn total(&self) -> usize {
        self.0.iter().flatten().flatten().sum()
    }

    pub fn class_total(&self, class: ClassLabel) -> usize {
        self.0[class.index()].iter().flatten().sum()
    }

    pub fn split_total(&self, split: Split) -> usize {
        self.0.iter().map(|c| c[split_slot(split)].iter().sum::<usize>()).sum()
    }

    pub fn tally<'a>(samples: impl IntoIterator<Item = &'a SampleRecord>) -> Self {
        let mut t = CountTable::default();
        for s in samples {
            t.bump(s.class, s.split, s.synthetic);
        }
        t
    }

    /// The published dataset composition: real and synthetic training images,
    /// testing and validation images per class.
    pub fn table1() -> Self {
        // (real training, synthetic training, testing, validation)
        const ROWS: [(usize, usize, usize, usize); NUM_CLASSES] = [
            (1050, 500, 388, 50),
            (1050, 500, 388, 50),
            (1550, 0, 388, 50),
            (1550, 0, 388, 50),
            (1000, 0, 250, 32),
            (500, 500, 250, 32),
        ];
        let mut t = CountTable::default();
        for (class, (real, synth, test, val)) in ClassLabel::ALL.into_iter().zip(ROWS) {
            t.set(class, Split::Training, false, real);
            t.set(class, Split::Training, true, synth);
            t.set(class, Split::Testing, false, test);
            t.set(class, Split::Validation, false, val);
        }
        t
    }

    pub fn cells(&self) -> impl Iterator<Item = (ClassLabel, Split, bool, usize)> + '_ {
        ClassLabel::ALL.into_iter().flat_map(move |c| {
            Split::ALL.into_iter().flat_map(move |s| {
                [false, true]
                    .into_iter()
                    .map(move |syn| (c, s, syn, self.get(c, s, syn)))
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetManifest {
    samples: Vec<SampleRecord>,
    counts: CountTable,
}

impl DatasetManifest {
    pub fn new(samples: Vec<SampleRecord>) -> Result<Self> {
        let mut ids = HashSet::new();
        let mut paths = HashSet::new();
        for s in &samples {
            validate_record(s)?;
            if !ids.insert(s.id.as_str()) {
                return Err(Error::record(&s.id, "id", "duplicate id"));
            }
            if !paths.insert(s.path.as_str()) {
                return Err(Error::record(&s.id, "path", format!("duplicate path `{}`", s.path)));
            }
        }
        let counts = CountTable::tally(&samples);
        Ok(DatasetManifest { samples, counts })
    }

    pub fn empty() -> Self {
        DatasetManifest {
            samples: Vec::new(),
            counts: CountTable::default(),
        }
    }

    pub fn samples(&self) -> &[SampleRecord] {
        &self.samples
    }

    pub fn counts(&self) -> &CountTable {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&SampleRecord> {
        self.samples.iter().find(|s| s.id == id)
    }

    /// Ground-truth labels of one split, keyed by sample id.
    pub fn labels(&self, split: Split) -> BTreeMap<String, ClassLabel> {
        self.samples
            .iter()
            .filter(|s| s.split == split)
            .map(|s| (s.id.clone(), s.class))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Out<'a> {
            samples: &'a [SampleRecord],
        }
        Ok(serde_json::to_string_pretty(&Out {
            samples: &self.samples,
        })?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn into_samples(self) -> Vec<SampleRecord> {
        self.samples
    }
}

fn validate_record(s: &SampleRecord) -> Result<()> {
    if s.id.is_empty() {
        return Err(Error::record("<empty>", "id", "empty id"));
    }
    if s.path.is_empty() || Path::new(&s.path).is_absolute() {
        return Err(Error::record(&s.id, "path", "must be a non-empty relative path"));
    }
    if s.synthetic && !s.class.allows_synthetic() {
        return Err(Error::record(
            &s.id,
            "synthetic",
            format!("synthetic samples are not allowed for class {}", s.class),
        ));
    }
    if s.sha256.len() != 64 || !s.sha256.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
        return Err(Error::record(&s.id, "sha256", "expected 64 lowercase hex characters"));
    }
    let gps = s.source.gps;
    if !(-90.0..=90.0).contains(&gps.lat) {
        return Err(Error::record(&s.id, "source.gps.lat", format!("{} outside [-90, 90]", gps.lat)));
    }
    if !(-180.0..=180.0).contains(&gps.lon) {
        return Err(Error::record(&s.id, "source.gps.lon", format!("{} outside [-180, 180]", gps.lon)));
    }
    if !is_iso8601(&s.source.timestamp) {
        return Err(Error::record(
            &s.id,
            "source.timestamp",
            format!("`{}` is not an ISO-8601 timestamp", s.source.timestamp),
        ));
    }
    Ok(())
}

/// Syntactic ISO-8601 check; offsets are accepted but not interpreted.
fn is_iso8601(ts: &str) -> bool {
    use chrono::{DateTime, NaiveDate, NaiveDateTime};
    DateTime::parse_from_rfc3339(ts).is_ok()
        || NaiveDateTime::parse_from_str(ts, "%Y-%m-%dT%H:%M:%S%.f").is_ok()
        || NaiveDateTime::parse_from_str(ts, "%Y-%m-%dT%H:%M").is_ok()
        || NaiveDate::parse_from_str(ts, "%Y-%m-%d").is_ok()
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    parse_manifest(&text).map_err(|e| match e {
        Error::Json(j) => Error::input(path, format!("malformed JSON: {j}")),
        other => other,
    })
}

pub fn parse_manifest(text: &str) -> Result<DatasetManifest> {
    let root: Value = serde_json::from_str(text)?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::record("<manifest>", "samples", "top level must be an object"))?;
    let samples = obj
        .get("samples")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::record("<manifest>", "samples", "missing or not an array"))?;
    let records = samples
        .iter()
        .enumerate()
        .map(|(i, v)| parse_record(i, v))
        .collect::<Result<Vec<_>>>()?;
    DatasetManifest::new(records)
}

fn parse_record(index: usize, v: &Value) -> Result<SampleRecord> {
    let fallback = format!("#{index}");
    let obj = v
        .as_object()
        .ok_or_else(|| Error::record(&fallback, "<record>", "not an object"))?;
    let id = match obj.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::record(&fallback, "id", "not a string")),
        None => return Err(Error::record(&fallback, "id", "missing field")),
    };
    warn_unknown(&id, "", obj, RECORD_FIELDS);

    let path = req_str(&id, obj, "path")?;
    let class = req_str(&id, obj, "class")?
        .parse::<ClassLabel>()
        .map_err(|e| Error::record(&id, "class", e.to_string()))?;
    let split = req_str(&id, obj, "split")?
        .parse::<Split>()
        .map_err(|e| Error::record(&id, "split", e.to_string()))?;
    let synthetic = req_bool(&id, obj, "synthetic", "synthetic")?;
    let sha256 = req_str(&id, obj, "sha256")?;

    let src = obj
        .get("source")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::record(&id, "source", "missing or not an object"))?;
    warn_unknown(&id, "source.", src, SOURCE_FIELDS);
    let gps = src
        .get("gps")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::record(&id, "source.gps", "missing or not an object"))?;
    let lat = gps
        .get("lat")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::record(&id, "source.gps.lat", "missing or not a number"))?;
    let lon = gps
        .get("lon")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::record(&id, "source.gps.lon", "missing or not a number"))?;
    let age_months = src
        .get("age_months")
        .and_then(Value::as_u64)
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| {
            Error::record(&id, "source.age_months", "missing or not a non-negative integer")
        })?;
    let source = Source {
        farm_id: req_str_in(&id, src, "farm_id", "source.farm_id")?,
        gps: Gps { lat, lon },
        timestamp: req_str_in(&id, src, "timestamp", "source.timestamp")?,
        breed: req_str_in(&id, src, "breed", "source.breed")?,
        age_months,
        vet_confirmed: req_bool(&id, src, "vet_confirmed", "source.vet_confirmed")?,
    };
    Ok(SampleRecord {
        id,
        path,
        class,
        split,
        synthetic,
        sha256,
        source,
    })
}

fn warn_unknown(id: &str, prefix: &str, obj: &Map<String, Value>, known: &[&str]) {
    for key in obj.keys() {
        if !known.contains(&key.as_str()) {
            log::warn!("record `{id}`: ignoring unknown field `{prefix}{key}`");
        }
    }
}

fn req_str(id: &str, obj: &Map<String, Value>, field: &str) -> Result<String> {
    req_str_in(id, obj, field, field)
}

fn req_str_in(id: &str, obj: &Map<String, Value>, key: &str, field: &str) -> Result<String> {
    match obj.get(key) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(Error::record(id, field, "not a string")),
        None => Err(Error::record(id, field, "missing field")),
    }
}

fn req_bool(id: &str, obj: &Map<String, Value>, key: &str, field: &str) -> Result<bool> {
    match obj.get(key) {
        Some(Value::Bool(b)) => Ok(*b),
        Some(_) => Err(Error::record(id, field, "not a boolean")),
        None => Err(Error::record(id, field, "missing field")),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellDiff {
    pub class: ClassLabel,
    pub split: Split,
    pub synthetic: bool,
    pub expected: usize,
    pub actual: usize,
    /// `actual - expected`.
    pub diff: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AccountingReport {
    pub passed: bool,
    pub mismatches: Vec<CellDiff>,
}

impl fmt::Display for AccountingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed {
            return writeln!(f, "split accounting: ok");
        }
        writeln!(f, "split accounting: {} mismatched cell(s)", self.mismatches.len())?;
        for m in &self.mismatches {
            writeln!(
                f,
                "  {:<14} {:<10} {:<9} expected {:>5} actual {:>5} diff {:+}",
                m.class.name(),
                m.split.name(),
                if m.synthetic { "synthetic" } else { "real" },
                m.expected,
                m.actual,
                m.diff
            )?;
        }
        Ok(())
    }
}

pub fn verify_split_accounting(m: &DatasetManifest, expected: &CountTable) -> AccountingReport {
    let mismatches: Vec<CellDiff> = expected
        .cells()
        .filter_map(|(class, split, synthetic, exp)| {
            let actual = m.counts.get(class, split, synthetic);
            (actual != exp).then(|| CellDiff {
                class,
                split,
                synthetic,
                expected: exp,
                actual,
                diff: actual as i64 - exp as i64,
            })
        })
        .collect();
    AccountingReport {
        passed: mismatches.is_empty(),
        mismatches,
    }
}

/// Keep the first record of every SHA-256 digest, in manifest order.
pub fn dedup_by_digest(m: &DatasetManifest) -> (DatasetManifest, Vec<String>) {
    let mut seen = HashSet::new();
    let mut kept = Vec::with_capacity(m.samples.len());
    let mut removed = Vec::new();
    for s in &m.samples {
        if seen.insert(s.sha256.as_str()) {
            kept.push(s.clone());
        } else {
            removed.push(s.id.clone());
        }
    }
    let counts = CountTable::tally(&kept);
    (
        DatasetManifest {
            samples: kept,
            counts,
        },
        removed,
    )
}
