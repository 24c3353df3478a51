//! Label space, score vectors and fusion parameters shared by every stage.
//!
//! Class order is fixed to the dataset table order (`fmd-foot` first,
//! `lsd-skin` last). Every matrix, file column and report row in the crate
//! uses this order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_CLASSES: usize = 6;

/// Tolerance within which a probability vector is accepted as-is.
pub const PROB_SUM_TOL: f64 = 1e-9;
/// Vectors whose sum is off by at most this much are silently renormalized.
pub const PROB_RENORM_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassLabel {
    FmdFoot,
    FmdMouth,
    HealthyFoot,
    HealthyMouth,
    HealthySkin,
    LsdSkin,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; NUM_CLASSES] = [
        ClassLabel::FmdFoot,
        ClassLabel::FmdMouth,
        ClassLabel::HealthyFoot,
        ClassLabel::HealthyMouth,
        ClassLabel::HealthySkin,
        ClassLabel::LsdSkin,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<ClassLabel> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::FmdFoot => "fmd-foot",
            ClassLabel::FmdMouth => "fmd-mouth",
            ClassLabel::HealthyFoot => "healthy-foot",
            ClassLabel::HealthyMouth => "healthy-mouth",
            ClassLabel::HealthySkin => "healthy-skin",
            ClassLabel::LsdSkin => "lsd-skin",
        }
    }

    /// Classes for which externally generated (synthetic) images are allowed.
    pub fn allows_synthetic(self) -> bool {
        matches!(
            self,
            ClassLabel::FmdFoot | ClassLabel::FmdMouth | ClassLabel::LsdSkin
        )
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown class `{s}`")))
    }
}

impl Serialize for ClassLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ClassLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The three ensemble members, in fusion-weight order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Vgg16,
    Resnet50,
    Inceptionv3,
}

impl ModelName {
    pub const ALL: [ModelName; 3] = [ModelName::Vgg16, ModelName::Resnet50, ModelName::Inceptionv3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelName::Vgg16 => "vgg16",
            ModelName::Resnet50 => "resnet50",
            ModelName::Inceptionv3 => "inceptionv3",
        }
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown model `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Training,
    Testing,
    Validation,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Training, Split::Testing, Split::Validation];

    pub fn name(self) -> &'static str {
        match self {
            Split::Training => "training",
            Split::Testing => "testing",
            Split::Validation => "validation",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown split `{s}`")))
    }
}

/// Six finite, unnormalized class scores.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogitVector([f64; NUM_CLASSES]);

impl LogitVector {
    pub fn new(z: [f64; NUM_CLASSES]) -> Result<Self> {
        if let Some(i) = z.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "logit {i} is not finite ({})",
                z[i]
            )));
        }
        Ok(LogitVector(z))
    }

    pub fn from_slice(z: &[f64]) -> Result<Self> {
        let arr: [f64; NUM_CLASSES] = z.try_into().map_err(|_| {
            Error::Validation(format!("expected {NUM_CLASSES} logits, got {}", z.len()))
        })?;
        Self::new(arr)
    }

    pub fn values(&self) -> &[f64; NUM_CLASSES] {
        &self.0
    }
}

/// A probability distribution over the six classes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbVector([f64; NUM_CLASSES]);

impl ProbVector {
    /// Validates non-negativity and unit sum. Sums off by at most
    /// [`PROB_RENORM_TOL`] are renormalized; anything further is rejected.
    pub fn new(p: [f64; NUM_CLASSES]) -> Result<Self> {
        if let Some(i) = p.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Validation(format!(
                "probability {i} is negative or not finite ({})",
                p[i]
            )));
        }
        let sum: f64 = p.iter().sum();
        let dev = (sum - 1.0).abs();
        if dev <= PROB_SUM_TOL {
            Ok(ProbVector(p))
        } else if dev <= PROB_RENORM_TOL {
            Ok(ProbVector(p.map(|v| v / sum)))
        } else {
            Err(Error::Validation(format!(
                "probabilities sum to {sum}, not 1"
            )))
        }
    }

    pub fn from_slice(p: &[f64]) -> Result<Self> {
        let arr: [f64; NUM_CLASSES] = p.try_into().map_err(|_| {
            Error::Validation(format!(
                "expected {NUM_CLASSES} probabilities, got {}",
                p.len()
            ))
        })?;
        Self::new(arr)
    }

    pub fn uniform() -> Self {
        ProbVector([1.0 / NUM_CLASSES as f64; NUM_CLASSES])
    }

    pub fn values(&self) -> &[f64; NUM_CLASSES] {
        &self.0
    }

    pub fn get(&self, class: ClassLabel) -> f64 {
        self.0[class.index()]
    }
}

/// A one-hot target vector; stored as its hot class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OneHotTarget(ClassLabel);

impl OneHotTarget {
    pub fn class(&self) -> ClassLabel {
        self.0
    }

    pub fn values(&self) -> [f64; NUM_CLASSES] {
        let mut y = [0.0; NUM_CLASSES];
        y[self.0.index()] = 1.0;
        y
    }
}

/// Ensemble weights (VGG16, ResNet50, InceptionV3) and calibration temperature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFusionConfig")]
pub struct FusionConfig {
    weights: [f64; 3],
    temperature: f64,
}

#[derive(Deserialize)]
struct RawFusionConfig {
    weights: [f64; 3],
    temperature: f64,
}

impl TryFrom<RawFusionConfig> for FusionConfig {
    type Error = Error;

    fn try_from(raw: RawFusionConfig) -> Result<Self> {
        FusionConfig::new(raw.weights, raw.temperature)
    }
}

impl FusionConfig {
    /// Weights reported for the published ensemble.
    pub const DEFAULT_WEIGHTS: [f64; 3] = [0.30, 0.30, 0.40];
    pub const DEFAULT_TEMPERATURE: f64 = 0.8;

    pub fn new(weights: [f64; 3], temperature: f64) -> Result<Self> {
        validate_weights(&weights)?;
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::Validation(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        Ok(FusionConfig {
            weights,
            temperature,
        })
    }

    pub fn weights(&self) -> [f64; 3] {
        self.weights
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn with_temperature(self, temperature: f64) -> Result<Self> {
        FusionConfig::new(self.weights, temperature)
    }
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            weights: Self::DEFAULT_WEIGHTS,
            temperature: Self::DEFAULT_TEMPERATURE,
        }
    }
}

pub(crate) fn validate_weights(w: &[f64; 3]) -> Result<()> {
    if w.iter().any(|v| !v.is_finite() || !(0.0..=1.0).contains(v)) {
        return Err(Error::Validation(format!(
            "weights must lie in [0, 1], got {w:?}"
        )));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::Validation(format!(
            "weights must sum to 1, got {sum}"
        )));
    }
    Ok(())
}

/// Softmax of `z / temperature` with max-subtraction. Shared by [`softmax`]
/// and temperature scaling.
pub(crate) fn scaled_softmax(z: &[f64; NUM_CLASSES], temperature: f64) -> [f64; NUM_CLASSES] {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = z.map(|v| ((v - max) / temperature).exp());
    let sum: f64 = e.iter().sum();
    e.map(|v| v / sum)
}

pub fn softmax(z: &LogitVector) -> ProbVector {
    ProbVector(scaled_softmax(&z.0, 1.0))
}

/// Label of the largest entry; ties go to the lowest class index.
pub fn argmax_class(p: &ProbVector) -> ClassLabel {
    ClassLabel::ALL[argmax_index(&p.0)]
}

pub(crate) fn argmax_index(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub fn one_hot(label: ClassLabel) -> OneHotTarget {
    OneHotTarget(label)
}
