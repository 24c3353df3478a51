use std::collections::BTreeMap;

use crate::domain::{validate_weights, ModelName, ProbVector, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::predictions::{id_mismatch, PredictionSet};

/// The three members' probabilities aligned on a common, sorted id list.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedScores {
    ids: Vec<String>,
    probs: [Vec<[f64; NUM_CLASSES]>; 3],
}

impl AlignedScores {
    /// Align VGG16, ResNet50 and InceptionV3 predictions (in any order).
    /// Logit rows are softmaxed.
    pub fn new(sets: [&PredictionSet; 3]) -> Result<Self> {
        let mut slots: [Option<&PredictionSet>; 3] = [None; 3];
        for s in sets {
            let slot = &mut slots[s.model().index()];
            if slot.is_some() {
                return Err(Error::Validation(format!("two prediction sets for {}", s.model())));
            }
            *slot = Some(s);
        }
        let [a, b, c] = slots.map(|s| s.expect("three distinct models fill three slots"));
        for other in [b, c] {
            if let Some(e) = id_mismatch(a.ids(), other.ids()) {
                return Err(e);
            }
        }
        let ids: Vec<String> = a.ids().map(str::to_string).collect();
        let probs = [a, b, c].map(|s| s.rows().values().map(|r| *r.to_probs().values()).collect());
        Ok(AlignedScores { ids, probs })
    }

    pub fn from_probs(ids: Vec<String>, probs: [Vec<[f64; NUM_CLASSES]>; 3]) -> Result<Self> {
        if probs.iter().any(|p| p.len() != ids.len()) {
            return Err(Error::Validation("score columns differ in length".into()));
        }
        Ok(AlignedScores { ids, probs })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn model(&self, m: ModelName) -> &[[f64; NUM_CLASSES]] {
        &self.probs[m.index()]
    }

    /// Weighted average for sample `i`.
    pub(crate) fn fuse_row(&self, i: usize, w: &[f64; 3]) -> [f64; NUM_CLASSES] {
        let mut p = [0.0; NUM_CLASSES];
        for (m, wm) in w.iter().enumerate() {
            for (pc, v) in p.iter_mut().zip(&self.probs[m][i]) {
                *pc += wm * v;
            }
        }
        p
    }

    /// `w1·P_vgg16 + w2·P_resnet50 + w3·P_inceptionv3` for every sample, in id order.
    pub fn fuse(&self, weights: [f64; 3]) -> Result<Vec<ProbVector>> {
        validate_weights(&weights)?;
        (0..self.len()).map(|i| ProbVector::new(self.fuse_row(i, &weights))).collect()
    }
}

/// Fuse three prediction sets by weighted average, keyed by id.
pub fn fuse(models: [&PredictionSet; 3], weights: [f64; 3]) -> Result<BTreeMap<String, ProbVector>> {
    let aligned = AlignedScores::new(models)?;
    let fused = aligned.fuse(weights)?;
    Ok(aligned.ids.into_iter().zip(fused).collect())
}
