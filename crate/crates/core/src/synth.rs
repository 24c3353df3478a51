//! Seeded stand-ins for the three networks' outputs, for exercising the
//! fusion and evaluation pipeline without trained models.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{scaled_softmax, ClassLabel, ModelName, ProbVector, Split, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::io::{sha256_hex, write_atomic};
use crate::manifest::{DatasetManifest, Gps, SampleRecord, Source};
use crate::metrics::ConfusionMatrix;
use crate::predictions::PredictionSet;
use crate::rng::Seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    /// Testing-split samples per class.
    pub n_per_class: BTreeMap<ClassLabel, usize>,
    /// Validation-split samples per class.
    #[serde(default)]
    pub validation_per_class: BTreeMap<ClassLabel, usize>,
    /// Probability that each model emits the true class, in weight order.
    pub model_accuracies: [f64; 3],
    /// Class pairs that are confused with each other preferentially.
    #[serde(default)]
    pub confusion_bias: Vec<(ClassLabel, ClassLabel)>,
    /// Probability that an error on a biased class lands on its partner.
    #[serde(default = "default_bias_strength")]
    pub bias_strength: f64,
    /// Logit given to the emitted class; the others get 0.
    #[serde(default = "default_sharpness")]
    pub score_sharpness: f64,
}

fn default_bias_strength() -> f64 {
    0.5
}

fn default_sharpness() -> f64 {
    4.0
}

impl SyntheticSpec {
    /// `n` testing and `n` validation samples per class.
    pub fn balanced(n: usize, model_accuracies: [f64; 3]) -> Self {
        let per_class: BTreeMap<ClassLabel, usize> = ClassLabel::ALL.iter().map(|c| (*c, n)).collect();
        SyntheticSpec {
            n_per_class: per_class.clone(),
            validation_per_class: per_class,
            model_accuracies,
            confusion_bias: Vec::new(),
            bias_strength: default_bias_strength(),
            score_sharpness: default_sharpness(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.model_accuracies.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return Err(Error::Validation(format!("model accuracy {a} outside (0, 1]")));
        }
        if !(0.0..=1.0).contains(&self.bias_strength) {
            return Err(Error::Validation(format!("bias strength {} outside [0, 1]", self.bias_strength)));
        }
        if !(self.score_sharpness.is_finite() && self.score_sharpness > 0.0) {
            return Err(Error::Validation(format!("score sharpness must be positive, got {}", self.score_sharpness)));
        }
        if let Some((a, _)) = self.confusion_bias.iter().find(|(a, b)| a == b) {
            return Err(Error::Validation(format!("confusion bias pairs {a} with itself")));
        }
        Ok(())
    }

    fn partner(&self, class: ClassLabel) -> Option<ClassLabel> {
        self.confusion_bias.iter().find_map(|&(a, b)| {
            if a == class {
                Some(b)
            } else if b == class {
                Some(a)
            } else {
                None
            }
        })
    }
}

/// Labels plus per-model, per-split predictions.
#[derive(Clone, Debug)]
pub struct SyntheticData {
    pub manifest: DatasetManifest,
    pub predictions: BTreeMap<(ModelName, Split), PredictionSet>,
}

impl SyntheticData {
    pub fn predictions_for(&self, split: Split) -> [&PredictionSet; 3] {
        ModelName::ALL.map(|m| &self.predictions[&(m, split)])
    }

    /// `labels.json` plus `{model}_{split}.jsonl` for every stored set.
    pub fn write(&self, out_dir: &Path) -> Result<Vec<String>> {
        let mut written = vec!["labels.json".to_string()];
        self.manifest.save(out_dir.join("labels.json"))?;
        for ((model, split), set) in &self.predictions {
            let name = prediction_file_name(*model, *split);
            write_atomic(&out_dir.join(&name), set.to_jsonl()?.as_bytes())?;
            written.push(name);
        }
        Ok(written)
    }
}

pub fn prediction_file_name(model: ModelName, split: Split) -> String {
    format!("{model}_{split}.jsonl")
}

fn placeholder_record(id: String, class: ClassLabel, split: Split) -> SampleRecord {
    SampleRecord {
        path: format!("synthetic/{id}.png"),
        sha256: sha256_hex(id.as_bytes()),
        id,
        class,
        split,
        synthetic: false,
        source: Source {
            farm_id: "synthetic".into(),
            gps: Gps { lat: 0.0, lon: 0.0 },
            timestamp: "1970-01-01T00:00:00Z".into(),
            breed: "unknown".into(),
            age_months: 0,
            vet_confirmed: false,
        },
    }
}

fn sample_id(split: Split, class: ClassLabel, i: usize) -> String {
    format!("syn-{split}-{class}-{i:05}")
}

/// Probabilities peaked at `emitted`: softmax of logit `sharpness` there and 0 elsewhere.
pub fn peaked_scores(emitted: ClassLabel, sharpness: f64) -> ProbVector {
    let mut z = [0.0; NUM_CLASSES];
    z[emitted.index()] = sharpness;
    ProbVector::new(scaled_softmax(&z, 1.0)).expect("softmax is a distribution")
}

/// Draw labels per class and, per model, emit the true class with the
/// model's accuracy and otherwise an error class. Every (model, split)
/// stream is its own seed substream.
pub fn generate(spec: &SyntheticSpec, seed: Seed) -> Result<SyntheticData> {
    spec.validate()?;
    let mut records = Vec::new();
    for (split, counts) in [(Split::Testing, &spec.n_per_class), (Split::Validation, &spec.validation_per_class)] {
        for (&class, &n) in counts {
            records.extend((0..n).map(|i| placeholder_record(sample_id(split, class, i), class, split)));
        }
    }
    let manifest = DatasetManifest::new(records)?;

    let mut predictions = BTreeMap::new();
    for split in [Split::Testing, Split::Validation] {
        let labels = manifest.labels(split);
        for model in ModelName::ALL {
            let mut rng = seed.substream(&format!("synth/{model}/{split}")).rng();
            let accuracy = spec.model_accuracies[model.index()];
            let rows: Vec<(String, ProbVector)> = labels
                .iter()
                .map(|(id, &truth)| {
                    let emitted = if rng.next_f64() < accuracy {
                        truth
                    } else {
                        match spec.partner(truth) {
                            Some(p) if rng.next_f64() < spec.bias_strength => p,
                            _ => {
                                // uniform over the five other classes
                                let k = rng.below(NUM_CLASSES as u64 - 1) as usize;
                                ClassLabel::ALL[if k >= truth.index() { k + 1 } else { k }]
                            }
                        }
                    };
                    (id.clone(), peaked_scores(emitted, spec.score_sharpness))
                })
                .collect();
            predictions.insert((model, split), PredictionSet::from_probs(model, rows));
        }
    }
    Ok(SyntheticData { manifest, predictions })
}

/// The testing-split confusion matrix reconstructed from the published
/// per-class recalls and supports: 2,015 of 2,052 correct.
pub fn reference_confusion() -> ConfusionMatrix {
    ConfusionMatrix::from_counts([
        [381, 1, 5, 0, 0, 1],
        [2, 379, 2, 4, 0, 1],
        [3, 0, 383, 0, 2, 0],
        [0, 3, 2, 381, 2, 0],
        [0, 0, 1, 0, 246, 3],
        [0, 0, 1, 0, 4, 245],
    ])
}

/// Testing-split predictions realizing `cm` exactly: all three models emit
/// the same class per sample, so any fusion weights and temperature
/// reproduce the matrix.
pub fn replicate_confusion(cm: &ConfusionMatrix, sharpness: f64) -> Result<SyntheticData> {
    if !(sharpness.is_finite() && sharpness > 0.0) {
        return Err(Error::Validation(format!("score sharpness must be positive, got {sharpness}")));
    }
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for truth in ClassLabel::ALL {
        let mut i = 0;
        for predicted in ClassLabel::ALL {
            for _ in 0..cm.get(truth, predicted) {
                let id = sample_id(Split::Testing, truth, i);
                i += 1;
                rows.push((id.clone(), peaked_scores(predicted, sharpness)));
                records.push(placeholder_record(id, truth, Split::Testing));
            }
        }
    }
    let manifest = DatasetManifest::new(records)?;
    let predictions = ModelName::ALL
        .iter()
        .map(|&m| ((m, Split::Testing), PredictionSet::from_probs(m, rows.iter().cloned())))
        .collect();
    Ok(SyntheticData { manifest, predictions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::argmax_class;
    use crate::metrics::confusion;
    use crate::predictions::argmax_labels;

    fn model_accuracy(data: &SyntheticData, model: ModelName, split: Split) -> f64 {
        let labels = data.manifest.labels(split);
        let preds = argmax_labels(&data.predictions[&(model, split)].probabilities());
        let hits = labels.iter().filter(|(id, l)| preds[*id] == **l).count();
        hits as f64 / labels.len() as f64
    }

    #[test]
    fn perfect_models_are_always_right() {
        let data = generate(&SyntheticSpec::balanced(20, [1.0; 3]), Seed(1)).unwrap();
        for m in ModelName::ALL {
            for s in [Split::Testing, Split::Validation] {
                assert_eq!(model_accuracy(&data, m, s), 1.0);
            }
        }
        assert_eq!(data.manifest.len(), 240);
    }

    #[test]
    fn half_accurate_models_hit_half() {
        let data = generate(&SyntheticSpec::balanced(1000, [0.5; 3]), Seed(42)).unwrap();
        for m in ModelName::ALL {
            let a = model_accuracy(&data, m, Split::Testing);
            assert!((a - 0.5).abs() <= 0.02, "{m}: {a}");
        }
    }

    #[test]
    fn bias_pairs_attract_errors() {
        let mut spec = SyntheticSpec::balanced(600, [0.5; 3]);
        spec.confusion_bias = vec![(ClassLabel::FmdFoot, ClassLabel::HealthyFoot)];
        spec.bias_strength = 1.0;
        let data = generate(&spec, Seed(5)).unwrap();
        let labels = data.manifest.labels(Split::Testing);
        let preds = argmax_labels(&data.predictions[&(ModelName::Vgg16, Split::Testing)].probabilities());
        for (id, l) in &labels {
            if *l == ClassLabel::FmdFoot {
                assert!(matches!(preds[id], ClassLabel::FmdFoot | ClassLabel::HealthyFoot));
            }
        }
    }

    #[test]
    fn same_seed_same_data() {
        let spec = SyntheticSpec::balanced(10, [0.8, 0.9, 0.7]);
        let a = generate(&spec, Seed(3)).unwrap();
        let b = generate(&spec, Seed(3)).unwrap();
        let c = generate(&spec, Seed(4)).unwrap();
        assert_eq!(a.predictions, b.predictions);
        assert_ne!(a.predictions, c.predictions);
    }

    #[test]
    fn peaked_scores_keep_argmax() {
        for c in ClassLabel::ALL {
            let p = peaked_scores(c, 4.0);
            assert_eq!(argmax_class(&p), c);
            assert!((p.get(c) - 4f64.exp() / (4f64.exp() + 5.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn replication_realizes_the_matrix() {
        let cm = reference_confusion();
        let data = replicate_confusion(&cm, 4.0).unwrap();
        let labels = data.manifest.labels(Split::Testing);
        for m in ModelName::ALL {
            let preds = argmax_labels(&data.predictions[&(m, Split::Testing)].probabilities());
            assert_eq!(confusion(&labels, &preds).unwrap(), cm);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = SyntheticSpec::balanced(1, [0.0, 0.5, 0.5]);
        assert!(generate(&spec, Seed(0)).is_err());
        spec.model_accuracies = [0.5; 3];
        spec.confusion_bias = vec![(ClassLabel::LsdSkin, ClassLabel::LsdSkin)];
        assert!(generate(&spec, Seed(0)).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec: SyntheticSpec = serde_json::from_str(
            r#"{"n_per_class":{"fmd-foot":3,"lsd-skin":2},"model_accuracies":[0.9,0.9,0.9],
                "confusion_bias":[["fmd-foot","healthy-foot"]]}"#,
        )
        .unwrap();
        assert_eq!(spec.score_sharpness, 4.0);
        assert_eq!(spec.n_per_class[&ClassLabel::LsdSkin], 2);
        let back: SyntheticSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
}
