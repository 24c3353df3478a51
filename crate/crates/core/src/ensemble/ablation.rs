use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::calibrate::calibrate;
use super::fuse::AlignedScores;
use crate::domain::{argmax_class, ClassLabel, FusionConfig, ModelName, ProbVector};
use crate::error::{Error, Result};

/// One row of a component-removal study.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblationConfig {
    pub drop_model: Option<ModelName>,
    pub calibrate: bool,
}

impl AblationConfig {
    pub const FULL: AblationConfig = AblationConfig {
        drop_model: None,
        calibrate: true,
    };

    /// Full ensemble, each single-model removal, then no calibration.
    pub fn table() -> [AblationConfig; 5] {
        let drop = |m| AblationConfig {
            drop_model: Some(m),
            calibrate: true,
        };
        [
            Self::FULL,
            drop(ModelName::Vgg16),
            drop(ModelName::Resnet50),
            drop(ModelName::Inceptionv3),
            AblationConfig {
                drop_model: None,
                calibrate: false,
            },
        ]
    }
}

impl fmt::Display for AblationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.drop_model, self.calibrate) {
            (None, true) => write!(f, "full ensemble"),
            (None, false) => write!(f, "without calibration"),
            (Some(m), true) => write!(f, "without {m}"),
            (Some(m), false) => write!(f, "without {m}, uncalibrated"),
        }
    }
}

/// Zero the dropped model's weight and renormalize; without calibration the
/// temperature becomes 1.
pub fn apply_ablation(cfg: AblationConfig, base: &FusionConfig) -> Result<FusionConfig> {
    let mut w = base.weights();
    if let Some(m) = cfg.drop_model {
        let rest = 1.0 - w[m.index()];
        if rest <= 0.0 {
            return Err(Error::Validation(format!("dropping {m} leaves no weight in the ensemble")));
        }
        w[m.index()] = 0.0;
        w = w.map(|v| v / rest);
    }
    let t = if cfg.calibrate { base.temperature() } else { 1.0 };
    FusionConfig::new(w, t)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FusedPrediction {
    pub id: String,
    pub ensemble_prob: ProbVector,
    pub calibrated_prob: ProbVector,
    pub predicted: ClassLabel,
}

/// Fuse and (unless `calibrate` is false) temperature-scale every sample.
pub fn predict(scores: &AlignedScores, config: &FusionConfig, calibrate_output: bool) -> Result<Vec<FusedPrediction>> {
    let fused = scores.fuse(config.weights())?;
    scores
        .ids()
        .iter()
        .zip(fused)
        .map(|(id, p)| {
            let calibrated_prob = if calibrate_output {
                calibrate(&p, config.temperature())?
            } else {
                p
            };
            Ok(FusedPrediction {
                id: id.clone(),
                ensemble_prob: p,
                predicted: argmax_class(&calibrated_prob),
                calibrated_prob,
            })
        })
        .collect()
}

/// Run the pipeline under an ablation setting.
pub fn predict_ablated(scores: &AlignedScores, base: &FusionConfig, cfg: AblationConfig) -> Result<Vec<FusedPrediction>> {
    predict(scores, &apply_ablation(cfg, base)?, cfg.calibrate)
}

pub fn calibrated_map(preds: &[FusedPrediction]) -> BTreeMap<String, ProbVector> {
    preds.iter().map(|p| (p.id.clone(), p.calibrated_prob)).collect()
}

pub fn predicted_labels(preds: &[FusedPrediction]) -> BTreeMap<String, ClassLabel> {
    preds.iter().map(|p| (p.id.clone(), p.predicted)).collect()
}
