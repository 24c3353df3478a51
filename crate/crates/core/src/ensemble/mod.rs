//! Weighted-average fusion of the three members, weight search on a
//! simplex lattice, temperature calibration and component ablation.

mod ablation;
mod calibrate;
mod fuse;
mod grid;
mod search;

pub use ablation::{
    apply_ablation, calibrated_map, predict, predict_ablated, predicted_labels, AblationConfig, FusedPrediction,
};
pub use calibrate::{
    calibrate, calibrate_fused, fit_temperature, pseudo_logits, temperature_scale, TemperatureFit, TemperatureNll,
    TemperatureSearch,
};
pub use fuse::{fuse, AlignedScores};
pub use grid::{enumerate_grid, GridSpec, WeightGrid, WeightTriple};
pub use search::{fused_accuracy, grid_search_weights, GridSearchResult};
