//! Curation, fusion, calibration and evaluation for a six-class cattle
//! lesion classifier ensemble.

pub mod commands;
pub mod domain;
pub mod ensemble;
pub mod error;
pub mod image;
pub mod io;
pub mod manifest;
pub mod metrics;
pub mod optim;
pub mod predictions;
pub mod report;
pub mod rng;
pub mod synth;

pub use domain::{
    argmax_class, one_hot, softmax, ClassLabel, FusionConfig, LogitVector, ModelName, OneHotTarget,
    ProbVector, Split, NUM_CLASSES,
};
pub use error::{Error, Result};
