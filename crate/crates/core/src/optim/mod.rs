//! Loss, optimizer update rules and an epoch-driven fitting loop with
//! plateau learning-rate reduction, early stopping and best-snapshot
//! checkpointing.

mod adamw;
mod fit;
mod loss;
mod sgd;

pub use adamw::{AdamW, AdamWConfig};
pub use fit::{
    central_difference, fit, history_to_csv, EpochRecord, FitResult, Objective, PlateauMonitor,
    TrainControl, Verdict, FD_STEP,
};
pub use loss::{cross_entropy, PROB_FLOOR};
pub use sgd::{SgdMomentum, SgdMomentumConfig};

use crate::error::Result;

/// A first-order update rule that owns its per-parameter state.
pub trait Optimizer {
    fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()>;
    fn learning_rate(&self) -> f64;
    fn set_learning_rate(&mut self, lr: f64);
}

fn check_grads(params: &[f64], grads: &[f64]) -> Result<()> {
    use crate::error::Error;
    if params.len() != grads.len() {
        return Err(Error::Validation(format!(
            "{} parameters but {} gradients",
            params.len(),
            grads.len()
        )));
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite(format!("gradient {i} is {}", grads[i])));
    }
    Ok(())
}
