use super::{check_grads, Optimizer};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SgdMomentumConfig {
    pub lr: f64,
    pub momentum: f64,
}

impl Default for SgdMomentumConfig {
    /// The ResNet50 / InceptionV3 settings.
    fn default() -> Self {
        SgdMomentumConfig {
            lr: 0.005,
            momentum: 0.9,
        }
    }
}

/// Heavy-ball SGD in displacement form:
/// `θ_{t+1} = θ_t - η∇L + η·μ·(θ_t - θ_{t-1})`.
///
/// Note the momentum term is scaled by `η` as well, unlike the usual
/// accumulator formulation.
#[derive(Clone, Debug)]
pub struct SgdMomentum {
    config: SgdMomentumConfig,
    prev: Option<Vec<f64>>,
}

impl SgdMomentum {
    pub fn new(config: SgdMomentumConfig) -> Self {
        SgdMomentum { config, prev: None }
    }

    /// Previous iterate; `None` before the first step (treated as `θ_{-1} = θ_0`).
    pub fn prev_params(&self) -> Option<&[f64]> {
        self.prev.as_deref()
    }
}

impl Optimizer for SgdMomentum {
    fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        check_grads(params, grads)?;
        let SgdMomentumConfig { lr, momentum } = self.config;
        let prev = match self.prev.take() {
            Some(p) if p.len() == params.len() => p,
            _ => params.to_vec(),
        };
        let current = params.to_vec();
        for ((theta, g), before) in params.iter_mut().zip(grads).zip(&prev) {
            *theta = *theta - lr * g + lr * momentum * (*theta - before);
        }
        self.prev = Some(current);
        Ok(())
    }

    fn learning_rate(&self) -> f64 {
        self.config.lr
    }

    fn set_learning_rate(&mut self, lr: f64) {
        self.config.lr = lr;
    }
}
