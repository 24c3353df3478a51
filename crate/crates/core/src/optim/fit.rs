use std::fmt::Write as _;

use super::Optimizer;
use crate::error::{Error, Result};
use crate::rng::Seed;

/// Step used for central finite differences.
pub const FD_STEP: f64 = 1e-5;

/// A differentiable scalar objective.
///
/// Objectives that are sums over samples report `num_samples() > 1` and
/// evaluate mini-batches when given sample indices.
pub trait Objective {
    fn dim(&self) -> usize;

    fn num_samples(&self) -> usize {
        1
    }

    /// Mean loss over `batch`, or over all samples when `batch` is `None`.
    fn loss(&self, params: &[f64], batch: Option<&[usize]>) -> f64;

    fn gradient(&self, params: &[f64], batch: Option<&[usize]>) -> Vec<f64> {
        central_difference(|p| self.loss(p, batch), params, FD_STEP)
    }
}

pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainControl {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub lr_reduce_factor: f64,
    pub lr_reduce_patience: usize,
    /// `None` disables early stopping.
    pub early_stop_patience: Option<usize>,
    /// Minimum absolute decrease of the validation loss that counts as improvement.
    pub min_delta: f64,
    pub seed: Seed,
}

impl Default for TrainControl {
    fn default() -> Self {
        TrainControl {
            max_epochs: 200,
            batch_size: 32,
            lr_reduce_factor: 0.2,
            lr_reduce_patience: 10,
            early_stop_patience: Some(20),
            min_delta: 1e-6,
            seed: Seed(42),
        }
    }
}

impl TrainControl {
    fn validate(&self) -> Result<()> {
        if !(self.lr_reduce_factor > 0.0 && self.lr_reduce_factor < 1.0) {
            return Err(Error::Validation(format!(
                "lr reduction factor must lie in (0, 1), got {}",
                self.lr_reduce_factor
            )));
        }
        if self.lr_reduce_patience == 0 || self.early_stop_patience == Some(0) || self.batch_size == 0 {
            return Err(Error::Validation("patience and batch size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Improved,
    NoImprovement { reduce_lr: bool, stop: bool },
}

/// Tracks the validation loss across epochs and decides when to reduce the
/// learning rate and when to stop.
#[derive(Clone, Debug)]
pub struct PlateauMonitor {
    best: f64,
    min_delta: f64,
    lr_patience: usize,
    stop_patience: Option<usize>,
    lr_wait: usize,
    stop_wait: usize,
}

impl PlateauMonitor {
    pub fn new(lr_patience: usize, stop_patience: Option<usize>, min_delta: f64) -> Self {
        PlateauMonitor {
            best: f64::INFINITY,
            min_delta,
            lr_patience,
            stop_patience,
            lr_wait: 0,
            stop_wait: 0,
        }
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn observe(&mut self, val_loss: f64) -> Verdict {
        if self.best.is_infinite() || val_loss < self.best - self.min_delta {
            self.best = val_loss;
            self.lr_wait = 0;
            self.stop_wait = 0;
            return Verdict::Improved;
        }
        self.lr_wait += 1;
        self.stop_wait += 1;
        let reduce_lr = self.lr_wait >= self.lr_patience;
        if reduce_lr {
            self.lr_wait = 0;
        }
        let stop = self.stop_patience.is_some_and(|p| self.stop_wait >= p);
        Verdict::NoImprovement { reduce_lr, stop }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    /// Learning rate in effect during this epoch.
    pub lr: f64,
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub best_params: Vec<f64>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub history: Vec<EpochRecord>,
    pub stopped_early: bool,
}

pub fn history_to_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,train_loss,val_loss,lr\n");
    for r in history {
        let _ = writeln!(out, "{},{:?},{:?},{:?}", r.epoch, r.train_loss, r.val_loss, r.lr);
    }
    out
}

/// Epoch loop: one pass of mini-batch updates, then a validation check that
/// drives plateau LR reduction, early stopping and best-snapshot tracking.
pub fn fit<O, V>(
    objective: &O,
    init: &[f64],
    optimizer: &mut dyn Optimizer,
    control: &TrainControl,
    mut validation: V,
) -> Result<FitResult>
where
    O: Objective + ?Sized,
    V: FnMut(&[f64]) -> f64,
{
    control.validate()?;
    if init.len() != objective.dim() {
        return Err(Error::Validation(format!(
            "objective has {} parameters, initial point has {}",
            objective.dim(),
            init.len()
        )));
    }
    let mut params = init.to_vec();
    let mut monitor = PlateauMonitor::new(
        control.lr_reduce_patience,
        control.early_stop_patience,
        control.min_delta,
    );
    let mut rng = control.seed.substream("minibatch").rng();
    let n = objective.num_samples();
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::new();
    let mut best_params = params.clone();
    let mut best_epoch = 0;
    let mut stopped_early = false;

    for epoch in 1..=control.max_epochs {
        let lr = optimizer.learning_rate();
        if n > 1 {
            crate::image::fisher_yates_in_place(&mut order, &mut rng);
            for batch in order.chunks(control.batch_size) {
                let g = objective.gradient(&params, Some(batch));
                optimizer.step(&mut params, &g).map_err(|e| at_epoch(epoch, e))?;
            }
        } else {
            let g = objective.gradient(&params, None);
            optimizer.step(&mut params, &g).map_err(|e| at_epoch(epoch, e))?;
        }
        let train_loss = objective.loss(&params, None);
        let val_loss = validation(&params);
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::NonFinite(format!(
                "epoch {epoch}: train loss {train_loss}, validation loss {val_loss}"
            )));
        }
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            lr,
        });
        match monitor.observe(val_loss) {
            Verdict::Improved => {
                best_params.clone_from(&params);
                best_epoch = epoch;
            }
            Verdict::NoImprovement { reduce_lr, stop } => {
                if stop {
                    stopped_early = true;
                    break;
                }
                if reduce_lr {
                    optimizer.set_learning_rate(lr * control.lr_reduce_factor);
                }
            }
        }
    }

    Ok(FitResult {
        best_params,
        best_epoch,
        best_val_loss: monitor.best(),
        history,
        stopped_early,
    })
}

fn at_epoch(epoch: usize, e: Error) -> Error {
    match e {
        Error::NonFinite(msg) => Error::NonFinite(format!("epoch {epoch}: {msg}")),
        other => other,
    }
}
