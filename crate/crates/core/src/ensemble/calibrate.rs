use std::collections::BTreeMap;

use crate::domain::{scaled_softmax, ClassLabel, LogitVector, ProbVector, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::optim::{fit, AdamW, AdamWConfig, Objective, TrainControl, PROB_FLOOR};

fn check_temperature(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Validation(format!("temperature must be positive, got {t}")));
    }
    Ok(())
}

/// `softmax(z / T)`.
pub fn temperature_scale(z: &LogitVector, temperature: f64) -> Result<ProbVector> {
    check_temperature(temperature)?;
    ProbVector::new(scaled_softmax(z.values(), temperature))
}

/// Log-probabilities with a floor, used as logits for already-fused scores.
pub fn pseudo_logits(p: &ProbVector) -> [f64; NUM_CLASSES] {
    p.values().map(|v| v.max(PROB_FLOOR).ln())
}

/// Temperature-scale one fused distribution through its pseudo-logits.
pub fn calibrate(p: &ProbVector, temperature: f64) -> Result<ProbVector> {
    check_temperature(temperature)?;
    ProbVector::new(scaled_softmax(&pseudo_logits(p), temperature))
}

pub fn calibrate_fused(
    fused: &BTreeMap<String, ProbVector>,
    temperature: f64,
) -> Result<BTreeMap<String, ProbVector>> {
    fused
        .iter()
        .map(|(id, p)| Ok((id.clone(), calibrate(p, temperature)?)))
        .collect()
}

/// Search range for temperature fitting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemperatureSearch {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    /// Continue from the best grid value with gradient steps on `ln T`.
    pub refine: bool,
}

impl Default for TemperatureSearch {
    fn default() -> Self {
        TemperatureSearch {
            lo: 0.5,
            hi: 2.0,
            step: 0.05,
            refine: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TemperatureFit {
    pub temperature: f64,
    pub nll: f64,
    /// `(T, mean NLL)` for every grid value, in increasing `T`.
    pub grid: Vec<(f64, f64)>,
}

/// Mean negative log-likelihood of temperature-scaled pseudo-logits, as a
/// function of `s = ln T`.
pub struct TemperatureNll {
    logits: Vec<[f64; NUM_CLASSES]>,
    targets: Vec<usize>,
}

impl TemperatureNll {
    pub fn new(fused: &BTreeMap<String, ProbVector>, labels: &BTreeMap<String, ClassLabel>) -> Result<Self> {
        let mut logits = Vec::with_capacity(labels.len());
        let mut targets = Vec::with_capacity(labels.len());
        for (id, label) in labels {
            let p = fused
                .get(id)
                .ok_or_else(|| Error::record(id.as_str(), "id", "labelled sample has no fused prediction"))?;
            logits.push(pseudo_logits(p));
            targets.push(label.index());
        }
        if targets.is_empty() {
            return Err(Error::Validation("temperature fitting needs at least one labelled sample".into()));
        }
        Ok(TemperatureNll { logits, targets })
    }

    fn sample_nll_and_grad(&self, i: usize, t: f64) -> (f64, f64) {
        let z = &self.logits[i];
        let y = self.targets[i];
        let q = scaled_softmax(z, t);
        let expected: f64 = q.iter().zip(z).map(|(qj, zj)| qj * zj).sum();
        let nll = -q[y].max(PROB_FLOOR).ln();
        // d/dT of -ln softmax(z/T)_y
        (nll, (z[y] - expected) / (t * t))
    }

    fn indices<'a>(&'a self, batch: Option<&'a [usize]>) -> Box<dyn Iterator<Item = usize> + 'a> {
        match batch {
            Some(b) => Box::new(b.iter().copied()),
            None => Box::new(0..self.targets.len()),
        }
    }

    fn mean_nll(&self, t: f64) -> f64 {
        (0..self.targets.len()).map(|i| self.sample_nll_and_grad(i, t).0).sum::<f64>()
            / self.targets.len() as f64
    }
}

/// Parameterized by `ln T` so the temperature stays positive.
impl Objective for TemperatureNll {
    fn dim(&self) -> usize {
        1
    }

    fn num_samples(&self) -> usize {
        self.targets.len()
    }

    fn loss(&self, params: &[f64], batch: Option<&[usize]>) -> f64 {
        let t = params[0].exp();
        let (sum, n) = self
            .indices(batch)
            .fold((0.0, 0usize), |(s, n), i| (s + self.sample_nll_and_grad(i, t).0, n + 1));
        sum / n as f64
    }

    fn gradient(&self, params: &[f64], batch: Option<&[usize]>) -> Vec<f64> {
        let t = params[0].exp();
        let (sum, n) = self
            .indices(batch)
            .fold((0.0, 0usize), |(s, n), i| (s + self.sample_nll_and_grad(i, t).1, n + 1));
        // chain rule through T = exp(s)
        vec![t * sum / n as f64]
    }
}

/// Choose the temperature minimizing validation NLL over a grid, optionally
/// refined by gradient descent. Grid ties go to the smaller temperature.
pub fn fit_temperature(
    fused: &BTreeMap<String, ProbVector>,
    labels: &BTreeMap<String, ClassLabel>,
    search: &TemperatureSearch,
) -> Result<TemperatureFit> {
    check_temperature(search.lo)?;
    if !(search.step > 0.0 && search.hi >= search.lo) {
        return Err(Error::Validation(format!(
            "invalid temperature grid [{}, {}] step {}",
            search.lo, search.hi, search.step
        )));
    }
    let objective = TemperatureNll::new(fused, labels)?;
    let n_steps = ((search.hi - search.lo) / search.step + 1e-9).floor() as usize;
    let grid: Vec<(f64, f64)> = (0..=n_steps)
        .map(|k| {
            let t = search.lo + k as f64 * search.step;
            (t, objective.mean_nll(t))
        })
        .collect();
    let (mut temperature, mut nll) = grid
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    if search.refine {
        let control = TrainControl {
            max_epochs: 100,
            batch_size: objective.num_samples(),
            ..TrainControl::default()
        };
        let mut opt = AdamW::new(
            AdamWConfig {
                lr: 0.05,
                weight_decay: 0.0,
                ..AdamWConfig::default()
            },
            1,
        );
        let init = [temperature.ln()];
        let result = fit(&objective, &init, &mut opt, &control, |p| objective.loss(p, None))?;
        if result.best_val_loss < nll {
            temperature = result.best_params[0].exp();
            nll = result.best_val_loss;
        }
    }
    Ok(TemperatureFit { temperature, nll, grid })
}
