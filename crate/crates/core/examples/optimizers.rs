// The two update rules and the epoch loop with plateau LR reduction and
// early stopping, fitting a small least-squares problem.

use herdsight::optim::{
    fit, history_to_csv, AdamW, AdamWConfig, Objective, Optimizer, SgdMomentum, SgdMomentumConfig, TrainControl,
};
use herdsight::rng::Seed;

/// Mean squared error of `y ≈ a·x + b`, with an analytic gradient.
struct LineFit {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Objective for LineFit {
    fn dim(&self) -> usize {
        2
    }

    fn num_samples(&self) -> usize {
        self.xs.len()
    }

    fn loss(&self, p: &[f64], batch: Option<&[usize]>) -> f64 {
        let idx: Vec<usize> = batch.map_or_else(|| (0..self.xs.len()).collect(), <[usize]>::to_vec);
        idx.iter().map(|&i| (p[0] * self.xs[i] + p[1] - self.ys[i]).powi(2)).sum::<f64>() / idx.len() as f64
    }

    fn gradient(&self, p: &[f64], batch: Option<&[usize]>) -> Vec<f64> {
        let idx: Vec<usize> = batch.map_or_else(|| (0..self.xs.len()).collect(), <[usize]>::to_vec);
        let mut g = [0.0; 2];
        for &i in &idx {
            let r = p[0] * self.xs[i] + p[1] - self.ys[i];
            g[0] += 2.0 * r * self.xs[i];
            g[1] += 2.0 * r;
        }
        g.iter().map(|v| v / idx.len() as f64).collect()
    }
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // one step of each rule from θ = 1 with gradient 2
    let mut theta = [1.0];
    AdamW::new(AdamWConfig::default(), 1).step(&mut theta, &[2.0])?;
    println!("AdamW step:        {:.6}", theta[0]);
    let mut theta = [1.0];
    SgdMomentum::new(SgdMomentumConfig::default()).step(&mut theta, &[2.0])?;
    println!("SGD momentum step: {:.6}", theta[0]);

    let mut rng = Seed(42).rng();
    let make = |n: usize, rng: &mut herdsight::rng::SeededRng| {
        let xs: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let ys = xs.iter().map(|x| 1.5 * x - 0.5 + rng.uniform(-0.05, 0.05)).collect();
        LineFit { xs, ys }
    };
    let train = make(256, &mut rng);
    let val = make(64, &mut rng);

    let control = TrainControl {
        max_epochs: 200,
        ..TrainControl::default()
    };
    for (name, mut opt) in [
        (
            "AdamW",
            Box::new(AdamW::new(
                AdamWConfig {
                    lr: 0.02,
                    weight_decay: 0.0,
                    ..AdamWConfig::default()
                },
                2,
            )) as Box<dyn Optimizer>,
        ),
        (
            "SGD momentum",
            Box::new(SgdMomentum::new(SgdMomentumConfig {
                lr: 0.05,
                momentum: 0.9,
            })),
        ),
    ] {
        let r = fit(&train, &[0.0, 0.0], opt.as_mut(), &control, |p| val.loss(p, None))?;
        println!(
            "{name:<13} a = {:.3}, b = {:.3}, best epoch {}, val loss {:.5}, {} epochs{}",
            r.best_params[0],
            r.best_params[1],
            r.best_epoch,
            r.best_val_loss,
            r.history.len(),
            if r.stopped_early { " (stopped early)" } else { "" }
        );
        let csv = history_to_csv(&r.history);
        println!("  history: {} rows, last {}", csv.lines().count() - 1, csv.lines().last().unwrap_or(""));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
