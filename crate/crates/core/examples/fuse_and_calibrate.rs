// Fuse three models' probabilities with the published weights, sharpen
// them by temperature scaling, and re-fit the temperature on labels.

use herdsight::domain::LogitVector;
use herdsight::ensemble::{calibrate, calibrate_fused, fit_temperature, fuse, temperature_scale, TemperatureSearch};
use herdsight::predictions::PredictionSet;
use herdsight::synth::{generate, SyntheticSpec};
use herdsight::rng::Seed;
use herdsight::{argmax_class, FusionConfig, ModelName, ProbVector, Split};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let z = LogitVector::new([2.0, 1.0, 0.0, 0.0, 0.0, 0.0])?;
    println!("softmax(z / 0.8) = {:.4?}", temperature_scale(&z, 0.8)?.values());

    let p = |v: [f64; 6]| ProbVector::new(v);
    let vgg = PredictionSet::from_probs(ModelName::Vgg16, [("cow-17".to_string(), p([0.55, 0.25, 0.05, 0.05, 0.05, 0.05])?)]);
    let resnet = PredictionSet::from_probs(ModelName::Resnet50, [("cow-17".to_string(), p([0.30, 0.50, 0.05, 0.05, 0.05, 0.05])?)]);
    let inception = PredictionSet::from_probs(ModelName::Inceptionv3, [("cow-17".to_string(), p([0.60, 0.20, 0.05, 0.05, 0.05, 0.05])?)]);

    let config = FusionConfig::default();
    let fused = fuse([&vgg, &resnet, &inception], config.weights())?;
    let calibrated = calibrate_fused(&fused, config.temperature())?;
    println!("fused      {:.4?}", fused["cow-17"].values());
    println!("calibrated {:.4?} -> {}", calibrated["cow-17"].values(), argmax_class(&calibrated["cow-17"]));

    // re-fit T on a labelled validation split of stand-in predictions
    let data = generate(&SyntheticSpec::balanced(200, [0.85, 0.9, 0.92]), Seed(42))?;
    let [a, b, c] = data.predictions_for(Split::Validation);
    let fused = fuse([a, b, c], config.weights())?;
    let labels = data.manifest.labels(Split::Validation);
    let search = TemperatureSearch {
        refine: true,
        ..TemperatureSearch::default()
    };
    let fitted = fit_temperature(&fused, &labels, &search)?;
    println!("fitted temperature {:.3} (validation NLL {:.4})", fitted.temperature, fitted.nll);
    let sample = fused.values().next().expect("non-empty split");
    println!("first sample at fitted T: {:.4?}", calibrate(sample, fitted.temperature)?.values());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
