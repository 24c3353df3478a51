// Remove each member in turn, and calibration, and compare the results.

use herdsight::ensemble::{apply_ablation, calibrated_map, predict_ablated, AblationConfig, AlignedScores};
use herdsight::metrics::evaluate;
use herdsight::rng::Seed;
use herdsight::synth::{generate, SyntheticSpec};
use herdsight::{FusionConfig, Split};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let data = generate(&SyntheticSpec::balanced(400, [0.90, 0.93, 0.96]), Seed(42))?;
    let scores = AlignedScores::new(data.predictions_for(Split::Testing))?;
    let labels = data.manifest.labels(Split::Testing);
    let base = FusionConfig::default();

    println!("{:<22} {:>20} {:>5} {:>9} {:>9}", "configuration", "weights", "T", "accuracy", "macro AUC");
    for cfg in AblationConfig::table() {
        let effective = apply_ablation(cfg, &base)?;
        let preds = predict_ablated(&scores, &base, cfg)?;
        let r = evaluate(&labels, &calibrated_map(&preds))?.report;
        let [a, b, c] = effective.weights();
        println!(
            "{:<22} ({a:.3}, {b:.3}, {c:.3}) {:>5.2} {:>8.2}% {:>8.3}%",
            cfg.to_string(),
            effective.temperature(),
            r.accuracy * 100.0,
            r.macro_auc_roc.unwrap_or(f64::NAN) * 100.0
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
