// Score predictions that realize the reconstructed per-class test matrix
// and print the metric suite and per-class table.

use herdsight::ensemble::{calibrated_map, predict, AlignedScores};
use herdsight::metrics::evaluate;
use herdsight::synth::{replicate_confusion, reference_confusion};
use herdsight::{FusionConfig, Split};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let data = replicate_confusion(&reference_confusion(), 4.0)?;
    let scores = AlignedScores::new(data.predictions_for(Split::Testing))?;
    let preds = predict(&scores, &FusionConfig::default(), true)?;
    let eval = evaluate(&data.manifest.labels(Split::Testing), &calibrated_map(&preds))?;
    let r = &eval.report;

    println!("{} samples, {} errors", eval.confusion.total(), eval.confusion.total() - eval.confusion.trace());
    for (name, v) in [
        ("accuracy", r.accuracy),
        ("macro precision", r.macro_precision),
        ("macro recall", r.macro_recall),
        ("macro F1", r.macro_f1),
        ("Cohen's kappa", r.cohens_kappa),
        ("MCC", r.mcc),
        ("macro specificity", r.macro_specificity),
        ("G-Mean", r.g_mean),
        ("macro AUC", r.macro_auc_roc.unwrap_or(f64::NAN)),
    ] {
        println!("  {name:<18} {:.2}%", v * 100.0);
    }
    println!("  {:<14} {:>9} {:>7} {:>7} {:>11} {:>7}", "class", "precision", "recall", "F1", "specificity", "support");
    for c in &r.per_class {
        println!(
            "  {:<14} {:>8.1}% {:>6.1}% {:>6.1}% {:>10.1}% {:>7}",
            c.class.name(),
            c.precision * 100.0,
            c.recall * 100.0,
            c.f1 * 100.0,
            c.specificity * 100.0,
            c.support
        );
    }
    print!("{}", eval.confusion.to_csv());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
