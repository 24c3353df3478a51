// Turn a training history into SVG learning curves.

use herdsight::report::{parse_training_history, training_charts};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // the checkpoints reported for the ensemble's training run
    let csv = "epoch,acc,loss\n50,0.953,0.145\n100,0.971,0.082\n150,0.980,0.045\n200,0.982,0.038\n";
    let history = parse_training_history(csv)?;
    let work = tempfile::tempdir()?;
    for (name, svg) in training_charts(&history)? {
        let path = work.path().join(name);
        std::fs::write(&path, &svg)?;
        println!("{name}: {} bytes, {} markers", svg.len(), svg.matches(r#"class="marker""#).count());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
