// Enumerate the weight lattice and pick the triple with the best
// validation accuracy.

use herdsight::ensemble::{enumerate_grid, grid_search_weights, AlignedScores, GridSpec};
use herdsight::rng::Seed;
use herdsight::synth::{generate, SyntheticSpec};
use herdsight::{ClassLabel, Split};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = enumerate_grid(GridSpec::default());
    println!("{} lattice points, first {}, last {}", grid.points.len(), grid.points[0], grid.points[56]);

    let mut spec = SyntheticSpec::balanced(300, [0.88, 0.91, 0.95]);
    spec.confusion_bias = vec![(ClassLabel::FmdFoot, ClassLabel::HealthyFoot)];
    let data = generate(&spec, Seed(7))?;
    let scores = AlignedScores::new(data.predictions_for(Split::Validation))?;
    let labels = data.manifest.labels(Split::Validation);

    let result = grid_search_weights(&scores, &labels, &grid)?;
    println!("best {} with validation accuracy {:.4}", result.best, result.best_score);
    let mut ranked = result.scores.clone();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (t, s) in ranked.iter().take(5) {
        println!("  {t}  {s:.4}");
    }

    // a coarser lattice over the whole simplex
    let coarse = enumerate_grid(GridSpec::from_bounds(0.0, 1.0, 0.25)?);
    let r = grid_search_weights(&scores, &labels, &coarse)?;
    println!("coarse grid ({} points): best {}", coarse.points.len(), r.best);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
