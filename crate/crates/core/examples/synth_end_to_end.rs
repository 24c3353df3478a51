// The batch commands end to end: stand-in predictions, weight search on
// the validation split, then evaluation on the test split.

use std::path::Path;

use herdsight::commands::{
    cmd_evaluate, cmd_gridsearch, cmd_synth, FuseCommand, GridSearchCommand, PredictionInputs, SynthCommand,
};
use herdsight::ensemble::GridSpec;
use herdsight::{ModelName, Split};

fn inputs(dir: &Path, split: Split) -> PredictionInputs {
    PredictionInputs {
        manifest: dir.join("labels.json"),
        preds: ModelName::ALL.iter().map(|m| (*m, dir.join(format!("{m}_{split}.jsonl")))).collect(),
        split,
    }
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let work = tempfile::tempdir()?;
    let syn = work.path().join("synth");
    cmd_synth(&SynthCommand {
        spec: None,
        replicate_reference: false,
        out: syn.clone(),
        seed: 42,
    })?;
    cmd_gridsearch(&GridSearchCommand {
        inputs: inputs(&syn, Split::Validation),
        grid: GridSpec::default(),
        fusion_config: None,
        out: work.path().join("grid"),
    })?;
    println!("winner: {}", std::fs::read_to_string(work.path().join("grid/fusion-config.json"))?.trim());
    cmd_evaluate(&FuseCommand {
        inputs: inputs(&syn, Split::Testing),
        fusion_config: Some(work.path().join("grid/fusion-config.json")),
        out: work.path().join("eval"),
    })?;
    print!("{}", std::fs::read_to_string(work.path().join("eval/members.csv"))?);
    let mut files: Vec<String> = std::fs::read_dir(work.path().join("eval"))?
        .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect::<Result<_, _>>()?;
    files.sort();
    println!("artifacts: {}", files.join(", "));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
