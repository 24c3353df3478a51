//! The batch commands behind the `herdsight` binary. Each writes its
//! artifacts atomically into an output directory together with a
//! `run-manifest.json` recording the command, its configuration, the seed
//! and the SHA-256 of every input.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::domain::{ClassLabel, FusionConfig, ModelName, Split};
use crate::ensemble::{
    calibrated_map, enumerate_grid, fit_temperature, grid_search_weights, predict, predict_ablated, AblationConfig,
    AlignedScores, FusedPrediction, GridSpec, TemperatureSearch,
};
use crate::error::{Error, Result};
use crate::image::{run_prep_pipeline, AugmentSpec, PrepOptions};
use crate::io::{read_to_string, sha256_file, write_atomic};
use crate::manifest::{dedup_by_digest, load_manifest, verify_split_accounting, CountTable};
use crate::metrics::{evaluate, Evaluation};
use crate::predictions::load_predictions;
use crate::report::{confusion_heatmap, parse_training_history, roc_plot, training_charts};
use crate::rng::Seed;
use crate::synth::{generate, replicate_confusion, reference_confusion, SyntheticSpec};

pub const DEFAULT_SEED: u64 = 42;

/// How a command ended when it did not hit an input error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// A requested check ran and failed; the payload explains why.
    CheckFailed(String),
}

/// 0 on success, 1 on input error, 2 on a failed check.
pub fn exit_code(result: &Result<Outcome>) -> u8 {
    match result {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::CheckFailed(_)) => 2,
        Err(_) => 1,
    }
}

#[derive(Serialize)]
struct RunManifest<'a, C: Serialize> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a C,
    inputs: BTreeMap<String, String>,
    outputs: &'a [String],
}

/// Collects artifact names while writing them.
struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    fn new(dir: &Path) -> Self {
        Artifacts {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        }
    }

    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        write_atomic(&self.dir.join(name), bytes.as_ref())?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn finish<C: Serialize>(mut self, command: &str, seed: u64, config: &C, inputs: &[&Path]) -> Result<()> {
        let inputs = inputs
            .iter()
            .map(|p| Ok((p.display().to_string(), sha256_file(p)?)))
            .collect::<Result<_>>()?;
        self.written.sort();
        let manifest = RunManifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config,
            inputs,
            outputs: &self.written,
        };
        let mut json = serde_json::to_string_pretty(&manifest)?;
        json.push('\n');
        write_atomic(&self.dir.join("run-manifest.json"), json.as_bytes())
    }
}

fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

/// Manifest plus one prediction file per model, all for one split.
#[derive(Clone, Debug, Serialize)]
pub struct PredictionInputs {
    pub manifest: PathBuf,
    pub preds: BTreeMap<ModelName, PathBuf>,
    pub split: Split,
}

impl PredictionInputs {
    fn paths(&self) -> Vec<&Path> {
        std::iter::once(self.manifest.as_path())
            .chain(self.preds.values().map(PathBuf::as_path))
            .collect()
    }

    fn load(&self) -> Result<(AlignedScores, BTreeMap<String, ClassLabel>)> {
        let m = load_manifest(&self.manifest)?;
        let mut sets = Vec::with_capacity(3);
        for model in ModelName::ALL {
            let path = self.preds.get(&model).ok_or_else(|| {
                Error::input(&self.manifest, format!("no predictions given for {model} (use --pred {model}=PATH)"))
            })?;
            let set = load_predictions(path, &m, self.split)?;
            if set.model() != model {
                return Err(Error::input(path, format!("file holds {} predictions, expected {model}", set.model())));
            }
            sets.push(set);
        }
        let labels = m.labels(self.split);
        if labels.is_empty() {
            return Err(Error::input(&self.manifest, format!("the {} split is empty", self.split)));
        }
        let scores = AlignedScores::new([&sets[0], &sets[1], &sets[2]])?;
        Ok((scores, labels))
    }
}

fn load_fusion_config(path: Option<&Path>) -> Result<FusionConfig> {
    match path {
        None => Ok(FusionConfig::default()),
        Some(p) => serde_json::from_str(&read_to_string(p)?).map_err(|e| Error::input(p, e.to_string())),
    }
}

fn fused_jsonl(preds: &[FusedPrediction]) -> Result<String> {
    let mut out = String::new();
    for p in preds {
        out.push_str(&serde_json::to_string(p)?);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct PrepCommand {
    pub manifest: PathBuf,
    /// JSON augmentation ranges; the full published ranges when absent.
    pub augment: Option<PathBuf>,
    #[serde(skip)]
    pub out: PathBuf,
    pub seed: u64,
    pub size: u32,
    pub strict: bool,
    pub check_table1: bool,
}

/// Resize, quality-gate, shuffle and augment every manifest image.
pub fn cmd_prep(cmd: &PrepCommand) -> Result<Outcome> {
    let m = load_manifest(&cmd.manifest)?;
    let mut art = Artifacts::new(&cmd.out);
    let mut inputs = vec![cmd.manifest.as_path()];
    if cmd.check_table1 {
        let report = verify_split_accounting(&m, &CountTable::table1());
        if !report.passed {
            let text = report.to_string();
            art.write("table1_check.txt", &text)?;
            art.finish("prep", cmd.seed, cmd, &inputs)?;
            return Ok(Outcome::CheckFailed(text));
        }
    }
    let spec = match &cmd.augment {
        Some(p) => {
            inputs.push(p);
            serde_json::from_str(&read_to_string(p)?).map_err(|e| Error::input(p, e.to_string()))?
        }
        None => AugmentSpec::default(),
    };
    let opts = PrepOptions {
        size: cmd.size,
        input_root: cmd.manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
        ..PrepOptions::default()
    };
    let outcome = run_prep_pipeline(&m, &spec, Seed(cmd.seed), &cmd.out, &opts)?;
    for r in outcome.manifest.samples() {
        art.written.push(r.path.clone());
        art.written.push(r.path.replace("images/", "tensors/").replace(".png", ".hf01"));
    }
    art.write("manifest.json", outcome.manifest.to_json()?)?;
    art.write("prep_report.json", json_bytes(&outcome.report)?)?;
    art.finish("prep", cmd.seed, cmd, &inputs)?;
    for f in &outcome.report.failed {
        log::warn!("{}: {}", f.id, f.reason);
    }
    if cmd.strict && !outcome.report.failed.is_empty() {
        return Err(Error::Validation(format!(
            "{} image(s) failed to load (see prep_report.json)",
            outcome.report.failed.len()
        )));
    }
    Ok(Outcome::Success)
}

#[derive(Clone, Debug, Serialize)]
pub struct DedupCommand {
    pub manifest: PathBuf,
    #[serde(skip)]
    pub out: PathBuf,
}

/// Drop records whose image digest was already seen.
pub fn cmd_dedup(cmd: &DedupCommand) -> Result<Outcome> {
    let m = load_manifest(&cmd.manifest)?;
    let (kept, removed) = dedup_by_digest(&m);
    let mut art = Artifacts::new(&cmd.out);
    art.write("manifest.json", kept.to_json()?)?;
    art.write("dedup.json", json_bytes(&serde_json::json!({ "kept": kept.len(), "removed": removed }))?)?;
    art.finish("dedup", DEFAULT_SEED, cmd, &[&cmd.manifest])?;
    Ok(Outcome::Success)
}

#[derive(Clone, Debug, Serialize)]
pub struct SynthCommand {
    /// JSON [`SyntheticSpec`]; 1,000 samples per class and split with
    /// accuracies 0.94/0.96/0.98 when absent.
    pub spec: Option<PathBuf>,
    /// Emit testing predictions realizing the reconstructed per-class
    /// evaluation matrix instead of sampling.
    pub replicate_reference: bool,
    #[serde(skip)]
    pub out: PathBuf,
    pub seed: u64,
}

pub fn default_synthetic_spec() -> SyntheticSpec {
    SyntheticSpec::balanced(1000, [0.94, 0.96, 0.98])
}

pub fn cmd_synth(cmd: &SynthCommand) -> Result<Outcome> {
    let mut inputs = Vec::new();
    let spec = match &cmd.spec {
        Some(p) => {
            inputs.push(p.as_path());
            serde_json::from_str(&read_to_string(p)?).map_err(|e| Error::input(p, e.to_string()))?
        }
        None => default_synthetic_spec(),
    };
    let data = if cmd.replicate_reference {
        replicate_confusion(&reference_confusion(), spec.score_sharpness)?
    } else {
        generate(&spec, Seed(cmd.seed))?
    };
    let mut art = Artifacts::new(&cmd.out);
    art.written = data.write(&cmd.out)?;
    art.finish("synth", cmd.seed, &(cmd, &spec), &inputs)?;
    Ok(Outcome::Success)
}

#[derive(Clone, Debug, Serialize)]
pub struct FuseCommand {
    pub inputs: PredictionInputs,
    pub fusion_config: Option<PathBuf>,
    #[serde(skip)]
    pub out: PathBuf,
}

impl FuseCommand {
    fn input_paths(&self) -> Vec<&Path> {
        let mut v = self.inputs.paths();
        v.extend(self.fusion_config.as_deref());
        v
    }
}

/// Weighted-average fusion without calibration; writes `fused.jsonl`.
pub fn cmd_fuse(cmd: &FuseCommand) -> Result<Outcome> {
    let config = load_fusion_config(cmd.fusion_config.as_deref())?;
    let (scores, _) = cmd.inputs.load()?;
    let preds = predict(&scores, &config, false)?;
    let mut art = Artifacts::new(&cmd.out);
    art.write("fused.jsonl", fused_jsonl(&preds)?)?;
    art.finish("fuse", DEFAULT_SEED, &(cmd, config), &cmd.input_paths())?;
    Ok(Outcome::Success)
}

#[derive(Clone, Debug, Serialize)]
pub struct CalibrateCommand {
    pub fuse: FuseCommand,
    /// Re-fit the temperature on the labels of the input split.
    pub fit_temperature: bool,
}

/// Fusion followed by temperature scaling; writes `calibrated.jsonl` and
/// the effective `fusion-config.json`.
pub fn cmd_calibrate(cmd: &CalibrateCommand) -> Result<Outcome> {
    let mut config = load_fusion_config(cmd.fuse.fusion_config.as_deref())?;
    let (scores, labels) = cmd.fuse.inputs.load()?;
    let mut art = Artifacts::new(&cmd.fuse.out);
    if cmd.fit_temperature {
        let fused = calibrated_map(&predict(&scores, &config, false)?);
        let fit = fit_temperature(&fused, &labels, &TemperatureSearch::default())?;
        let mut csv = String::from("temperature,nll\n");
        for (t, nll) in &fit.grid {
            let _ = writeln!(csv, "{t:.2},{nll:.6}");
        }
        art.write("temperature_fit.csv", csv)?;
        config = config.with_temperature(fit.temperature)?;
    }
    let preds = predict(&scores, &config, true)?;
    art.write("calibrated.jsonl", fused_jsonl(&preds)?)?;
    art.write("fusion-config.json", json_bytes(&config)?)?;
    art.finish("calibrate", DEFAULT_SEED, &(cmd, config), &cmd.fuse.input_paths())?;
    Ok(Outcome::Success)
}

#[derive(Clone, Debug, Serialize)]
pub struct GridSearchCommand {
    /// Normally the validation split.
    pub inputs: PredictionInputs,
    pub grid: GridSpec,
    /// Supplies the temperature carried into the winning configuration.
    pub fusion_config: Option<PathBuf>,
    #[serde(skip)]
    pub out: PathBuf,
}

/// Score every lattice weight triple by validation accuracy; writes
/// `grid.csv` and the winning `fusion-config.json`.
pub fn cmd_gridsearch(cmd: &GridSearchCommand) -> Result<Outcome> {
    let base = load_fusion_config(cmd.fusion_config.as_deref())?;
    let (scores, labels) = cmd.inputs.load()?;
    let result = grid_search_weights(&scores, &labels, &enumerate_grid(cmd.grid))?;
    let best = FusionConfig::new(result.best.weights(), base.temperature())?;
    let mut art = Artifacts::new(&cmd.out);
    art.write("grid.csv", result.to_csv())?;
    art.write("fusion-config.json", json_bytes(&best)?)?;
    art.write(
        "gridsearch.json",
        json_bytes(&serde_json::json!({
            "weights": best.weights(),
            "lattice_units": result.best.units(),
            "denominator": result.best.denom(),
            "validation_accuracy": result.best_score,
            "points": result.scores.len(),
        }))?,
    )?;
    let mut inputs = cmd.inputs.paths();
    inputs.extend(cmd.fusion_config.as_deref());
    art.finish("gridsearch", DEFAULT_SEED, cmd, &inputs)?;
    Ok(Outcome::Success)
}

fn member_accuracies(scores: &AlignedScores, labels: &BTreeMap<String, ClassLabel>) -> [f64; 3] {
    let targets: Vec<usize> = labels.values().map(|l| l.index()).collect();
    ModelName::ALL.map(|m| {
        let mut w = [0.0; 3];
        w[m.index()] = 1.0;
        crate::ensemble::fused_accuracy(scores, &targets, &w)
    })
}

fn write_evaluation(art: &mut Artifacts, eval: &Evaluation) -> Result<()> {
    art.write("metrics.json", eval.report.to_json()? + "\n")?;
    art.write("per_class.csv", eval.report.per_class_csv())?;
    art.write("confusion.csv", eval.confusion.to_csv())?;
    for curve in &eval.roc {
        art.write(&format!("roc_{}.csv", curve.class), curve.to_csv())?;
    }
    art.write("confusion.svg", confusion_heatmap(&eval.confusion))?;
    art.write("roc.svg", roc_plot(&eval.roc)?)?;
    Ok(())
}

/// Fuse, calibrate and score against the manifest labels.
pub fn cmd_evaluate(cmd: &FuseCommand) -> Result<Outcome> {
    let config = load_fusion_config(cmd.fusion_config.as_deref())?;
    let (scores, labels) = cmd.inputs.load()?;
    let preds = predict(&scores, &config, true)?;
    let eval = evaluate(&labels, &calibrated_map(&preds))?;
    let mut art = Artifacts::new(&cmd.out);
    write_evaluation(&mut art, &eval)?;
    art.write("predictions.jsonl", fused_jsonl(&preds)?)?;
    let mut members = String::from("model,accuracy\n");
    for (m, a) in ModelName::ALL.iter().zip(member_accuracies(&scores, &labels)) {
        let _ = writeln!(members, "{m},{a:.6}");
    }
    let _ = writeln!(members, "ensemble,{:.6}", eval.report.accuracy);
    art.write("members.csv", members)?;
    art.finish("evaluate", DEFAULT_SEED, &(cmd, config), &cmd.input_paths())?;
    Ok(Outcome::Success)
}

/// Re-run the evaluation with each member removed and without calibration;
/// writes `ablation.csv`.
pub fn cmd_ablate(cmd: &FuseCommand) -> Result<Outcome> {
    let base = load_fusion_config(cmd.fusion_config.as_deref())?;
    let (scores, labels) = cmd.inputs.load()?;
    let mut csv = String::from("configuration,w1,w2,w3,temperature,accuracy,macro_auc\n");
    for cfg in AblationConfig::table() {
        let effective = crate::ensemble::apply_ablation(cfg, &base)?;
        let preds = predict_ablated(&scores, &base, cfg)?;
        let eval = evaluate(&labels, &calibrated_map(&preds))?;
        let [a, b, c] = effective.weights();
        let _ = writeln!(
            csv,
            "{cfg},{a:.6},{b:.6},{c:.6},{},{:.6},{:.6}",
            effective.temperature(),
            eval.report.accuracy,
            eval.report.macro_auc_roc.unwrap_or(f64::NAN)
        );
    }
    let mut art = Artifacts::new(&cmd.out);
    art.write("ablation.csv", csv)?;
    art.finish("ablate", DEFAULT_SEED, &(cmd, base), &cmd.input_paths())?;
    Ok(Outcome::Success)
}

#[derive(Clone, Debug, Serialize)]
pub struct PlotTrainingCommand {
    pub history: PathBuf,
    #[serde(skip)]
    pub out: PathBuf,
}

/// Accuracy and loss charts from an `epoch,acc,loss` CSV.
pub fn cmd_plot_training(cmd: &PlotTrainingCommand) -> Result<Outcome> {
    let text = read_to_string(&cmd.history)?;
    let history = parse_training_history(&text).map_err(|e| Error::input(&cmd.history, e.to_string()))?;
    let mut art = Artifacts::new(&cmd.out);
    for (name, svg) in training_charts(&history)? {
        art.write(name, svg)?;
    }
    art.finish("plot-training", DEFAULT_SEED, cmd, &[&cmd.history])?;
    Ok(Outcome::Success)
}
