use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use herdsight::commands::{
    cmd_ablate, cmd_calibrate, cmd_dedup, cmd_evaluate, cmd_fuse, cmd_gridsearch, cmd_plot_training, cmd_prep,
    cmd_synth, exit_code, CalibrateCommand, DedupCommand, FuseCommand, GridSearchCommand, Outcome,
    PlotTrainingCommand, PredictionInputs, PrepCommand, SynthCommand, DEFAULT_SEED,
};
use herdsight::ensemble::GridSpec;
use herdsight::{ModelName, Split};

#[derive(Parser)]
#[command(name = "herdsight", version, about = "Ensemble fusion, calibration and evaluation for cattle lesion classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resize, quality-gate, shuffle and augment the manifest's images.
    Prep {
        #[arg(long)]
        manifest: PathBuf,
        /// JSON augmentation ranges (defaults to the full published ranges).
        #[arg(long)]
        augment: Option<PathBuf>,
        #[arg(long, default_value_t = 224)]
        size: u32,
        /// Exit 1 if any image fails to load.
        #[arg(long)]
        strict: bool,
        /// Exit 2 unless the manifest matches the published split counts.
        #[arg(long)]
        check_table1: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Drop records whose image digest repeats an earlier one.
    Dedup {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write seeded stand-in predictions and a labels manifest.
    Synth {
        /// JSON synthetic spec (defaults: 1,000 per class and split, accuracies 0.94/0.96/0.98).
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Realize the reconstructed per-class evaluation matrix exactly.
        #[arg(long)]
        replicate_reference: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Weighted-average fusion without calibration.
    Fuse(FuseArgs),
    /// Fusion followed by temperature scaling.
    Calibrate {
        #[command(flatten)]
        fuse: FuseArgs,
        /// Re-fit the temperature on the labelled split.
        #[arg(long)]
        fit_temperature: bool,
    },
    /// Search fusion weights on the lattice by validation accuracy.
    Gridsearch {
        #[command(flatten)]
        fuse: FuseArgs,
        #[arg(long, default_value_t = 0.10)]
        grid_lo: f64,
        #[arg(long, default_value_t = 0.50)]
        grid_hi: f64,
        #[arg(long, default_value_t = 0.05)]
        grid_step: f64,
    },
    /// Fuse, calibrate and compute metrics, ROC curves and plots.
    Evaluate(FuseArgs),
    /// Evaluate with each member removed and without calibration.
    Ablate(FuseArgs),
    /// Accuracy and loss charts from a training history CSV.
    PlotTraining {
        history: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct FuseArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// MODEL=PATH, once per model.
    #[arg(long = "pred", value_parser = parse_pred, required = true)]
    preds: Vec<(ModelName, PathBuf)>,
    /// Defaults to validation for gridsearch and testing otherwise.
    #[arg(long)]
    labels_split: Option<Split>,
    /// JSON {"weights":[w1,w2,w3],"temperature":T}.
    #[arg(long)]
    fusion_config: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
}

impl FuseArgs {
    fn into_command(self, default_split: Split) -> Result<FuseCommand, String> {
        let mut preds = BTreeMap::new();
        for (m, p) in self.preds {
            if preds.insert(m, p).is_some() {
                return Err(format!("--pred given twice for {m}"));
            }
        }
        Ok(FuseCommand {
            inputs: PredictionInputs {
                manifest: self.manifest,
                preds,
                split: self.labels_split.unwrap_or(default_split),
            },
            fusion_config: self.fusion_config,
            out: self.run.out,
        })
    }
}

fn parse_pred(s: &str) -> Result<(ModelName, PathBuf), String> {
    let (m, p) = s.split_once('=').ok_or("expected MODEL=PATH")?;
    Ok((m.parse().map_err(|e| format!("{e}"))?, PathBuf::from(p)))
}

fn run(command: Command) -> herdsight::Result<Outcome> {
    let fuse = |a: FuseArgs| a.into_command(Split::Testing).map_err(herdsight::Error::Validation);
    match command {
        Command::Prep {
            manifest,
            augment,
            size,
            strict,
            check_table1,
            run,
        } => cmd_prep(&PrepCommand {
            manifest,
            augment,
            out: run.out,
            seed: run.seed,
            size,
            strict,
            check_table1,
        }),
        Command::Dedup { manifest, run } => cmd_dedup(&DedupCommand { manifest, out: run.out }),
        Command::Synth {
            spec,
            replicate_reference,
            run,
        } => cmd_synth(&SynthCommand {
            spec,
            replicate_reference,
            out: run.out,
            seed: run.seed,
        }),
        Command::Fuse(a) => cmd_fuse(&fuse(a)?),
        Command::Calibrate { fuse: a, fit_temperature } => cmd_calibrate(&CalibrateCommand {
            fuse: fuse(a)?,
            fit_temperature,
        }),
        Command::Gridsearch {
            fuse: a,
            grid_lo,
            grid_hi,
            grid_step,
        } => {
            let f = a.into_command(Split::Validation).map_err(herdsight::Error::Validation)?;
            cmd_gridsearch(&GridSearchCommand {
                inputs: f.inputs,
                grid: GridSpec::from_bounds(grid_lo, grid_hi, grid_step)?,
                fusion_config: f.fusion_config,
                out: f.out,
            })
        }
        Command::Evaluate(a) => cmd_evaluate(&fuse(a)?),
        Command::Ablate(a) => cmd_ablate(&fuse(a)?),
        Command::PlotTraining { history, run } => cmd_plot_training(&PlotTrainingCommand { history, out: run.out }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // usage errors are input errors; 2 is reserved for failed checks
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = run(cli.command);
    match &result {
        Ok(Outcome::Success) => {}
        Ok(Outcome::CheckFailed(report)) => eprint!("check failed:\n{report}"),
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result))
}
