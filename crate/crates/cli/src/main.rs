//! `spectral-transfer`: batch front end for synthetic data generation,
//! preprocessing, PCA, label transfer and evaluation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod run;

#[derive(Debug, Parser)]
#[command(name = "spectral-transfer", version, about = "RGB/hyperspectral label transfer toolkit")]
struct Cli {
    /// Versioned JSON config with settings for every stage; flags override it.
    #[arg(long, global = true, env = "SPECTRAL_TRANSFER_CONFIG")]
    config: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, short = 'j', global = true, default_value_t = 0, env = "SPECTRAL_TRANSFER_JOBS")]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic benchmark dataset.
    Synth(SynthArgs),
    /// Crop, resize and normalize samples.
    Preprocess(PreprocessArgs),
    /// Fit a PCA model to the cube spectra of a dataset.
    PcaFit(PcaFitArgs),
    /// Project cubes onto a PCA model.
    PcaApply(PcaApplyArgs),
    /// Transfer RGB annotations into the hyperspectral frame.
    Transfer(TransferArgs),
    /// Score predicted masks against ground truth.
    Evaluate(EvaluateArgs),
    /// Combine evaluation reports into one table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct DatasetArgs {
    /// Dataset manifest.
    #[arg(long)]
    manifest: PathBuf,
    /// Restrict to one split.
    #[arg(long, value_enum)]
    split: Option<SplitArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SplitArg {
    Train,
    Val,
    Test,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    scenes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Spectral bands per cube.
    #[arg(long)]
    bands: Option<usize>,
    /// Perspective-like distortion of the hyperspectral view.
    #[arg(long)]
    projective: Option<f64>,
    #[arg(long)]
    ribbon_probability: Option<f64>,
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PcaFitArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long)]
    out: PathBuf,
    /// Number of components.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    max_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct PcaApplyArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Model written by `pca-fit`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MatcherArg {
    Ncc,
    File,
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Per-component label transfer.
    Lt,
    /// Crop+resize only.
    Ma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ProjectionArg {
    Mean,
    FirstComponent,
}

#[derive(Debug, Args)]
struct TransferArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Lt)]
    mode: ModeArg,
    /// Correspondence provider; defaults to the config's choice.
    #[arg(long, value_enum)]
    matcher: Option<MatcherArg>,
    /// JSON-lines correspondences for `--matcher file`.
    #[arg(long, required_if_eq("matcher", "file"))]
    matches: Option<PathBuf>,
    /// Cube rendering to match against.
    #[arg(long, value_enum)]
    projection: Option<ProjectionArg>,
    /// PCA model for `--projection first-component`.
    #[arg(long, required_if_eq("projection", "first-component"))]
    model: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Table,
    Json,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Directory of predicted `<id>.png` masks.
    #[arg(long)]
    pred: PathBuf,
    /// Directory of ground-truth `<id>.png` masks; defaults to the
    /// manifest's hyperspectral masks.
    #[arg(long, required_unless_present = "manifest")]
    gt: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, value_enum, requires = "manifest")]
    split: Option<SplitArg>,
    /// Row label in tables.
    #[arg(long, default_value = "LT")]
    method: String,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    /// Also write eval.json and table.txt here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Evaluation reports (`eval.json`), one table row each.
    #[arg(long = "eval", required = true)]
    evals: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
            return ExitCode::FAILURE;
        }
    }
    match commands::dispatch(&cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": run::describe(&e) }));
            ExitCode::FAILURE
        }
    }
}
