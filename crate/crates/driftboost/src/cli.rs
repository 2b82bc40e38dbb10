//! `driftboost` subcommands.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use driftboost_core::gbdt::TrainParams;
use driftboost_core::pipeline::{PipelineConfig, RetrainPolicy};
use driftboost_core::synth::{DriftKind, DriftSpec};

use crate::error::{Error, Result};
use crate::gen::{gen_stream, MANIFEST_NAME};
use crate::manifest::load_manifest;
use crate::model::{load_predictor, save_predictor};
use crate::report::render_report;
use crate::sim::{simulate, with_threads, WallClock};
use crate::tsv::load_batch;

#[derive(Debug, Parser)]
#[command(name = "driftboost", version, about = "Lifelong gradient boosting over drifting batch streams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Stream a dataset through test-then-train and write the AUC report.
    Simulate(SimulateArgs),
    /// Write a synthetic drifting stream (manifest plus batch files).
    GenDrift(GenDriftArgs),
    /// Score a batch file with a saved model, one probability per line.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Report TSV.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// Labeled batches kept in the training window.
    #[arg(long = "window")]
    pub window: Option<usize>,
    /// Share of encoded features kept by selection.
    #[arg(long)]
    pub select_q: Option<f64>,
    #[arg(long)]
    pub p0: Option<f64>,
    #[arg(long)]
    pub step_coeff: Option<f64>,
    /// ALWAYS, BUDGETED or NEVER.
    #[arg(long)]
    pub full_retrain: Option<RetrainPolicy>,
    #[arg(long)]
    pub valid_fraction: Option<f64>,
    #[arg(long)]
    pub row_cap: Option<usize>,
    /// Trees in the feature-selection pre-model.
    #[arg(long)]
    pub pretrain_rounds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the manifest's time budget.
    #[arg(long)]
    pub budget_seconds: Option<f64>,
    /// Worker threads for split search (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Debug, Default, Args)]
pub struct TrainArgs {
    /// Replaced per batch by the learning-rate schedule; used as recorded.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub num_iterations: Option<usize>,
    #[arg(long)]
    pub early_stopping_rounds: Option<usize>,
    #[arg(long)]
    pub reg_alpha: Option<f64>,
    #[arg(long)]
    pub reg_lambda: Option<f64>,
    #[arg(long)]
    pub min_split_gain: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_child_hessian: Option<f64>,
    #[arg(long)]
    pub max_bins: Option<usize>,
}

impl TrainArgs {
    pub fn params(&self, seed: u64) -> TrainParams {
        let d = TrainParams::default();
        TrainParams {
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            num_iterations_max: self.num_iterations.unwrap_or(d.num_iterations_max),
            early_stopping_rounds: self.early_stopping_rounds.unwrap_or(d.early_stopping_rounds),
            reg_alpha: self.reg_alpha.unwrap_or(d.reg_alpha),
            reg_lambda: self.reg_lambda.unwrap_or(d.reg_lambda),
            min_split_gain: self.min_split_gain.unwrap_or(d.min_split_gain),
            max_depth: self.max_depth.unwrap_or(d.max_depth),
            min_child_hessian: self.min_child_hessian.unwrap_or(d.min_child_hessian),
            max_bins: self.max_bins.unwrap_or(d.max_bins),
            seed,
        }
    }
}

/// Everything a simulate run needs, validated before any work starts.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub out: PathBuf,
    pub model_out: Option<PathBuf>,
    pub pipeline: PipelineConfig,
    pub budget_seconds: Option<f64>,
    pub threads: Option<usize>,
}

impl SimulateArgs {
    pub fn run_config(&self) -> Result<RunConfig> {
        let d = PipelineConfig::default();
        let seed = self.seed.unwrap_or(d.seed);
        let pipeline = PipelineConfig {
            window_batches: self.window.unwrap_or(d.window_batches),
            select_proportion: self.select_q.unwrap_or(d.select_proportion),
            pretrain_rounds: self.pretrain_rounds.unwrap_or(d.pretrain_rounds),
            full_retrain: self.full_retrain.unwrap_or(d.full_retrain),
            valid_fraction: self.valid_fraction.unwrap_or(d.valid_fraction),
            row_cap: self.row_cap.unwrap_or(d.row_cap),
            p0: self.p0.unwrap_or(d.p0),
            step_coeff: self.step_coeff.unwrap_or(d.step_coeff),
            seed,
            train: self.train.params(seed),
        };
        pipeline.validate().map_err(|e| Error::Usage(e.to_string()))?;
        if let Some(b) = self.budget_seconds {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::Usage(format!("--budget-seconds must be a positive number, got {b}")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Usage("--threads must be >= 1".into()));
        }
        Ok(RunConfig {
            manifest: self.manifest.clone(),
            out: self.out.clone(),
            model_out: self.model_out.clone(),
            pipeline,
            budget_seconds: self.budget_seconds,
            threads: self.threads,
        })
    }
}

#[derive(Debug, Args)]
pub struct GenDriftArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = DriftSpec::default().batches)]
    pub batches: u32,
    #[arg(long, default_value_t = DriftSpec::default().rows_per_batch)]
    pub rows_per_batch: usize,
    #[arg(long, default_value_t = DriftSpec::default().n_cat)]
    pub n_cat: usize,
    #[arg(long, default_value_t = DriftSpec::default().n_num)]
    pub n_num: usize,
    #[arg(long, default_value_t = DriftSpec::default().n_mvc)]
    pub n_mvc: usize,
    #[arg(long, default_value_t = DriftSpec::default().n_time)]
    pub n_time: usize,
    /// First drifted batch; batches + 1 means no drift.
    #[arg(long, default_value_t = DriftSpec::default().drift_at)]
    pub drift_at: u32,
    /// FLIP, ROTATE or SHIFT.
    #[arg(long, default_value_t = DriftSpec::default().drift_kind)]
    pub drift_kind: DriftKind,
    #[arg(long, default_value_t = DriftSpec::default().missing_rate)]
    pub missing_rate: f64,
    #[arg(long, default_value_t = DriftSpec::default().seed)]
    pub seed: u64,
    /// Budget written into the manifest.
    #[arg(long, default_value_t = 600.0)]
    pub budget_seconds: f64,
}

impl GenDriftArgs {
    pub fn spec(&self) -> DriftSpec {
        DriftSpec {
            batches: self.batches,
            rows_per_batch: self.rows_per_batch,
            n_cat: self.n_cat,
            n_num: self.n_num,
            n_mvc: self.n_mvc,
            n_time: self.n_time,
            drift_at: self.drift_at,
            drift_kind: self.drift_kind,
            missing_rate: self.missing_rate,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub batch: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let config = args.run_config()?;
    let manifest = load_manifest(&config.manifest)?;
    let budget = config.budget_seconds.unwrap_or(manifest.budget_seconds);
    let run = || simulate(&manifest, &config.pipeline, budget, WallClock::start());
    let sim = match config.threads {
        Some(n) => with_threads(n, run)??,
        None => run()?,
    };
    std::fs::write(&config.out, render_report(&sim.report)).map_err(|e| Error::io(&config.out, e))?;
    if let Some(path) = &config.model_out {
        let predictor = sim
            .predictor
            .as_ref()
            .ok_or_else(|| Error::Usage("no labeled batch was learned, no model to save".into()))?;
        save_predictor(path, predictor, &config.pipeline.train)?;
    }
    Ok(())
}

pub fn cmd_gen_drift(args: &GenDriftArgs) -> Result<()> {
    let spec = args.spec();
    spec.validate().map_err(|e| Error::Usage(e.to_string()))?;
    if !(args.budget_seconds > 0.0 && args.budget_seconds.is_finite()) {
        return Err(Error::Usage(format!("--budget-seconds must be a positive number, got {}", args.budget_seconds)));
    }
    gen_stream(&spec, &args.out_dir, args.budget_seconds)?;
    eprintln!("wrote {}", args.out_dir.join(MANIFEST_NAME).display());
    Ok(())
}

pub fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let (predictor, _) = load_predictor(&args.model)?;
    let batch = load_batch(&args.batch, &predictor.schema, 1)?;
    let proba = predictor.predict_proba(&batch)?;
    let mut text = String::with_capacity(proba.len() * 20);
    for p in proba {
        text.push_str(&format!("{p:?}\n"));
    }
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::GenDrift(a) => cmd_gen_drift(a),
        Command::Predict(a) => cmd_predict(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("driftboost: {e}");
            e.exit_code()
        }
    }
}
