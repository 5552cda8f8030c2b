//! The `bregman-perceptron` command line.
//!
//! Exit codes: 0 success, 1 failed check, 2 usage error, 3 data error,
//! 4 divergence.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use bregman_perceptron_core::data::{synthetic_dataset, SyntheticSpec};
use bregman_perceptron_core::metrics::accuracy;
use bregman_perceptron_core::{
    ActivationKind, BatchMode, LabeledDataset, ProximalActivation, RawImages, ThresholdRule,
    TrainerKind,
};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::experiment::{
    self, run_experiment, write_metadata_json, write_trace_csv, DataSource, ExperimentConfig,
    ExperimentError, ExperimentResult, ScheduleKind, StepRule, TrainerSpec, COMPARISON_TRAIN_COUNT,
    COMPARISON_VAL_COUNT, DEFAULT_ITERATIONS, SYNTHETIC_CLASSES, SYNTHETIC_FEATURES,
    SYNTHETIC_NOISE,
};
use crate::gradcheck::{run_gradcheck, ENVELOPE_TOLERANCE, FD_TOLERANCE};
use crate::idx::{self, LoadError};
use crate::model_file::ModelFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;

pub const DATA_ENV: &str = "BREGMAN_PERCEPTRON_DATA";

#[derive(Debug, Parser)]
#[command(
    name = "bregman-perceptron",
    version,
    about = "Train perceptrons with proximal activations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one model and write it with its trace
    Train(TrainArgs),
    /// Report the accuracy of a saved model
    Evaluate(EvaluateArgs),
    /// Check the loss gradient against finite differences
    Gradcheck(GradcheckArgs),
    /// Run the four-trainer comparison
    Experiment(ExperimentArgs),
    /// Write a synthetic dataset as IDX files
    SyntheticGen(SyntheticGenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Directory holding the four IDX files (optionally gzipped)
    #[arg(long, env = DATA_ENV, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,
    /// Use generated data instead of IDX files
    #[arg(long)]
    pub synthetic: bool,
    /// Training samples (drawn by seed from the IDX training file)
    #[arg(long, default_value_t = COMPARISON_TRAIN_COUNT)]
    pub train_count: usize,
    /// Validation samples (drawn by seed from the IDX test file)
    #[arg(long, default_value_t = COMPARISON_VAL_COUNT)]
    pub val_count: usize,
    /// Input dimension of synthetic data
    #[arg(long, default_value_t = SYNTHETIC_FEATURES)]
    pub features: usize,
    /// Number of classes of synthetic data
    #[arg(long, default_value_t = SYNTHETIC_CLASSES)]
    pub classes: usize,
    /// Uniform noise amplitude of synthetic data
    #[arg(long, default_value_t = SYNTHETIC_NOISE, value_parser = nonnegative)]
    pub noise: f64,
}

impl DataArgs {
    fn source(&self) -> Result<DataSource, Failure> {
        if self.synthetic {
            Ok(DataSource::Synthetic {
                features: self.features,
                classes: self.classes,
                noise: self.noise,
            })
        } else if let Some(dir) = &self.data_dir {
            Ok(DataSource::Idx { dir: dir.clone() })
        } else {
            Err(Failure::usage(format!(
                "no data: pass --data-dir, set {DATA_ENV}, or use --synthetic"
            )))
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// classic-rosenblatt, bregman-sgd, subgradient, rosenblatt-ista or subgradient-ista
    #[arg(long)]
    pub trainer: TrainerKind,
    /// relu, identity, softshrink:<theta> or heaviside
    #[arg(long, default_value = "relu")]
    pub activation: ActivationKind,
    /// Weight of the l1 penalty on W
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = nonnegative)]
    pub alpha: f64,
    /// Divide alpha by this (255 gives alpha per raw pixel intensity)
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub alpha_divisor: f64,
    /// Initial weight step size [default: 1/L from the data Gram matrix]
    #[arg(long, allow_negative_numbers = true, value_parser = positive)]
    pub tau_w: Option<f64>,
    /// Initial bias step size [default: same as --tau-w]
    #[arg(long, allow_negative_numbers = true, value_parser = positive)]
    pub tau_b: Option<f64>,
    /// constant or diminishing (tau0/sqrt(k))
    #[arg(long, default_value = "constant", value_parser = parse_schedule)]
    pub schedule: ScheduleKind,
    /// full, det:<size> or rand:<size>
    #[arg(long, default_value = "full", value_parser = parse_batch)]
    pub batch: BatchArg,
    /// tau-scaled or literal-alpha
    #[arg(long, default_value = "tau-scaled")]
    pub threshold: ThresholdRule,
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record elapsed time (makes the trace non-reproducible)
    #[arg(long)]
    pub wall_time: bool,
    #[command(flatten)]
    pub data: DataArgs,
    /// Output directory for model.json, trace.csv and metadata.json
    #[arg(long, default_value = "train-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Model file written by `train`
    #[arg(long)]
    pub model: PathBuf,
    /// Seed used for subsampling or generating the data
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// relu, identity or softshrink:<theta>
    #[arg(long, default_value = "relu")]
    pub activation: ActivationKind,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Corrupt the analytic gradient (negative control)
    #[arg(long, hide = true)]
    pub poison: bool,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Alphas 0.9, 0.81, 0.81, 0.85 per raw pixel intensity
    #[arg(long)]
    pub paper_defaults: bool,
    /// Alphas of rosenblatt-ista, subgradient-constant, subgradient-diminishing, subgradient-ista
    #[arg(long, value_delimiter = ',', num_args = 4, value_parser = nonnegative, conflicts_with = "paper_defaults")]
    pub alphas: Option<Vec<f64>>,
    /// Divide every alpha by this [default: 255 with --paper-defaults, else 1]
    #[arg(long, value_parser = positive)]
    pub alpha_divisor: Option<f64>,
    /// Shared initial step size [default: 1/L from the data Gram matrix]
    #[arg(long, value_parser = positive)]
    pub tau: Option<f64>,
    /// tau-scaled or literal-alpha
    #[arg(long, default_value = "tau-scaled")]
    pub threshold: ThresholdRule,
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record every N-th iteration
    #[arg(long, default_value_t = 1)]
    pub eval_every: usize,
    /// Record elapsed time (makes the trace non-reproducible)
    #[arg(long)]
    pub wall_time: bool,
    #[command(flatten)]
    pub data: DataArgs,
    /// Output directory for traces.csv and metadata.json
    #[arg(long, default_value = "experiment-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SyntheticGenArgs {
    #[arg(long, default_value_t = 60_000)]
    pub train_count: usize,
    #[arg(long, default_value_t = 10_000)]
    pub test_count: usize,
    #[arg(long, default_value_t = 28)]
    pub rows: usize,
    #[arg(long, default_value_t = 28)]
    pub cols: usize,
    #[arg(long, default_value_t = SYNTHETIC_CLASSES)]
    pub classes: usize,
    #[arg(long, default_value_t = SYNTHETIC_NOISE, value_parser = nonnegative)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for the four IDX files
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchArg(pub BatchMode);

fn parse_batch(s: &str) -> Result<BatchArg, String> {
    let size = |v: &str| -> Result<usize, String> {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(format!("batch size must be a positive integer, got `{v}`")),
        }
    };
    match s.split_once(':') {
        None if s == "full" => Ok(BatchArg(BatchMode::FullBatch)),
        Some(("det", n)) => Ok(BatchArg(BatchMode::Deterministic(size(n)?))),
        Some(("rand", n)) => Ok(BatchArg(BatchMode::Random {
            size: size(n)?,
            seed: 0,
        })),
        _ => Err(format!(
            "expected full, det:<size> or rand:<size>, got `{s}`"
        )),
    }
}

fn parse_schedule(s: &str) -> Result<ScheduleKind, String> {
    match s {
        "constant" => Ok(ScheduleKind::Constant),
        "diminishing" => Ok(ScheduleKind::Diminishing),
        _ => Err(format!("expected constant or diminishing, got `{s}`")),
    }
}

fn nonnegative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        Ok(v) => Err(format!("must be a finite number ≥ 0, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        Ok(v) => Err(format!("must be a finite number > 0, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

/// An error message with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let code = match &e {
            ExperimentError::Config(_) => EXIT_USAGE,
            ExperimentError::Core(_) if !e.is_data_error() => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure::data(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::data(e.to_string())
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Train(a) => cmd_train(&a, out),
        Command::Evaluate(a) => cmd_evaluate(&a, out),
        Command::Gradcheck(a) => cmd_gradcheck(&a, out),
        Command::Experiment(a) => cmd_experiment(&a, out),
        Command::SyntheticGen(a) => cmd_synthetic_gen(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn write_outputs(result: &ExperimentResult, out_dir: &Path, csv_name: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(out_dir)?;
    write_trace_csv(&result.traces, &out_dir.join(csv_name))?;
    write_metadata_json(&result.metadata, &out_dir.join("metadata.json"))?;
    Ok(())
}

fn base_config(data: &DataArgs, seed: u64, iters: usize) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::comparison(data.source()?, [0.0; 4], seed);
    cfg.train_count = data.train_count;
    cfg.val_count = data.val_count;
    cfg.iterations = iters;
    Ok(cfg)
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut cfg = base_config(&a.data, a.seed, a.iters)?;
    cfg.activation = a.activation;
    cfg.alpha_divisor = a.alpha_divisor;
    cfg.record_wall_time = a.wall_time;
    cfg.step = match a.tau_w {
        Some(t) => StepRule::Fixed(t),
        None => StepRule::GramLipschitz,
    };
    let batch = match a.batch.0 {
        BatchMode::Random { size, .. } => BatchMode::Random { size, seed: a.seed },
        other => other,
    };
    cfg.trainers = vec![TrainerSpec {
        tau_b: a.tau_b,
        threshold: a.threshold,
        batch,
        ..TrainerSpec::new(a.trainer.name(), a.trainer, a.alpha, a.schedule)
    }];
    let result = run_experiment(&cfg)?;
    let trace = &result.traces[0];

    write_outputs(&result, &a.out, "trace.csv")?;
    let mut meta = BTreeMap::new();
    meta.insert("trainer".into(), json!(a.trainer.name()));
    meta.insert("alpha".into(), json!(a.alpha));
    meta.insert("alpha_divisor".into(), json!(a.alpha_divisor));
    meta.insert(
        "iterations".into(),
        json!(trace.records.last().map_or(0, |r| r.iteration)),
    );
    meta.insert("seed".into(), json!(a.seed));
    meta.insert(
        "initial_model_sha256".into(),
        json!(result.metadata.initial_model_sha256),
    );
    ModelFile::new(&trace.final_model, &cfg.activation, meta)
        .save(a.out.join("model.json"))
        .map_err(|e| Failure::data(e.to_string()))?;

    if let Some(k) = trace.diverged_at {
        writeln!(out, "{}: diverged at iteration {k}", trace.spec.label)?;
        return Ok(EXIT_DIVERGED);
    }
    let last = trace.last();
    writeln!(
        out,
        "{}: iterations {} objective {:.6e} train_acc {:.4} val_acc {:.4} sparsity {:.4}",
        trace.spec.label,
        last.iteration,
        last.objective,
        last.train_accuracy,
        last.val_accuracy,
        last.weight_sparsity
    )?;
    Ok(EXIT_OK)
}

pub fn cmd_evaluate(a: &EvaluateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let file = ModelFile::load(&a.model)
        .map_err(|e| Failure::data(format!("{}: {e}", a.model.display())))?;
    let (model, act) = file.model().map_err(|e| Failure::data(e.to_string()))?;
    let mut cfg = base_config(&a.data, a.seed, 1)?;
    cfg.activation = act;
    let (_, val) = experiment::prepare_data(&cfg)?;
    if val.features() != model.inputs() || val.classes() != model.outputs() {
        return Err(Failure::data(format!(
            "model is {}×{} but the data has {} features and {} classes",
            model.inputs(),
            model.outputs(),
            val.features(),
            val.classes()
        )));
    }
    let acc = accuracy(&model, &val, &act).map_err(|e| Failure::data(e.to_string()))?;
    writeln!(out, "samples {} accuracy {acc:.6}", val.len())?;
    Ok(EXIT_OK)
}

pub fn cmd_gradcheck(a: &GradcheckArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let act: ProximalActivation = *a.activation.as_proximal().ok_or_else(|| {
        Failure::usage(format!(
            "activation `{}` has no proximal form",
            a.activation
        ))
    })?;
    let report = run_gradcheck(&act, a.trials, a.seed, a.poison);
    writeln!(out, "activation {} trials {}", a.activation, report.trials)?;
    writeln!(
        out,
        "max relative finite-difference error {:.3e} (tolerance {FD_TOLERANCE:.0e})",
        report.max_fd_error
    )?;
    writeln!(
        out,
        "max envelope discrepancy {:.3e} (tolerance {ENVELOPE_TOLERANCE:.0e})",
        report.max_envelope_gap
    )?;
    if report.passed() {
        writeln!(out, "PASS")?;
        return Ok(EXIT_OK);
    }
    if report.max_fd_error > FD_TOLERANCE {
        if let Some(w) = &report.worst_fd {
            writeln!(
                out,
                "FAIL gradient at trial {} coordinate {}: analytic {:.9e} numeric {:.9e}",
                w.trial, w.coordinate, w.analytic, w.numeric
            )?;
        }
    }
    if report.max_envelope_gap > ENVELOPE_TOLERANCE {
        if let Some(t) = report.worst_envelope_trial {
            writeln!(out, "FAIL envelope identity at trial {t}")?;
        }
    }
    Ok(EXIT_CHECK_FAILED)
}

pub fn cmd_experiment(a: &ExperimentArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let source = a.data.source()?;
    let mut cfg = if a.paper_defaults {
        ExperimentConfig::default_comparison(source, a.seed)
    } else {
        let alphas = a.alphas.as_deref().unwrap_or(&[0.0; 4]);
        ExperimentConfig::comparison(source, [alphas[0], alphas[1], alphas[2], alphas[3]], a.seed)
    };
    if let Some(d) = a.alpha_divisor {
        cfg.alpha_divisor = d;
    }
    for t in &mut cfg.trainers {
        t.threshold = a.threshold;
    }
    cfg.train_count = a.data.train_count;
    cfg.val_count = a.data.val_count;
    cfg.iterations = a.iters;
    cfg.eval_every = a.eval_every;
    cfg.record_wall_time = a.wall_time;
    if let Some(t) = a.tau {
        cfg.step = StepRule::Fixed(t);
    }

    let result = run_experiment(&cfg)?;
    write_outputs(&result, &a.out, "traces.csv")?;
    writeln!(
        out,
        "step size {:.6e} (L = {:.6e}), initial model {}",
        result.metadata.step_size,
        result.metadata.gram_lipschitz,
        result.metadata.initial_model_sha256
    )?;
    for t in &result.traces {
        let last = t.last();
        match t.diverged_at {
            Some(k) => writeln!(out, "{:<26} diverged at iteration {k}", t.spec.label)?,
            None => writeln!(
                out,
                "{:<26} val_acc {:.4} train_acc {:.4} sparsity {:.4} objective {:.6e}",
                t.spec.label,
                last.val_accuracy,
                last.train_accuracy,
                last.weight_sparsity,
                last.objective
            )?,
        }
    }
    Ok(EXIT_OK)
}

fn quantize(data: &LabeledDataset, rows: usize, cols: usize) -> RawImages {
    RawImages {
        count: data.len(),
        rows,
        cols,
        pixels: data
            .inputs()
            .as_slice()
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect(),
    }
}

pub fn cmd_synthetic_gen(a: &SyntheticGenArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    if a.classes > 256 {
        return Err(Failure::usage(
            "IDX labels are single bytes; use at most 256 classes",
        ));
    }
    let spec = SyntheticSpec {
        samples: a.train_count + a.test_count,
        features: a.rows * a.cols,
        classes: a.classes,
        noise: a.noise,
    };
    let data = synthetic_dataset(&spec, a.seed).map_err(|e| Failure::usage(e.to_string()))?;
    let (train, test) = data.split_at(a.train_count);
    std::fs::create_dir_all(&a.out)?;
    let labels = |d: &LabeledDataset| d.labels().iter().map(|&l| l as u8).collect::<Vec<u8>>();
    idx::write_idx_images(
        a.out.join(idx::TRAIN_IMAGES),
        &quantize(&train, a.rows, a.cols),
    )?;
    idx::write_idx_labels(a.out.join(idx::TRAIN_LABELS), &labels(&train))?;
    idx::write_idx_images(
        a.out.join(idx::TEST_IMAGES),
        &quantize(&test, a.rows, a.cols),
    )?;
    idx::write_idx_labels(a.out.join(idx::TEST_LABELS), &labels(&test))?;
    writeln!(
        out,
        "wrote {} training and {} test images of {}×{} to {}",
        train.len(),
        test.len(),
        a.rows,
        a.cols,
        a.out.display()
    )?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_flag_forms() {
        assert_eq!(parse_batch("full").unwrap().0, BatchMode::FullBatch);
        assert_eq!(
            parse_batch("det:32").unwrap().0,
            BatchMode::Deterministic(32)
        );
        assert!(matches!(
            parse_batch("rand:8").unwrap().0,
            BatchMode::Random { size: 8, .. }
        ));
        assert!(parse_batch("det:0").is_err());
        assert!(parse_batch("half").is_err());
    }

    #[test]
    fn alpha_range_is_checked() {
        assert!(nonnegative("-1").is_err());
        assert!(nonnegative("nan").is_err());
        assert_eq!(nonnegative("0").unwrap(), 0.0);
        assert!(positive("0").is_err());
    }

    #[test]
    fn command_tree_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
