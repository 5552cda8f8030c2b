//! Side-by-side training runs from a shared initial model, with one trace
//! record per evaluated iteration.
//!
//! Each trainer's objective is its own: Bregman loss plus `alpha·‖W‖₁` for
//! the Bregman trainers, squared loss plus `alpha·‖W‖₁` for the subgradient
//! baselines. Validation accuracy is the common yardstick.

use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bregman_perceptron_core::data::synthetic_dataset;
use bregman_perceptron_core::metrics::accuracy;
use bregman_perceptron_core::optim::gram_lipschitz;
use bregman_perceptron_core::{
    ActivationKind, BatchMode, LabeledDataset, PerceptronModel, ProximalActivation, StepSchedule,
    SyntheticSpec, ThresholdRule, Trainer, TrainerConfig, TrainerKind,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::idx::{load_dataset, LoadError};

/// Regularization weights of the four-way comparison, in the order
/// Rosenblatt-ISTA, constant-step subgradient, diminishing-step subgradient,
/// subgradient-ISTA.
pub const COMPARISON_ALPHAS: [f64; 4] = [0.9, 0.81, 0.81, 0.85];
pub const COMPARISON_TRAIN_COUNT: usize = 3000;
pub const COMPARISON_VAL_COUNT: usize = 10_000;
pub const DEFAULT_ITERATIONS: usize = 200;
/// Maximum byte value of a pixel.
pub const RAW_INTENSITY_DIVISOR: f64 = 255.0;

/// Stand-in for the image data when no IDX files are available: 28×28
/// inputs in ten classes.
pub const SYNTHETIC_FEATURES: usize = 784;
pub const SYNTHETIC_CLASSES: usize = 10;
pub const SYNTHETIC_NOISE: f64 = 0.5;

impl DataSource {
    pub fn synthetic_default() -> Self {
        DataSource::Synthetic {
            features: SYNTHETIC_FEATURES,
            classes: SYNTHETIC_CLASSES,
            noise: SYNTHETIC_NOISE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSource {
    Idx {
        dir: PathBuf,
    },
    Synthetic {
        features: usize,
        classes: usize,
        noise: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Constant,
    Diminishing,
}

impl ScheduleKind {
    pub fn with_step(self, tau0: f64) -> StepSchedule {
        match self {
            ScheduleKind::Constant => StepSchedule::Constant(tau0),
            ScheduleKind::Diminishing => StepSchedule::Diminishing(tau0),
        }
    }
}

/// Shared initial step size for every trainer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// `1/L` with `L` the top eigenvalue of the (bias-augmented) data Gram matrix.
    GramLipschitz,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainerSpec {
    pub label: String,
    pub kind: TrainerKind,
    pub alpha: f64,
    pub schedule: ScheduleKind,
    /// Overrides of the shared step size.
    pub tau_w: Option<f64>,
    pub tau_b: Option<f64>,
    pub threshold: ThresholdRule,
    pub batch: BatchMode,
}

impl TrainerSpec {
    pub fn new(
        label: impl Into<String>,
        kind: TrainerKind,
        alpha: f64,
        schedule: ScheduleKind,
    ) -> Self {
        Self {
            label: label.into(),
            kind,
            alpha,
            schedule,
            tau_w: None,
            tau_b: None,
            threshold: ThresholdRule::TauScaled,
            batch: BatchMode::FullBatch,
        }
    }
}

/// The proposed trainer and the three baselines, full batch.
pub fn comparison_trainers(alphas: [f64; 4]) -> Vec<TrainerSpec> {
    vec![
        TrainerSpec::new(
            "rosenblatt-ista",
            TrainerKind::RosenblattISTA,
            alphas[0],
            ScheduleKind::Constant,
        ),
        TrainerSpec::new(
            "subgradient-constant",
            TrainerKind::SubgradientDescent,
            alphas[1],
            ScheduleKind::Constant,
        ),
        TrainerSpec::new(
            "subgradient-diminishing",
            TrainerKind::SubgradientDescent,
            alphas[2],
            ScheduleKind::Diminishing,
        ),
        TrainerSpec::new(
            "subgradient-ista",
            TrainerKind::SubgradientISTA,
            alphas[3],
            ScheduleKind::Constant,
        ),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub train_count: usize,
    pub val_count: usize,
    /// Every trainer's alpha is divided by this before training. Inputs are
    /// scaled to `[0, 1]`, so a divisor of 255 expresses alpha per raw pixel
    /// intensity unit.
    pub alpha_divisor: f64,
    pub activation: ActivationKind,
    pub trainers: Vec<TrainerSpec>,
    pub iterations: usize,
    pub seed: u64,
    pub step: StepRule,
    /// Record every `eval_every`-th iteration (and always the last).
    pub eval_every: usize,
    pub record_wall_time: bool,
    pub keep_snapshots: bool,
    pub parallel: bool,
}

impl ExperimentConfig {
    /// The four-way comparison with rectifier activation, full batches and
    /// shared `1/L` step size.
    pub fn comparison(data: DataSource, alphas: [f64; 4], seed: u64) -> Self {
        Self {
            data,
            train_count: COMPARISON_TRAIN_COUNT,
            val_count: COMPARISON_VAL_COUNT,
            alpha_divisor: 1.0,
            activation: ProximalActivation::Rectifier.into(),
            trainers: comparison_trainers(alphas),
            iterations: DEFAULT_ITERATIONS,
            seed,
            step: StepRule::GramLipschitz,
            eval_every: 1,
            record_wall_time: false,
            keep_snapshots: false,
            parallel: true,
        }
    }

    /// [`ExperimentConfig::comparison`] with [`COMPARISON_ALPHAS`] measured per
    /// raw pixel intensity.
    pub fn default_comparison(data: DataSource, seed: u64) -> Self {
        Self {
            alpha_divisor: RAW_INTENSITY_DIVISOR,
            ..Self::comparison(data, COMPARISON_ALPHAS, seed)
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        if self.eval_every == 0 {
            return bad("evaluation stride must be at least 1".into());
        }
        if self.train_count == 0 || self.val_count == 0 {
            return bad("train and validation counts must be positive".into());
        }
        if !(self.alpha_divisor.is_finite() && self.alpha_divisor > 0.0) {
            return bad(format!(
                "alpha divisor must be positive, got {}",
                self.alpha_divisor
            ));
        }
        if let StepRule::Fixed(t) = self.step {
            if !(t.is_finite() && t > 0.0) {
                return bad(format!("step size must be positive, got {t}"));
            }
        }
        if self.trainers.is_empty() {
            return bad("no trainers configured".into());
        }
        for t in &self.trainers {
            if !(t.alpha.is_finite() && t.alpha >= 0.0) {
                return bad(format!(
                    "{}: alpha must be nonnegative, got {}",
                    t.label, t.alpha
                ));
            }
        }
        Ok(())
    }

    fn init_seed(&self) -> u64 {
        self.seed.wrapping_add(0x9e37_79b9_7f4a_7c15)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{0}")]
    Core(#[from] bregman_perceptron_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ExperimentError {
    /// Whether the failure comes from the input data rather than the setup.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            ExperimentError::Load(_)
                | ExperimentError::Core(bregman_perceptron_core::Error::OutsideDomain { .. })
                | ExperimentError::Core(bregman_perceptron_core::Error::LabelOutOfRange { .. })
                | ExperimentError::Core(bregman_perceptron_core::Error::EmptyDataset)
        )
    }
}

/// Training and validation sets for a configuration.
pub fn prepare_data(
    cfg: &ExperimentConfig,
) -> Result<(LabeledDataset, LabeledDataset), ExperimentError> {
    let (train, val) = match &cfg.data {
        DataSource::Idx { dir } => {
            let ds = load_dataset(dir, 10)?;
            let pick = |d: LabeledDataset, count: usize, seed: u64| -> Result<_, ExperimentError> {
                if count >= d.len() {
                    Ok(d)
                } else {
                    Ok(d.subsample(count, seed)?)
                }
            };
            (
                pick(ds.train, cfg.train_count, cfg.seed)?,
                pick(ds.test, cfg.val_count, cfg.seed.wrapping_add(1))?,
            )
        }
        DataSource::Synthetic {
            features,
            classes,
            noise,
        } => {
            let spec = SyntheticSpec {
                samples: cfg.train_count + cfg.val_count,
                features: *features,
                classes: *classes,
                noise: *noise,
            };
            synthetic_dataset(&spec, cfg.seed)?.split_at(cfg.train_count)
        }
    };
    Ok((train, val))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub objective: f64,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
    pub weight_sparsity: f64,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub spec: TrainerSpec,
    pub tau_w: f64,
    pub tau_b: f64,
    /// Evaluation of the shared initial model (iteration 0).
    pub initial: TraceRecord,
    /// One record per evaluated iteration, starting at 1.
    pub records: Vec<TraceRecord>,
    /// Iteration at which the objective or model stopped being finite.
    pub diverged_at: Option<usize>,
    pub final_model: PerceptronModel,
    /// Models at each recorded iteration, when requested.
    pub snapshots: Vec<(usize, PerceptronModel)>,
}

impl RunTrace {
    pub fn last(&self) -> &TraceRecord {
        self.records.last().unwrap_or(&self.initial)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainerMetadata {
    pub label: String,
    pub trainer: String,
    pub loss: String,
    pub alpha: f64,
    /// The weight actually applied, `alpha / alpha_divisor`.
    pub effective_alpha: f64,
    pub schedule: ScheduleKind,
    pub tau_w: f64,
    pub tau_b: f64,
    pub threshold_rule: String,
    pub batch: String,
    pub initial: TraceRecord,
    #[serde(rename = "final")]
    pub last: TraceRecord,
    pub diverged_at: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentMetadata {
    pub library_version: String,
    pub seed: u64,
    pub init_seed: u64,
    pub initial_model_sha256: String,
    pub data: DataSource,
    pub train_count: usize,
    pub val_count: usize,
    pub alpha_divisor: f64,
    pub features: usize,
    pub classes: usize,
    pub activation: String,
    pub iterations: usize,
    pub eval_every: usize,
    pub gram_lipschitz: f64,
    pub step_size: f64,
    pub wall_time_recorded: bool,
    pub trainers: Vec<TrainerMetadata>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub traces: Vec<RunTrace>,
    pub metadata: ExperimentMetadata,
}

/// SHA-256 over the dimensions and the little-endian bytes of `W` then `b`.
pub fn model_hash(model: &PerceptronModel) -> String {
    let mut h = Sha256::new();
    h.update((model.inputs() as u64).to_le_bytes());
    h.update((model.outputs() as u64).to_le_bytes());
    for v in model.weights().as_slice().iter().chain(model.bias().iter()) {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    cfg.validate()?;
    let (train, val) = prepare_data(cfg)?;
    if train.is_empty() || val.is_empty() {
        return Err(bregman_perceptron_core::Error::EmptyDataset.into());
    }
    run_on(cfg, &train, &val)
}

/// As [`run_experiment`], on datasets the caller already holds.
pub fn run_on(
    cfg: &ExperimentConfig,
    train: &LabeledDataset,
    val: &LabeledDataset,
) -> Result<ExperimentResult, ExperimentError> {
    cfg.validate()?;
    let init = PerceptronModel::random_init(train.features(), train.classes(), cfg.init_seed());
    let lipschitz = gram_lipschitz(train)?;
    let tau0 = match cfg.step {
        StepRule::GramLipschitz => 1.0 / lipschitz,
        StepRule::Fixed(t) => t,
    };

    let traces: Vec<RunTrace> = if cfg.parallel && cfg.trainers.len() > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = cfg
                .trainers
                .iter()
                .map(|spec| scope.spawn(|| run_trainer(cfg, spec, &init, tau0, train, val)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("trainer thread panicked"))
                .collect::<Result<_, _>>()
        })?
    } else {
        cfg.trainers
            .iter()
            .map(|spec| run_trainer(cfg, spec, &init, tau0, train, val))
            .collect::<Result<_, _>>()?
    };

    let trainers = traces
        .iter()
        .map(|t| TrainerMetadata {
            label: t.spec.label.clone(),
            trainer: t.spec.kind.name().to_string(),
            loss: t.spec.kind.loss().name().to_string(),
            alpha: t.spec.alpha,
            effective_alpha: t.spec.alpha / cfg.alpha_divisor,
            schedule: t.spec.schedule,
            tau_w: t.tau_w,
            tau_b: t.tau_b,
            threshold_rule: t.spec.threshold.name().to_string(),
            batch: t.spec.batch.to_string(),
            initial: t.initial,
            last: *t.last(),
            diverged_at: t.diverged_at,
        })
        .collect();
    let metadata = ExperimentMetadata {
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        init_seed: cfg.init_seed(),
        initial_model_sha256: model_hash(&init),
        data: cfg.data.clone(),
        train_count: train.len(),
        val_count: val.len(),
        alpha_divisor: cfg.alpha_divisor,
        features: train.features(),
        classes: train.classes(),
        activation: cfg.activation.to_string(),
        iterations: cfg.iterations,
        eval_every: cfg.eval_every,
        gram_lipschitz: lipschitz,
        step_size: tau0,
        wall_time_recorded: cfg.record_wall_time,
        trainers,
    };
    Ok(ExperimentResult { traces, metadata })
}

/// One run of `template` per alpha, everything else as in `cfg`. Runs are
/// labelled `<label>@<alpha>`.
pub fn alpha_sweep(
    cfg: &ExperimentConfig,
    template: &TrainerSpec,
    alphas: &[f64],
) -> Result<ExperimentResult, ExperimentError> {
    let mut sweep = cfg.clone();
    sweep.trainers = alphas
        .iter()
        .map(|&alpha| TrainerSpec {
            label: format!("{}@{alpha}", template.label),
            alpha,
            ..template.clone()
        })
        .collect();
    run_experiment(&sweep)
}

fn evaluate(
    trainer: &Trainer,
    act: &ActivationKind,
    train: &LabeledDataset,
    val: &LabeledDataset,
    iteration: usize,
    wall_time_ms: f64,
) -> Result<TraceRecord, ExperimentError> {
    let model = trainer.model();
    Ok(TraceRecord {
        iteration,
        objective: trainer.objective(train)?,
        train_accuracy: accuracy(model, train, act)?,
        val_accuracy: accuracy(model, val, act)?,
        weight_sparsity: model.weight_sparsity(),
        wall_time_ms,
    })
}

fn run_trainer(
    cfg: &ExperimentConfig,
    spec: &TrainerSpec,
    init: &PerceptronModel,
    tau0: f64,
    train: &LabeledDataset,
    val: &LabeledDataset,
) -> Result<RunTrace, ExperimentError> {
    let tau_w = spec.tau_w.unwrap_or(tau0);
    let tau_b = spec.tau_b.unwrap_or(tau0);
    let config = TrainerConfig {
        kind: spec.kind,
        activation: cfg.activation,
        tau_w: spec.schedule.with_step(tau_w),
        tau_b: spec.schedule.with_step(tau_b),
        batch: spec.batch,
        alpha: spec.alpha / cfg.alpha_divisor,
        threshold: spec.threshold,
    };
    let mut trainer = Trainer::new(config, init.clone())?;
    let act = cfg.activation;
    let initial = evaluate(&trainer, &act, train, val, 0, 0.0)?;
    let mut records = Vec::with_capacity(cfg.iterations / cfg.eval_every + 1);
    let mut snapshots = Vec::new();
    let mut diverged_at = None;
    let start = Instant::now();
    for k in 1..=cfg.iterations {
        trainer.step(train)?;
        if !trainer.model().is_finite() {
            diverged_at = Some(k);
            break;
        }
        if k % cfg.eval_every != 0 && k != cfg.iterations {
            continue;
        }
        let elapsed = if cfg.record_wall_time {
            start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        let record = evaluate(&trainer, &act, train, val, k, elapsed)?;
        if !record.objective.is_finite() {
            diverged_at = Some(k);
            break;
        }
        records.push(record);
        if cfg.keep_snapshots {
            snapshots.push((k, trainer.model().clone()));
        }
    }
    Ok(RunTrace {
        spec: spec.clone(),
        tau_w,
        tau_b,
        initial,
        records,
        diverged_at,
        final_model: trainer.into_model(),
        snapshots,
    })
}

/// 17 significant digits.
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub const CSV_HEADER: [&str; 7] = [
    "trainer",
    "iteration",
    "objective",
    "train_acc",
    "val_acc",
    "sparsity",
    "wall_time_ms",
];

/// Writes all records, sorted by trainer label then iteration.
pub fn write_trace_csv(traces: &[RunTrace], path: &Path) -> Result<(), ExperimentError> {
    let mut rows: Vec<(&str, &TraceRecord)> = traces
        .iter()
        .flat_map(|t| t.records.iter().map(move |r| (t.spec.label.as_str(), r)))
        .collect();
    rows.sort_by(|a, b| a.0.cmp(b.0).then(a.1.iteration.cmp(&b.1.iteration)));
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for (label, r) in rows {
        w.write_record([
            label.to_string(),
            r.iteration.to_string(),
            real(r.objective),
            real(r.train_accuracy),
            real(r.val_accuracy),
            real(r.weight_sparsity),
            real(r.wall_time_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_metadata_json(
    metadata: &ExperimentMetadata,
    path: &Path,
) -> Result<(), ExperimentError> {
    let mut text = serde_json::to_string_pretty(metadata)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::comparison(
            DataSource::Synthetic {
                features: 12,
                classes: 3,
                noise: 0.4,
            },
            [0.01; 4],
            5,
        );
        cfg.train_count = 60;
        cfg.val_count = 30;
        cfg.iterations = 5;
        cfg
    }

    #[test]
    fn one_iteration_gives_one_record_each() {
        let mut cfg = small_config();
        cfg.iterations = 1;
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.traces.len(), 4);
        for t in &res.traces {
            assert_eq!(t.records.len(), 1);
            assert_eq!(t.records[0].iteration, 1);
        }
    }

    #[test]
    fn identical_trainers_give_identical_traces() {
        let mut cfg = small_config();
        let spec = cfg.trainers[0].clone();
        cfg.trainers = vec![
            spec.clone(),
            TrainerSpec {
                label: "twin".into(),
                ..spec
            },
        ];
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.traces[0].records, res.traces[1].records);
    }

    #[test]
    fn stride_keeps_last_iteration() {
        let mut cfg = small_config();
        cfg.iterations = 7;
        cfg.eval_every = 3;
        let res = run_experiment(&cfg).unwrap();
        let its: Vec<usize> = res.traces[0].records.iter().map(|r| r.iteration).collect();
        assert_eq!(its, vec![3, 6, 7]);
    }

    #[test]
    fn huge_steps_are_recorded_as_divergence() {
        let mut cfg = small_config();
        cfg.step = StepRule::Fixed(1e200);
        cfg.iterations = 50;
        let res = run_experiment(&cfg).unwrap();
        assert!(res.traces.iter().any(|t| t.diverged_at.is_some()));
        for t in &res.traces {
            assert!(t.records.iter().all(|r| r.objective.is_finite()));
        }
    }

    #[test]
    fn empty_trace_set_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trace_csv(&[], &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "trainer,iteration,objective,train_acc,val_acc,sparsity,wall_time_ms\n"
        );
    }

    #[test]
    fn single_record_writes_two_lines() {
        let mut cfg = small_config();
        cfg.iterations = 1;
        cfg.trainers.truncate(1);
        let res = run_experiment(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trace_csv(&res.traces, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("rosenblatt-ista,1,"));
        // 17 significant digits in scientific notation.
        let objective = lines[1].split(',').nth(2).unwrap();
        let mantissa = objective.split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = small_config();
        cfg.iterations = 0;
        assert!(matches!(
            run_experiment(&cfg),
            Err(ExperimentError::Config(_))
        ));
        let mut cfg = small_config();
        cfg.trainers[2].alpha = -1.0;
        assert!(matches!(
            run_experiment(&cfg),
            Err(ExperimentError::Config(_))
        ));
    }

    #[test]
    fn missing_idx_dir_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_config();
        cfg.data = DataSource::Idx {
            dir: dir.path().to_path_buf(),
        };
        let err = run_experiment(&cfg).unwrap_err();
        assert!(err.is_data_error());
        assert!(err.to_string().contains("train-images-idx3-ubyte"));
    }
}
