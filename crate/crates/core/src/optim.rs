//! Perceptron training.
//!
//! Five procedures are provided, all sharing the model `y = σ(Wᵀx + b)`:
//!
//! * [`rosenblatt_step`]: the classic per-sample update `W += e xᵀ`, `b += e`
//!   with `e = y − σ(z)`. Works with any activation, including [`Heaviside`].
//! * [`bregman_sgd_step`]: mini-batch gradient descent on the Bregman loss.
//!   The per-sample gradient in `z` is `σ(z) − y`, so with a single sample and
//!   unit steps this is exactly the classic update.
//! * [`subgradient_step`]: mini-batch subgradient descent on the squared loss,
//!   which multiplies the residual by `σ′(z)`.
//! * [`rosenblatt_ista_step`] and [`subgradient_ista_step`]: the two above
//!   followed by soft-thresholding of `W` (the ℓ¹ prox). The bias is never
//!   thresholded.
//!
//! Within a batch, per-sample contributions are accumulated in the order the
//! indices are given; [`select_batch`] always yields ascending indices.
//!
//! [`Heaviside`]: crate::activation::Heaviside

use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::activation::{shrink, Activation, ActivationKind, Proximal, Subdifferentiable};
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::loss::{bregman_loss, squared_loss, squared_loss_subgrad_z, LossKind};
use crate::tensor::{
    accumulate_outer, axpy_matrix, axpy_vector, l1_norm, matvec_transposed, outer_product,
    DenseMatrix, DenseVector, ShapeError,
};

/// Weights `W` (m×n) and bias `b` (n).
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptronModel {
    weights: DenseMatrix,
    bias: DenseVector,
}

impl PerceptronModel {
    pub fn new(weights: DenseMatrix, bias: DenseVector) -> Result<Self> {
        if weights.cols() != bias.len() {
            return Err(ShapeError {
                op: "PerceptronModel::new",
                left: weights.shape(),
                right: (bias.len(), 1),
            }
            .into());
        }
        Ok(Self { weights, bias })
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weights: DenseMatrix::zeros(inputs, outputs),
            bias: DenseVector::zeros(outputs),
        }
    }

    /// `W` uniform in `[−1/√m, 1/√m]`, `b = 0`.
    pub fn random_init(inputs: usize, outputs: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = 1.0 / libm::sqrt(inputs.max(1) as f64);
        let data = (0..inputs * outputs)
            .map(|_| rng.gen_range(-r..=r))
            .collect();
        Self {
            weights: DenseMatrix::from_vec(inputs, outputs, data).expect("length matches"),
            bias: DenseVector::zeros(outputs),
        }
    }

    pub fn weights(&self) -> &DenseMatrix {
        &self.weights
    }

    pub fn bias(&self) -> &DenseVector {
        &self.bias
    }

    pub fn inputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.is_finite() && self.bias.is_finite()
    }

    /// Fraction of exactly-zero weights.
    pub fn weight_sparsity(&self) -> f64 {
        let total = self.weights.as_slice().len();
        if total == 0 {
            return 0.0;
        }
        self.weights.count_zeros() as f64 / total as f64
    }

    fn check_dataset(&self, data: &LabeledDataset) -> Result<()> {
        if data.features() != self.inputs() || data.classes() != self.outputs() {
            return Err(ShapeError {
                op: "model/dataset",
                left: self.weights.shape(),
                right: (data.features(), data.classes()),
            }
            .into());
        }
        Ok(())
    }
}

/// Pre-activation `z = Wᵀx + b` and output `σ(z)`.
pub fn forward<A: Activation + ?Sized>(
    model: &PerceptronModel,
    x: &[f64],
    act: &A,
) -> Result<(DenseVector, DenseVector)> {
    let mut z = matvec_transposed(&model.weights, x)?;
    for (zj, &bj) in z.as_mut_slice().iter_mut().zip(model.bias.iter()) {
        *zj += bj;
    }
    let out = act.activate(&z);
    Ok((z, out))
}

/// One classic perceptron update on a single sample: `e = y − σ(z)`,
/// `W ← W + e xᵀ`, `b ← b + e`.
pub fn rosenblatt_step<A: Activation + ?Sized>(
    model: &PerceptronModel,
    x: &[f64],
    y: &DenseVector,
    act: &A,
) -> Result<PerceptronModel> {
    let (_, out) = forward(model, x, act)?;
    let e = y.sub(&out)?;
    Ok(PerceptronModel {
        weights: axpy_matrix(1.0, &outer_product(e.as_slice(), x), &model.weights)?,
        bias: model.bias.add(&e)?,
    })
}

/// Batch-averaged `(g_w, g_b)` where each sample contributes
/// `direction(i, y_i, z_i)` to `g_b` and its outer product with `x_i` to `g_w`.
fn batch_gradient(
    model: &PerceptronModel,
    data: &LabeledDataset,
    batch: &[usize],
    mut direction: impl FnMut(usize, &DenseVector, &DenseVector) -> Result<DenseVector>,
) -> Result<(DenseMatrix, DenseVector)> {
    if batch.is_empty() {
        return Err(Error::invalid("batch", "must contain at least one sample"));
    }
    model.check_dataset(data)?;
    let mut gw = DenseMatrix::zeros(model.inputs(), model.outputs());
    let mut gb = DenseVector::zeros(model.outputs());
    for &i in batch {
        if i >= data.len() {
            return Err(Error::invalid(
                "batch",
                alloc::format!("index {i} out of range for {} samples", data.len()),
            ));
        }
        let x = data.input(i);
        let mut z = matvec_transposed(&model.weights, x)?;
        for (zj, &bj) in z.as_mut_slice().iter_mut().zip(model.bias.iter()) {
            *zj += bj;
        }
        let r = direction(i, &data.target(i), &z)?;
        accumulate_outer(&mut gw, r.as_slice(), x);
        for (g, &rj) in gb.as_mut_slice().iter_mut().zip(r.iter()) {
            *g += rj;
        }
    }
    let count = batch.len() as f64;
    Ok((gw.map(|v| v / count), gb.map(|v| v / count)))
}

fn bregman_gradient<A: Proximal + ?Sized>(
    model: &PerceptronModel,
    data: &LabeledDataset,
    batch: &[usize],
    act: &A,
) -> Result<(DenseMatrix, DenseVector)> {
    batch_gradient(model, data, batch, |i, y, z| {
        if !act.in_domain(y) {
            return Err(Error::OutsideDomain { sample: Some(i) });
        }
        Ok(act.activate(z).sub(y)?)
    })
}

fn squared_gradient<A: Subdifferentiable + ?Sized>(
    model: &PerceptronModel,
    data: &LabeledDataset,
    batch: &[usize],
    act: &A,
) -> Result<(DenseMatrix, DenseVector)> {
    batch_gradient(model, data, batch, |_, y, z| {
        squared_loss_subgrad_z(act, y, z)
    })
}

fn descend(
    model: &PerceptronModel,
    (gw, gb): (DenseMatrix, DenseVector),
    tau_w: f64,
    tau_b: f64,
) -> Result<PerceptronModel> {
    Ok(PerceptronModel {
        weights: axpy_matrix(-tau_w, &gw, &model.weights)?,
        bias: axpy_vector(-tau_b, &gb, &model.bias)?,
    })
}

/// Gradient step on the batch-averaged Bregman loss. Never evaluates `σ′`.
pub fn bregman_sgd_step<A: Proximal + ?Sized>(
    model: &PerceptronModel,
    data: &LabeledDataset,
    batch: &[usize],
    act: &A,
    tau_w: f64,
    tau_b: f64,
) -> Result<PerceptronModel> {
    let grad = bregman_gradient(model, data, batch, act)?;
    descend(model, grad, tau_w, tau_b)
}

/// Subgradient step on the batch-averaged squared loss `½‖y − σ(z)‖²`.
pub fn subgradient_step<A: Subdifferentiable + ?Sized>(
    model: &PerceptronModel,
    data: &LabeledDataset,
    batch: &[usize],
    act: &A,
    tau_w: f64,
    tau_b: f64,
) -> Result<PerceptronModel> {
    let grad = squared_gradient(model, data, batch, act)?;
    descend(model, grad, tau_w, tau_b)
}

/// As [`subgradient_step`], for the objective with `alpha·‖W‖₁` added:
/// `alpha·sign(W)` (with `sign(0) = 0`) joins the weight subgradient.
pub fn regularized_subgradient_step<A: Subdifferentiable + ?Sized>(
    model: &PerceptronModel,
    data: &LabeledDataset,
    batch: &[usize],
    act: &A,
    tau_w: f64,
    tau_b: f64,
    alpha: f64,
) -> Result<PerceptronModel> {
    check_alpha(alpha)?;
    let (gw, gb) = squared_gradient(model, data, batch, act)?;
    let gw = if alpha == 0.0 {
        gw
    } else {
        axpy_matrix(alpha, &model.weights.map(sign), &gw)?
    };
    descend(model, (gw, gb), tau_w, tau_b)
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Elementwise `sign(w)·max(|w| − theta, 0)`, the prox of `theta·‖W‖₁`.
pub fn soft_threshold(w: &DenseMatrix, theta: f64) -> Result<DenseMatrix> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::invalid(
            "threshold",
            alloc::format!("must be nonnegative and finite, got {theta}"),
        ));
    }
    Ok(w.map(|v| shrink(v, theta)))
}

/// How the soft-threshold level is derived from `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ThresholdRule {
    /// `θ = τ_w·alpha`, the prox step of `alpha·‖W‖₁` after a step of size `τ_w`.
    #[default]
    TauScaled,
    /// `θ = alpha`, regardless of the step size.
    LiteralAlpha,
}

impl ThresholdRule {
    pub fn threshold(self, tau_w: f64, alpha: f64) -> f64 {
        match self {
            ThresholdRule::TauScaled => tau_w * alpha,
            ThresholdRule::LiteralAlpha => alpha,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ThresholdRule::TauScaled => "tau-scaled",
            ThresholdRule::LiteralAlpha => "literal-alpha",
        }
    }
}

impl FromStr for ThresholdRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau-scaled" => Ok(ThresholdRule::TauScaled),
            "literal-alpha" => Ok(ThresholdRule::LiteralAlpha),
            _ => Err(Error::invalid(
                "threshold rule",
                alloc::format!("`{s}` (expected tau-scaled or literal-alpha)"),
            )),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "alpha",
            alloc::format!("must be nonnegative and finite, got {alpha}"),
        ))
    }
}

fn ista_finish(
    model: &PerceptronModel,
    grad: (DenseMatrix, DenseVector),
    tau_w: f64,
    tau_b: f64,
    alpha: f64,
    rule: ThresholdRule,
) -> Result<PerceptronModel> {
    check_alpha(alpha)?;
    let stepped = descend(model, grad, tau_w, tau_b)?;
    Ok(PerceptronModel {
        weights: soft_threshold(&stepped.weights, rule.threshold(tau_w, alpha))?,
        bias: stepped.bias,
    })
}

/// Bregman gradient step followed by soft-thresholding of `W`.
#[allow(clippy::too_many_arguments)]
pub fn rosenblatt_ista_step<A: Proximal + ?Sized>(
    model: &PerceptronModel,
    data: &LabeledDataset,
    batch: &[usize],
    act: &A,
    tau_w: f64,
    tau_b: f64,
    alpha: f64,
    rule: ThresholdRule,
) -> Result<PerceptronModel> {
    let grad = bregman_gradient(model, data, batch, act)?;
    ista_finish(model, grad, tau_w, tau_b, alpha, rule)
}

/// Squared-loss subgradient step followed by soft-thresholding of `W`.
#[allow(clippy::too_many_arguments)]
pub fn subgradient_ista_step<A: Subdifferentiable + ?Sized>(
    model: &PerceptronModel,
    data: &LabeledDataset,
    batch: &[usize],
    act: &A,
    tau_w: f64,
    tau_b: f64,
    alpha: f64,
    rule: ThresholdRule,
) -> Result<PerceptronModel> {
    let grad = squared_gradient(model, data, batch, act)?;
    ista_finish(model, grad, tau_w, tau_b, alpha, rule)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// `tau0 / √k`.
    Diminishing(f64),
}

impl StepSchedule {
    pub fn initial(self) -> f64 {
        match self {
            StepSchedule::Constant(t) | StepSchedule::Diminishing(t) => t,
        }
    }

    pub fn with_initial(self, tau0: f64) -> Self {
        match self {
            StepSchedule::Constant(_) => StepSchedule::Constant(tau0),
            StepSchedule::Diminishing(_) => StepSchedule::Diminishing(tau0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StepSchedule::Constant(_) => "constant",
            StepSchedule::Diminishing(_) => "diminishing",
        }
    }

    fn validate(self) -> Result<()> {
        let t = self.initial();
        if t > 0.0 && t.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(
                "step size",
                alloc::format!("must be positive and finite, got {t}"),
            ))
        }
    }
}

/// Step size at iteration `k ≥ 1`.
pub fn step_size(schedule: StepSchedule, k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::invalid(
            "iteration",
            "step sizes are defined for k >= 1",
        ));
    }
    Ok(match schedule {
        StepSchedule::Constant(t) => t,
        StepSchedule::Diminishing(t) => t / libm::sqrt(k as f64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BatchMode {
    FullBatch,
    /// Contiguous cyclic window; iteration `k` starts at `(k − 1)·size mod s`.
    Deterministic(usize),
    /// `size` distinct indices drawn from a generator keyed on `(seed, k)`.
    Random {
        size: usize,
        seed: u64,
    },
}

impl fmt::Display for BatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BatchMode::FullBatch => f.write_str("full"),
            BatchMode::Deterministic(size) => write!(f, "det:{size}"),
            BatchMode::Random { size, .. } => write!(f, "rand:{size}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BatchPlan {
    pub mode: BatchMode,
    pub samples: usize,
}

impl BatchPlan {
    pub fn full(samples: usize) -> Self {
        Self {
            mode: BatchMode::FullBatch,
            samples,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::EmptyDataset);
        }
        let size = match self.mode {
            BatchMode::FullBatch => return Ok(()),
            BatchMode::Deterministic(size) | BatchMode::Random { size, .. } => size,
        };
        if size == 0 || size > self.samples {
            return Err(Error::invalid(
                "batch size",
                alloc::format!("{size} must be in 1..={}", self.samples),
            ));
        }
        Ok(())
    }
}

/// 0-based sample indices of the batch for iteration `k ≥ 1`, ascending.
pub fn select_batch(plan: &BatchPlan, k: usize) -> Result<Vec<usize>> {
    plan.validate()?;
    if k < 1 {
        return Err(Error::invalid(
            "iteration",
            "batches are defined for k >= 1",
        ));
    }
    let s = plan.samples;
    let mut indices: Vec<usize> = match plan.mode {
        BatchMode::FullBatch => (0..s).collect(),
        BatchMode::Deterministic(size) => {
            let start = ((k - 1) % s) * (size % s) % s;
            (0..size).map(|t| (start + t) % s).collect()
        }
        BatchMode::Random { size, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            index::sample(&mut rng, s, size).into_vec()
        }
    };
    indices.sort_unstable();
    Ok(indices)
}

/// `(1/s) Σ_i L(y_i, σ(Wᵀx_i + b)) + alpha·‖W‖₁`.
pub fn objective<A: Proximal + Subdifferentiable + ?Sized>(
    model: &PerceptronModel,
    data: &LabeledDataset,
    act: &A,
    loss: LossKind,
    alpha: f64,
) -> Result<f64> {
    match loss {
        LossKind::Bregman => objective_with(model, data, alpha, |i, y, z| {
            bregman_loss(act, y, z).map_err(|e| match e {
                Error::OutsideDomain { .. } => Error::OutsideDomain { sample: Some(i) },
                other => other,
            })
        }),
        LossKind::Squared => objective_with(model, data, alpha, |_, y, z| squared_loss(act, y, z)),
    }
}

/// Objective for an activation that may not be proximal; the Bregman data
/// term is only available for proximal ones.
pub fn objective_for_kind(
    model: &PerceptronModel,
    data: &LabeledDataset,
    act: &ActivationKind,
    loss: LossKind,
    alpha: f64,
) -> Result<f64> {
    match (act, loss) {
        (ActivationKind::Proximal(p), _) => objective(model, data, p, loss, alpha),
        (ActivationKind::Heaviside, LossKind::Squared) => {
            objective_with(model, data, alpha, |_, y, z| squared_loss(act, y, z))
        }
        (ActivationKind::Heaviside, LossKind::Bregman) => Err(Error::IncompatibleActivation {
            trainer: "bregman objective",
            activation: act.to_string(),
        }),
    }
}

fn objective_with(
    model: &PerceptronModel,
    data: &LabeledDataset,
    alpha: f64,
    mut loss: impl FnMut(usize, &DenseVector, &DenseVector) -> Result<f64>,
) -> Result<f64> {
    check_alpha(alpha)?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    model.check_dataset(data)?;
    let mut total = 0.0;
    for i in 0..data.len() {
        let mut z = matvec_transposed(&model.weights, data.input(i))?;
        for (zj, &bj) in z.as_mut_slice().iter_mut().zip(model.bias.iter()) {
            *zj += bj;
        }
        total += loss(i, &data.target(i), &z)?;
    }
    Ok(total / data.len() as f64 + alpha * l1_norm(&model.weights))
}

/// Largest eigenvalue of `(1/s) X̃ᵀX̃` with `X̃ = [X 1]`, by power iteration.
///
/// This bounds the Lipschitz constant of the gradient of the batch-averaged
/// Bregman (or squared, identity-activation) loss jointly in `(W, b)`, so
/// `1/L` is a safe constant step for full-batch descent.
pub fn gram_lipschitz(data: &LabeledDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let m = data.features();
    let s = data.len() as f64;
    let mut v = alloc::vec![1.0; m + 1];
    let mut lambda = 0.0;
    for _ in 0..1000 {
        let norm = libm::sqrt(v.iter().map(|a| a * a).sum::<f64>());
        if norm == 0.0 {
            return Ok(0.0);
        }
        v.iter_mut().for_each(|a| *a /= norm);
        let mut next = alloc::vec![0.0; m + 1];
        for i in 0..data.len() {
            let x = data.input(i);
            let proj = x.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() + v[m];
            for (n, &xi) in next.iter_mut().zip(x) {
                *n += proj * xi;
            }
            next[m] += proj;
        }
        next.iter_mut().for_each(|a| *a /= s);
        let estimate = next.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        v = next;
        let converged = (estimate - lambda).abs() <= 1e-12 * estimate.abs();
        lambda = estimate;
        if converged {
            break;
        }
    }
    Ok(lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrainerKind {
    /// Per-sample classic updates in cyclic order with unit steps; one
    /// iteration is one pass over the data.
    ClassicRosenblatt,
    BregmanSGD,
    SubgradientDescent,
    RosenblattISTA,
    SubgradientISTA,
}

impl TrainerKind {
    pub const ALL: [TrainerKind; 5] = [
        TrainerKind::ClassicRosenblatt,
        TrainerKind::BregmanSGD,
        TrainerKind::SubgradientDescent,
        TrainerKind::RosenblattISTA,
        TrainerKind::SubgradientISTA,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrainerKind::ClassicRosenblatt => "classic-rosenblatt",
            TrainerKind::BregmanSGD => "bregman-sgd",
            TrainerKind::SubgradientDescent => "subgradient",
            TrainerKind::RosenblattISTA => "rosenblatt-ista",
            TrainerKind::SubgradientISTA => "subgradient-ista",
        }
    }

    /// The data term this trainer descends.
    pub fn loss(self) -> LossKind {
        match self {
            TrainerKind::ClassicRosenblatt
            | TrainerKind::BregmanSGD
            | TrainerKind::RosenblattISTA => LossKind::Bregman,
            TrainerKind::SubgradientDescent | TrainerKind::SubgradientISTA => LossKind::Squared,
        }
    }
}

impl fmt::Display for TrainerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrainerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TrainerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::invalid(
                    "trainer",
                    alloc::format!(
                        "`{s}` (expected classic-rosenblatt, bregman-sgd, subgradient, rosenblatt-ista or subgradient-ista)"
                    ),
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainerConfig {
    pub kind: TrainerKind,
    pub activation: ActivationKind,
    pub tau_w: StepSchedule,
    pub tau_b: StepSchedule,
    pub batch: BatchMode,
    pub alpha: f64,
    pub threshold: ThresholdRule,
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        self.tau_w.validate()?;
        self.tau_b.validate()?;
        if self.kind != TrainerKind::ClassicRosenblatt && self.activation.as_proximal().is_none() {
            return Err(Error::IncompatibleActivation {
                trainer: self.kind.name(),
                activation: self.activation.to_string(),
            });
        }
        Ok(())
    }
}

/// A model plus the iteration counter and configuration that advance it.
#[derive(Debug, Clone)]
pub struct Trainer {
    config: TrainerConfig,
    model: PerceptronModel,
    iteration: usize,
}

impl Trainer {
    pub fn new(config: TrainerConfig, initial: PerceptronModel) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            model: initial,
            iteration: 0,
        })
    }

    pub fn config(&self) -> &TrainerConfig {
        &self.config
    }

    pub fn model(&self) -> &PerceptronModel {
        &self.model
    }

    pub fn into_model(self) -> PerceptronModel {
        self.model
    }

    /// Completed iterations.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Objective of the current model under this trainer's own data term.
    /// The trained objective. A classic trainer with a step activation is
    /// scored with the squared loss.
    pub fn objective(&self, data: &LabeledDataset) -> Result<f64> {
        let loss = match self.config.activation {
            ActivationKind::Heaviside => LossKind::Squared,
            ActivationKind::Proximal(_) => self.config.kind.loss(),
        };
        objective_for_kind(
            &self.model,
            data,
            &self.config.activation,
            loss,
            self.config.alpha,
        )
    }

    /// Advances by one iteration.
    pub fn step(&mut self, data: &LabeledDataset) -> Result<()> {
        let k = self.iteration + 1;
        let cfg = self.config;
        let next = match (cfg.kind, cfg.activation) {
            (TrainerKind::ClassicRosenblatt, act) => {
                self.model.check_dataset(data)?;
                let mut model = self.model.clone();
                for i in 0..data.len() {
                    model = rosenblatt_step(&model, data.input(i), &data.target(i), &act)?;
                }
                model
            }
            (kind, ActivationKind::Proximal(act)) => {
                let batch = select_batch(
                    &BatchPlan {
                        mode: cfg.batch,
                        samples: data.len(),
                    },
                    k,
                )?;
                let tau_w = step_size(cfg.tau_w, k)?;
                let tau_b = step_size(cfg.tau_b, k)?;
                let m = &self.model;
                match kind {
                    TrainerKind::BregmanSGD => {
                        bregman_sgd_step(m, data, &batch, &act, tau_w, tau_b)?
                    }
                    TrainerKind::SubgradientDescent => regularized_subgradient_step(
                        m, data, &batch, &act, tau_w, tau_b, cfg.alpha,
                    )?,
                    TrainerKind::RosenblattISTA => rosenblatt_ista_step(
                        m,
                        data,
                        &batch,
                        &act,
                        tau_w,
                        tau_b,
                        cfg.alpha,
                        cfg.threshold,
                    )?,
                    TrainerKind::SubgradientISTA => subgradient_ista_step(
                        m,
                        data,
                        &batch,
                        &act,
                        tau_w,
                        tau_b,
                        cfg.alpha,
                        cfg.threshold,
                    )?,
                    TrainerKind::ClassicRosenblatt => unreachable!(),
                }
            }
            (kind, act) => {
                return Err(Error::IncompatibleActivation {
                    trainer: kind.name(),
                    activation: act.to_string(),
                })
            }
        };
        self.model = next;
        self.iteration = k;
        Ok(())
    }
}
