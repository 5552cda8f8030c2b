//! Generalized perceptrons `y = σ(Wᵀx + b)` with proximal activations,
//! trained through the Bregman loss whose gradient never involves `σ′`.
//!
//! The crate is `no_std` (it needs `alloc`). Anything touching files or the
//! command line lives in the `bregman-perceptron` crate.

#![no_std]

extern crate alloc;

pub mod activation;
pub mod data;
pub mod error;
pub mod loss;
pub mod metrics;
pub mod optim;
pub mod tensor;

pub use activation::{
    Activation, ActivationKind, ExtendedReal, Heaviside, Proximal, ProximalActivation,
    Subdifferentiable,
};
pub use data::{LabeledDataset, RawImages, SyntheticSpec};
pub use error::{Error, Result};
pub use loss::LossKind;
pub use optim::{
    BatchMode, BatchPlan, PerceptronModel, StepSchedule, ThresholdRule, Trainer, TrainerConfig,
    TrainerKind,
};
pub use tensor::{DenseMatrix, DenseVector, ShapeError};
