use alloc::string::String;
use core::fmt;

use crate::tensor::ShapeError;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    Shape(ShapeError),
    /// A target lies outside `dom(Ψ)`; `sample` is its row when known.
    OutsideDomain {
        sample: Option<usize>,
    },
    InvalidParameter {
        name: &'static str,
        reason: String,
    },
    /// The trainer needs a capability the activation does not have.
    IncompatibleActivation {
        trainer: &'static str,
        activation: String,
    },
    EmptyDataset,
    LabelOutOfRange {
        index: usize,
        label: usize,
        classes: usize,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape(e) => e.fmt(f),
            Error::OutsideDomain { sample: Some(i) } => {
                write!(f, "target of sample {i} lies outside the penalty domain")
            }
            Error::OutsideDomain { sample: None } => {
                f.write_str("target lies outside the penalty domain")
            }
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Error::IncompatibleActivation {
                trainer,
                activation,
            } => {
                write!(
                    f,
                    "trainer {trainer} cannot be used with activation {activation}"
                )
            }
            Error::EmptyDataset => f.write_str("dataset is empty"),
            Error::LabelOutOfRange {
                index,
                label,
                classes,
            } => write!(
                f,
                "label {label} at index {index} is outside [0, {classes})"
            ),
        }
    }
}

impl core::error::Error for Error {}

impl From<ShapeError> for Error {
    fn from(e: ShapeError) -> Self {
        Error::Shape(e)
    }
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
