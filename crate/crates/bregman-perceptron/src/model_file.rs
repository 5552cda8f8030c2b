//! JSON model files.
//!
//! ```json
//! {
//!   "format": "bregman-perceptron-model/1",
//!   "inputs": 784, "outputs": 10,
//!   "activation": "relu",
//!   "weights": [...],   // row-major, inputs × outputs
//!   "bias": [...],
//!   "metadata": { "trainer": "...", "iterations": 200, ... }
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use bregman_perceptron_core::{ActivationKind, DenseMatrix, DenseVector, PerceptronModel};
use serde::{Deserialize, Serialize};

pub const FORMAT: &str = "bregman-perceptron-model/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub inputs: usize,
    pub outputs: usize,
    pub activation: String,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("unsupported model format `{0}`")]
    Format(String),
    #[error("invalid model: {0}")]
    Invalid(String),
}

impl ModelFile {
    pub fn new(
        model: &PerceptronModel,
        activation: &ActivationKind,
        metadata: BTreeMap<String, serde_json::Value>,
    ) -> Self {
        Self {
            format: FORMAT.to_string(),
            inputs: model.inputs(),
            outputs: model.outputs(),
            activation: activation.to_string(),
            weights: model.weights().as_slice().to_vec(),
            bias: model.bias().as_slice().to_vec(),
            metadata,
        }
    }

    pub fn model(&self) -> Result<(PerceptronModel, ActivationKind), ModelFileError> {
        if self.format != FORMAT {
            return Err(ModelFileError::Format(self.format.clone()));
        }
        let act: ActivationKind = self
            .activation
            .parse()
            .map_err(|e| ModelFileError::Invalid(format!("{e}")))?;
        let weights = DenseMatrix::from_vec(self.inputs, self.outputs, self.weights.clone())
            .map_err(|e| ModelFileError::Invalid(e.to_string()))?;
        let model = PerceptronModel::new(weights, DenseVector::from_vec(self.bias.clone()))
            .map_err(|e| ModelFileError::Invalid(e.to_string()))?;
        Ok((model, act))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelFileError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelFileError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_preserves_model() {
        let model = PerceptronModel::random_init(5, 3, 1);
        let act: ActivationKind = "softshrink:0.5".parse().unwrap();
        let mut meta = BTreeMap::new();
        meta.insert("trainer".into(), "rosenblatt-ista".into());
        let file = ModelFile::new(&model, &act, meta);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        file.save(&path).unwrap();
        let back = ModelFile::load(&path).unwrap();
        assert_eq!(back, file);
        let (m, a) = back.model().unwrap();
        assert_eq!(m, model);
        assert_eq!(a, act);
    }

    #[test]
    fn rejects_inconsistent_shapes() {
        let mut file = ModelFile::new(
            &PerceptronModel::zeros(2, 2),
            &ActivationKind::Heaviside,
            BTreeMap::new(),
        );
        file.bias.push(0.0);
        assert!(matches!(file.model(), Err(ModelFileError::Invalid(_))));
        file.format = "other".into();
        assert!(matches!(file.model(), Err(ModelFileError::Format(_))));
    }
}
