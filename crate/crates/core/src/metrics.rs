//! Classification accuracy.

use crate::activation::Activation;
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::optim::{forward, PerceptronModel};

/// Fraction of samples whose label equals `argmax_j σ(z)_j` (lowest index on ties).
pub fn accuracy<A: Activation + ?Sized>(
    model: &PerceptronModel,
    data: &LabeledDataset,
    act: &A,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut correct = 0usize;
    for (i, &label) in data.labels().iter().enumerate() {
        let (_, out) = forward(model, data.input(i), act)?;
        if out.argmax() == Some(label) {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::ProximalActivation::{Identity, Rectifier};
    use crate::tensor::{DenseMatrix, DenseVector};
    use alloc::vec;

    #[test]
    fn perfect_classifier() {
        let d = LabeledDataset::new(DenseMatrix::identity(3), vec![0, 1, 2], 3).unwrap();
        let m = PerceptronModel::new(DenseMatrix::identity(3), DenseVector::zeros(3)).unwrap();
        assert_eq!(accuracy(&m, &d, &Rectifier).unwrap(), 1.0);
    }

    #[test]
    fn ties_go_to_index_zero() {
        let d = LabeledDataset::new(DenseMatrix::identity(3), vec![1, 2, 1], 3).unwrap();
        assert_eq!(
            accuracy(&PerceptronModel::zeros(3, 3), &d, &Rectifier).unwrap(),
            0.0
        );
    }

    #[test]
    fn counts_fraction() {
        let d = LabeledDataset::new(DenseMatrix::identity(2), vec![0, 0], 2).unwrap();
        let m = PerceptronModel::new(DenseMatrix::identity(2), DenseVector::zeros(2)).unwrap();
        assert_eq!(accuracy(&m, &d, &Identity).unwrap(), 0.5);
        let empty = LabeledDataset::new(DenseMatrix::zeros(0, 2), vec![], 2).unwrap();
        assert_eq!(accuracy(&m, &empty, &Identity), Err(Error::EmptyDataset));
    }
}
