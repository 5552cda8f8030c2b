//! Labeled datasets with one-hot targets, plus a seeded synthetic generator.

use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{DenseMatrix, DenseVector};

/// Images as stored in an IDX file: `count` images of `rows × cols` bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl RawImages {
    pub fn pixels_per_image(&self) -> usize {
        self.rows * self.cols
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let m = self.pixels_per_image();
        &self.pixels[i * m..(i + 1) * m]
    }
}

/// Scales bytes to `[0, 1]` and flattens each image row-major into one row.
pub fn normalize_pixels(raw: &RawImages) -> DenseMatrix {
    let data = raw.pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    DenseMatrix::from_vec(raw.count, raw.pixels_per_image(), data)
        .expect("pixel buffer length matches the image header")
}

/// One row per label with a single 1.0 in the label's column.
pub fn one_hot(labels: &[usize], classes: usize) -> Result<DenseMatrix> {
    let mut out = DenseMatrix::zeros(labels.len(), classes);
    for (i, &label) in labels.iter().enumerate() {
        if label >= classes {
            return Err(Error::LabelOutOfRange {
                index: i,
                label,
                classes,
            });
        }
        out[(i, label)] = 1.0;
    }
    Ok(out)
}

/// Inputs (one row per sample), one-hot targets and the integer labels they encode.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    inputs: DenseMatrix,
    targets: DenseMatrix,
    labels: Vec<usize>,
    classes: usize,
}

impl LabeledDataset {
    pub fn new(inputs: DenseMatrix, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if inputs.rows() != labels.len() {
            return Err(Error::invalid(
                "dataset",
                alloc::format!("{} input rows but {} labels", inputs.rows(), labels.len()),
            ));
        }
        if classes == 0 {
            return Err(Error::invalid("dataset", "at least one class is required"));
        }
        let targets = one_hot(&labels, classes)?;
        Ok(Self {
            inputs,
            targets,
            labels,
            classes,
        })
    }

    /// A dataset with arbitrary real targets (one row per sample). Each
    /// label is the argmax of its target row.
    pub fn from_targets(inputs: DenseMatrix, targets: DenseMatrix) -> Result<Self> {
        if inputs.rows() != targets.rows() {
            return Err(Error::invalid(
                "dataset",
                alloc::format!(
                    "{} input rows but {} target rows",
                    inputs.rows(),
                    targets.rows()
                ),
            ));
        }
        if targets.cols() == 0 {
            return Err(Error::invalid(
                "dataset",
                "targets need at least one column",
            ));
        }
        let labels = (0..targets.rows())
            .map(|i| DenseVector::from(targets.row(i)).argmax().unwrap_or(0))
            .collect();
        Ok(Self {
            classes: targets.cols(),
            inputs,
            targets,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Input dimension `m`.
    pub fn features(&self) -> usize {
        self.inputs.cols()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn inputs(&self) -> &DenseMatrix {
        &self.inputs
    }

    pub fn targets(&self) -> &DenseMatrix {
        &self.targets
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn input(&self, i: usize) -> &[f64] {
        self.inputs.row(i)
    }

    pub fn target(&self, i: usize) -> DenseVector {
        DenseVector::from(self.targets.row(i))
    }

    /// Rows `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            inputs: self.inputs.select_rows(indices),
            targets: self.targets.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }

    /// The first `at` samples and the rest.
    pub fn split_at(&self, at: usize) -> (LabeledDataset, LabeledDataset) {
        let at = at.min(self.len());
        let head: Vec<usize> = (0..at).collect();
        let tail: Vec<usize> = (at..self.len()).collect();
        (self.select(&head), self.select(&tail))
    }

    /// Seeded selection of `count` samples without replacement.
    pub fn subsample(&self, count: usize, seed: u64) -> Result<LabeledDataset> {
        if count > self.len() {
            return Err(Error::invalid(
                "subsample count",
                alloc::format!("{count} exceeds the {} available samples", self.len()),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picked = index::sample(&mut rng, self.len(), count).into_vec();
        Ok(self.select(&picked))
    }

    /// Multiplies every input entry by `factor`.
    pub fn scale_inputs(&self, factor: f64) -> LabeledDataset {
        LabeledDataset {
            inputs: self.inputs.scale(factor),
            ..self.clone()
        }
    }
}

/// Class-template data: each class gets a random template in `[0,1]^m` and
/// every sample is its class template plus uniform noise in
/// `[-noise, noise]`, clipped back to `[0, 1]`. Labels cycle through the
/// classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub samples: usize,
    pub features: usize,
    pub classes: usize,
    pub noise: f64,
}

pub fn synthetic_dataset(spec: &SyntheticSpec, seed: u64) -> Result<LabeledDataset> {
    if spec.samples == 0 || spec.features == 0 || spec.classes == 0 {
        return Err(Error::invalid(
            "synthetic spec",
            "samples, features and classes must be positive",
        ));
    }
    if !(spec.noise.is_finite() && spec.noise >= 0.0) {
        return Err(Error::invalid(
            "synthetic noise",
            "must be a nonnegative number",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let templates: Vec<f64> = (0..spec.classes * spec.features)
        .map(|_| rng.gen::<f64>())
        .collect();

    let mut data = Vec::with_capacity(spec.samples * spec.features);
    let mut labels = Vec::with_capacity(spec.samples);
    for i in 0..spec.samples {
        let label = i % spec.classes;
        let template = &templates[label * spec.features..(label + 1) * spec.features];
        for &t in template {
            let jitter = if spec.noise > 0.0 {
                rng.gen_range(-spec.noise..=spec.noise)
            } else {
                0.0
            };
            data.push((t + jitter).clamp(0.0, 1.0));
        }
        labels.push(label);
    }
    let inputs = DenseMatrix::from_vec(spec.samples, spec.features, data)?;
    LabeledDataset::new(inputs, labels, spec.classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn normalize_examples() {
        let raw = RawImages {
            count: 1,
            rows: 1,
            cols: 3,
            pixels: vec![255, 0, 51],
        };
        let x = normalize_pixels(&raw);
        assert_eq!(x.shape(), (1, 3));
        assert_eq!(x.as_slice()[0], 1.0);
        assert_eq!(x.as_slice()[1], 0.0);
        assert!((x.as_slice()[2] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn normalize_flattens_row_major() {
        let raw = RawImages {
            count: 2,
            rows: 2,
            cols: 2,
            pixels: vec![0, 255, 0, 0, 0, 0, 255, 0],
        };
        let x = normalize_pixels(&raw);
        assert_eq!(x.shape(), (2, 4));
        assert_eq!(x.row(0), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(x.row(1), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn one_hot_examples() {
        let y = one_hot(&[3], 10).unwrap();
        assert_eq!(
            y.row(0),
            &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(one_hot(&[0, 1], 2).unwrap(), DenseMatrix::identity(2));
        assert_eq!(
            one_hot(&[1, 10], 10),
            Err(Error::LabelOutOfRange {
                index: 1,
                label: 10,
                classes: 10
            })
        );
    }

    fn small() -> LabeledDataset {
        synthetic_dataset(
            &SyntheticSpec {
                samples: 20,
                features: 3,
                classes: 4,
                noise: 0.1,
            },
            5,
        )
        .unwrap()
    }

    #[test]
    fn subsample_full_is_permutation() {
        let d = small();
        let p = d.subsample(d.len(), 1).unwrap();
        let mut a = d.labels().to_vec();
        let mut b = p.labels().to_vec();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn subsample_is_seeded_and_aligned() {
        let d = small();
        let a = d.subsample(7, 42).unwrap();
        assert_eq!(a, d.subsample(7, 42).unwrap());
        assert_eq!(a.len(), 7);
        for i in 0..a.len() {
            let label = a.labels()[i];
            assert_eq!(a.targets().row(i)[label], 1.0);
            let src = (0..d.len()).find(|&j| d.input(j) == a.input(i)).unwrap();
            assert_eq!(d.labels()[src], label);
        }
        assert!(d.subsample(21, 0).is_err());
    }

    #[test]
    fn synthetic_noiseless_repeats_templates() {
        let spec = SyntheticSpec {
            samples: 4,
            features: 5,
            classes: 2,
            noise: 0.0,
        };
        let d = synthetic_dataset(&spec, 9).unwrap();
        assert_eq!(d.input(0), d.input(2));
        assert_eq!(d.input(1), d.input(3));
        assert_ne!(d.input(0), d.input(1));
        assert_eq!(d, synthetic_dataset(&spec, 9).unwrap());
        assert_ne!(d, synthetic_dataset(&spec, 10).unwrap());
    }

    #[test]
    fn synthetic_inputs_stay_in_unit_box() {
        let spec = SyntheticSpec {
            samples: 50,
            features: 8,
            classes: 3,
            noise: 0.8,
        };
        let d = synthetic_dataset(&spec, 1).unwrap();
        assert!(d
            .inputs()
            .as_slice()
            .iter()
            .all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn dataset_rejects_mismatched_labels() {
        let x = DenseMatrix::zeros(2, 2);
        assert!(LabeledDataset::new(x.clone(), vec![0], 2).is_err());
        assert!(LabeledDataset::new(x, vec![0, 2], 2).is_err());
    }
}
