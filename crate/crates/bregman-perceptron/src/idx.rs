//! IDX container files (the MNIST / Fashion-MNIST format).
//!
//! Layout: a big-endian `u32` magic (`0x00000803` for 3-d unsigned-byte image
//! stacks, `0x00000801` for 1-d label vectors), one big-endian `u32` per
//! dimension, then the raw bytes. Files ending in `.gz` or starting with the
//! gzip magic are decompressed transparently.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use bregman_perceptron_core::{LabeledDataset, RawImages};
use flate2::read::GzDecoder;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

pub const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
pub const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
pub const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
pub const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";
pub const EXPECTED_FILES: [&str; 4] = [TRAIN_IMAGES, TRAIN_LABELS, TEST_IMAGES, TEST_LABELS];

#[derive(Debug, thiserror::Error)]
pub enum IdxError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic {
        path: PathBuf,
        expected: u32,
        found: u32,
    },
    #[error("{path}: truncated, header promises {expected} bytes but {actual} follow")]
    Truncated {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },
    #[error("{path}: dimensions {dims:?} overflow the addressable size")]
    DimensionOverflow { path: PathBuf, dims: Vec<u32> },
    #[error("missing dataset files in {dir}: {}", missing.join(", "))]
    MissingFiles { dir: PathBuf, missing: Vec<String> },
}

fn read_all(path: &Path) -> Result<Vec<u8>, IdxError> {
    let io_err = |source| IdxError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut raw = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(io_err)?;
    let gz = path.extension().is_some_and(|e| e == "gz") || raw.starts_with(&[0x1f, 0x8b]);
    if gz {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(io_err)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Validates the magic and `ndims` dimension words; returns the dimensions
/// and the payload that follows them.
fn parse_header<'a>(
    path: &Path,
    bytes: &'a [u8],
    magic: u32,
    ndims: usize,
) -> Result<(Vec<u32>, &'a [u8]), IdxError> {
    let header_len = 4 * (1 + ndims);
    if bytes.len() < 4 {
        return Err(IdxError::Truncated {
            path: path.to_path_buf(),
            expected: header_len,
            actual: bytes.len(),
        });
    }
    let word = |i: usize| u32::from_be_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
    let found = word(0);
    if found != magic {
        return Err(IdxError::BadMagic {
            path: path.to_path_buf(),
            expected: magic,
            found,
        });
    }
    if bytes.len() < header_len {
        return Err(IdxError::Truncated {
            path: path.to_path_buf(),
            expected: header_len,
            actual: bytes.len(),
        });
    }
    let dims: Vec<u32> = (1..=ndims).map(word).collect();
    let payload = &bytes[header_len..];
    let expected = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
        .ok_or_else(|| IdxError::DimensionOverflow {
            path: path.to_path_buf(),
            dims: dims.clone(),
        })?;
    if payload.len() < expected {
        return Err(IdxError::Truncated {
            path: path.to_path_buf(),
            expected,
            actual: payload.len(),
        });
    }
    Ok((dims, &payload[..expected]))
}

pub fn load_idx_images(path: impl AsRef<Path>) -> Result<RawImages, IdxError> {
    let path = path.as_ref();
    let bytes = read_all(path)?;
    let (dims, payload) = parse_header(path, &bytes, IMAGES_MAGIC, 3)?;
    Ok(RawImages {
        count: dims[0] as usize,
        rows: dims[1] as usize,
        cols: dims[2] as usize,
        pixels: payload.to_vec(),
    })
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<usize>, IdxError> {
    let path = path.as_ref();
    let bytes = read_all(path)?;
    let (_, payload) = parse_header(path, &bytes, LABELS_MAGIC, 1)?;
    Ok(payload.iter().map(|&b| usize::from(b)).collect())
}

pub fn write_idx_images(path: impl AsRef<Path>, images: &RawImages) -> io::Result<()> {
    let mut f = io::BufWriter::new(File::create(path)?);
    f.write_all(&IMAGES_MAGIC.to_be_bytes())?;
    for d in [images.count, images.rows, images.cols] {
        f.write_all(&u32::try_from(d).map_err(io::Error::other)?.to_be_bytes())?;
    }
    f.write_all(&images.pixels)?;
    f.flush()
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> io::Result<()> {
    let mut f = io::BufWriter::new(File::create(path)?);
    f.write_all(&LABELS_MAGIC.to_be_bytes())?;
    f.write_all(
        &u32::try_from(labels.len())
            .map_err(io::Error::other)?
            .to_be_bytes(),
    )?;
    f.write_all(labels)?;
    f.flush()
}

/// `dir/name`, or `dir/name.gz` when only the compressed file exists.
fn locate(dir: &Path, name: &str) -> Option<PathBuf> {
    let plain = dir.join(name);
    if plain.is_file() {
        return Some(plain);
    }
    let gz = dir.join(format!("{name}.gz"));
    gz.is_file().then_some(gz)
}

/// Paths of the four standard files, or the list of those missing.
pub fn locate_dataset(dir: &Path) -> Result<[PathBuf; 4], IdxError> {
    let found: Vec<Option<PathBuf>> = EXPECTED_FILES.iter().map(|n| locate(dir, n)).collect();
    let missing: Vec<String> = EXPECTED_FILES
        .iter()
        .zip(&found)
        .filter(|(_, p)| p.is_none())
        .map(|(n, _)| n.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(IdxError::MissingFiles {
            dir: dir.to_path_buf(),
            missing,
        });
    }
    let mut it = found.into_iter().map(Option::unwrap);
    Ok(std::array::from_fn(|_| it.next().unwrap()))
}

/// Train and test splits of an IDX dataset directory, pixels scaled to `[0, 1]`.
pub struct IdxDataset {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error(transparent)]
    Idx(#[from] IdxError),
    #[error("{0}")]
    Dataset(bregman_perceptron_core::Error),
}

pub fn load_dataset(dir: &Path, classes: usize) -> Result<IdxDataset, LoadError> {
    let [train_x, train_y, test_x, test_y] = locate_dataset(dir)?;
    let split = |xp: &Path, yp: &Path| -> Result<LabeledDataset, LoadError> {
        let images = load_idx_images(xp)?;
        let labels = load_idx_labels(yp)?;
        let inputs = bregman_perceptron_core::data::normalize_pixels(&images);
        LabeledDataset::new(inputs, labels, classes).map_err(LoadError::Dataset)
    };
    Ok(IdxDataset {
        train: split(&train_x, &train_y)?,
        test: split(&test_x, &test_y)?,
    })
}
