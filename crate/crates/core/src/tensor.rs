//! Dense row-major vectors and matrices, and the few kernels the trainers use.
//!
//! Every reduction runs in ascending index order so that results are
//! reproducible bit for bit across runs and across algebraically equal
//! update paths.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

/// Shape disagreement between two operands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeError {
    pub op: &'static str,
    pub left: (usize, usize),
    pub right: (usize, usize),
}

impl core::error::Error for ShapeError {}

impl fmt::Display for ShapeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: incompatible shapes {}x{} and {}x{}",
            self.op, self.left.0, self.left.1, self.right.0, self.right.1
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    data: Vec<f64>,
}

impl DenseVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![0.0; len],
        }
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        Self { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn iter(&self) -> core::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Componentwise `self - other`.
    pub fn sub(&self, other: &DenseVector) -> Result<DenseVector, ShapeError> {
        self.check_len("sub", other)?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    /// Componentwise `self + other`.
    pub fn add(&self, other: &DenseVector) -> Result<DenseVector, ShapeError> {
        self.check_len("add", other)?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    /// Componentwise product.
    pub fn hadamard(&self, other: &DenseVector) -> Result<DenseVector, ShapeError> {
        self.check_len("hadamard", other)?;
        Ok(self.zip_map(other, |a, b| a * b))
    }

    pub fn dot(&self, other: &DenseVector) -> Result<f64, ShapeError> {
        self.check_len("dot", other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (a, b)| acc + a * b))
    }

    /// `½‖v‖²`.
    pub fn half_squared_norm(&self) -> f64 {
        0.5 * self.data.iter().fold(0.0, |acc, v| acc + v * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseVector {
        DenseVector::from_vec(self.data.iter().map(|&v| f(v)).collect())
    }

    /// Index of the largest entry; ties resolve to the lowest index.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (j, &v) in self.data.iter().enumerate() {
            match best {
                Some((_, b)) if v <= b => {}
                _ => best = Some((j, v)),
            }
        }
        best.map(|(j, _)| j)
    }

    fn zip_map(&self, other: &DenseVector, f: impl Fn(f64, f64) -> f64) -> DenseVector {
        DenseVector::from_vec(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    fn check_len(&self, op: &'static str, other: &DenseVector) -> Result<(), ShapeError> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(ShapeError {
                op,
                left: (self.len(), 1),
                right: (other.len(), 1),
            })
        }
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(data: Vec<f64>) -> Self {
        Self::from_vec(data)
    }
}

impl From<&[f64]> for DenseVector {
    fn from(data: &[f64]) -> Self {
        Self::from_vec(data.to_vec())
    }
}

impl Index<usize> for DenseVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for DenseVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            data: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, ShapeError> {
        if rows * cols != data.len() {
            return Err(ShapeError {
                op: "from_vec",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        Ok(Self { data, rows, cols })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, ShapeError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(ShapeError {
                    op: "from_rows",
                    left: (1, cols),
                    right: (1, r.len()),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            data,
            rows: rows.len(),
            cols,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        DenseMatrix {
            data: self.data.iter().map(|&v| f(v)).collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }

    pub fn scale(&self, c: f64) -> DenseMatrix {
        self.map(|v| c * v)
    }

    /// Number of entries that are exactly zero.
    pub fn count_zeros(&self) -> usize {
        self.data.iter().filter(|&&v| v == 0.0).count()
    }

    /// Gathers the listed rows into a new matrix, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        DenseMatrix {
            data,
            rows: indices.len(),
            cols: self.cols,
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// `Wᵀx` for `W` of shape m×n and `x` of length m, without forming `Wᵀ`.
///
/// `result[j] = Σ_i W[i,j]·x[i]`, summed over ascending `i`.
pub fn matvec_transposed(w: &DenseMatrix, x: &[f64]) -> Result<DenseVector, ShapeError> {
    if x.len() != w.rows {
        return Err(ShapeError {
            op: "matvec_transposed",
            left: w.shape(),
            right: (x.len(), 1),
        });
    }
    let mut out = vec![0.0; w.cols];
    for (i, &xi) in x.iter().enumerate() {
        for (o, &wij) in out.iter_mut().zip(w.row(i)) {
            *o += wij * xi;
        }
    }
    Ok(DenseVector::from_vec(out))
}

/// Rank-one term `x eᵀ` of shape m×n, laid out so it adds directly onto `W`.
pub fn outer_product(e: &[f64], x: &[f64]) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(x.len(), e.len());
    accumulate_outer(&mut out, e, x);
    out
}

/// `acc[i,j] += x[i]·e[j]`. Shapes are the caller's responsibility.
pub(crate) fn accumulate_outer(acc: &mut DenseMatrix, e: &[f64], x: &[f64]) {
    debug_assert_eq!(acc.shape(), (x.len(), e.len()));
    let cols = acc.cols;
    for (i, &xi) in x.iter().enumerate() {
        let row = &mut acc.data[i * cols..(i + 1) * cols];
        for (a, &ej) in row.iter_mut().zip(e) {
            *a += xi * ej;
        }
    }
}

/// Elementwise `B + alpha·A`.
pub fn axpy_matrix(
    alpha: f64,
    a: &DenseMatrix,
    b: &DenseMatrix,
) -> Result<DenseMatrix, ShapeError> {
    if a.shape() != b.shape() {
        return Err(ShapeError {
            op: "axpy_matrix",
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(DenseMatrix {
        data: b
            .data
            .iter()
            .zip(&a.data)
            .map(|(&bv, &av)| bv + alpha * av)
            .collect(),
        rows: b.rows,
        cols: b.cols,
    })
}

/// Elementwise `b + alpha·a` for vectors.
pub fn axpy_vector(
    alpha: f64,
    a: &DenseVector,
    b: &DenseVector,
) -> Result<DenseVector, ShapeError> {
    if a.len() != b.len() {
        return Err(ShapeError {
            op: "axpy_vector",
            left: (a.len(), 1),
            right: (b.len(), 1),
        });
    }
    Ok(b.zip_map(a, |bv, av| bv + alpha * av))
}

/// Entrywise ℓ¹ norm `Σ_{i,j} |W[i,j]|`.
pub fn l1_norm(w: &DenseMatrix) -> f64 {
    w.data.iter().fold(0.0, |acc, v| acc + v.abs())
}
