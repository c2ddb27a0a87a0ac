//! Dense third-order tensors and the matrix kernels the factorization needs.
//!
//! Storage is a single flat `Vec<f64>`. Tensors are laid out with the first
//! index slowest: entry `(i, j, k)` of an `I x J x K` tensor lives at
//! `(i * J + j) * K + k`. Matrices are row-major.
//!
//! Unfoldings follow the Kolda-Bader convention. The mode-n fibers become
//! the columns of the unfolded matrix and the remaining indices enumerate
//! columns with the earlier index varying fastest:
//!
//! | mode | shape        | column of `x[i][j][k]` |
//! |------|--------------|------------------------|
//! | 1    | `I x (J*K)`  | `j + k * J`            |
//! | 2    | `J x (I*K)`  | `i + k * I`            |
//! | 3    | `K x (I*J)`  | `i + j * I`            |
//!
//! With this convention `X_(1) = A diag(lambda) (C ⊙ B)^T`, where `⊙` is
//! [`khatri_rao`], and likewise `X_(2) = B (C ⊙ A)^T`, `X_(3) = C (B ⊙ A)^T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TENSOR_FORMAT: &str = "ntf-dense-tensor3";
pub const TENSOR_LAYOUT: &str = "row-major-ijk";
pub const TENSOR_VERSION: u32 = 1;

/// Row-major dense matrix of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixWire")]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl TryFrom<MatrixWire> for DenseMatrix {
    type Error = Error;

    fn try_from(w: MatrixWire) -> Result<Self> {
        DenseMatrix::from_vec(w.rows, w.cols, w.values)
    }
}

impl DenseMatrix {
    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::shape(format!(
                "matrix dims must be positive, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::shape(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        check_finite(&values)?;
        Ok(Self { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dims must be positive");
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.values[r * cols + c] = f(r, c);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    /// Builds a matrix from a list of equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::shape("ragged rows"));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
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

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.values[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn set_column(&mut self, c: usize, col: &[f64]) {
        assert_eq!(col.len(), self.rows);
        for (r, v) in col.iter().enumerate() {
            self.set(r, c, *v);
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let dst = &mut out.values[r * other.cols..(r + 1) * other.cols];
            for (p, &a) in self.row(r).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (d, &b) in dst.iter_mut().zip(other.row(p)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self^T * self`.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut out = Self::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for a in 0..n {
                let ra = row[a];
                if ra == 0.0 {
                    continue;
                }
                for b in a..n {
                    out.values[a * n + b] += ra * row[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                out.values[a * n + b] = out.values[b * n + a];
            }
        }
        out
    }

    /// Elementwise (Hadamard) product.
    pub fn hadamard(&self, other: &DenseMatrix) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::shape("hadamard operands differ in shape"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            values,
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Dense `I x J x K` tensor (players x features x matches in the pipeline).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorWire", into = "TensorWire")]
pub struct DenseTensor3 {
    dims: (usize, usize, usize),
    values: Vec<f64>,
}

/// On-disk JSON container. `values` uses the first-index-slowest layout.
#[derive(Serialize, Deserialize)]
struct TensorWire {
    format: String,
    version: u32,
    layout: String,
    dims: [usize; 3],
    values: Vec<f64>,
}

impl TryFrom<TensorWire> for DenseTensor3 {
    type Error = Error;

    fn try_from(w: TensorWire) -> Result<Self> {
        if w.format != TENSOR_FORMAT {
            return Err(Error::InvalidArgument(format!(
                "unknown tensor format {:?}",
                w.format
            )));
        }
        if w.version != TENSOR_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported tensor version {}",
                w.version
            )));
        }
        if w.layout != TENSOR_LAYOUT {
            return Err(Error::InvalidArgument(format!(
                "unsupported layout {:?}",
                w.layout
            )));
        }
        DenseTensor3::from_vec((w.dims[0], w.dims[1], w.dims[2]), w.values)
    }
}

impl From<DenseTensor3> for TensorWire {
    fn from(t: DenseTensor3) -> Self {
        TensorWire {
            format: TENSOR_FORMAT.to_string(),
            version: TENSOR_VERSION,
            layout: TENSOR_LAYOUT.to_string(),
            dims: [t.dims.0, t.dims.1, t.dims.2],
            values: t.values,
        }
    }
}

impl DenseTensor3 {
    pub fn from_vec(dims: (usize, usize, usize), values: Vec<f64>) -> Result<Self> {
        let (i, j, k) = dims;
        if i == 0 || j == 0 || k == 0 {
            return Err(Error::shape(format!(
                "tensor dims must be positive, got {i}x{j}x{k}"
            )));
        }
        if values.len() != i * j * k {
            return Err(Error::shape(format!(
                "{i}x{j}x{k} tensor needs {} values, got {}",
                i * j * k,
                values.len()
            )));
        }
        check_finite(&values)?;
        Ok(Self { dims, values })
    }

    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        assert!(
            dims.0 > 0 && dims.1 > 0 && dims.2 > 0,
            "tensor dims must be positive"
        );
        Self {
            dims,
            values: vec![0.0; dims.0 * dims.1 * dims.2],
        }
    }

    pub fn from_fn(
        dims: (usize, usize, usize),
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut t = Self::zeros(dims);
        for i in 0..dims.0 {
            for j in 0..dims.1 {
                for k in 0..dims.2 {
                    let idx = t.offset(i, j, k);
                    t.values[idx] = f(i, j, k);
                }
            }
        }
        t
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims.1 + j) * self.dims.2 + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let idx = self.offset(i, j, k);
        self.values[idx] = v;
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// Largest entrywise difference; infinite when the shapes differ.
    pub fn max_abs_diff(&self, other: &DenseTensor3) -> f64 {
        if self.dims != other.dims {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(idx) => Err(Error::NonFinite(idx)),
        None => Ok(()),
    }
}

fn check_mode(mode: usize) -> Result<()> {
    if (1..=3).contains(&mode) {
        Ok(())
    } else {
        Err(Error::InvalidMode(mode))
    }
}

/// Column of `x[i][j][k]` in the mode-n unfolding, with its row.
#[inline]
fn unfolded_position(
    mode: usize,
    dims: (usize, usize, usize),
    i: usize,
    j: usize,
    k: usize,
) -> (usize, usize) {
    let (di, dj, _) = dims;
    match mode {
        1 => (i, j + k * dj),
        2 => (j, i + k * di),
        _ => (k, i + j * di),
    }
}

fn unfolded_shape(mode: usize, dims: (usize, usize, usize)) -> (usize, usize) {
    let (i, j, k) = dims;
    match mode {
        1 => (i, j * k),
        2 => (j, i * k),
        _ => (k, i * j),
    }
}

/// Mode-n matricization, `mode` in `{1, 2, 3}`.
pub fn unfold(t: &DenseTensor3, mode: usize) -> Result<DenseMatrix> {
    check_mode(mode)?;
    let dims = t.dims();
    let (rows, cols) = unfolded_shape(mode, dims);
    let mut out = DenseMatrix::zeros(rows, cols);
    for i in 0..dims.0 {
        for j in 0..dims.1 {
            for k in 0..dims.2 {
                let (r, c) = unfolded_position(mode, dims, i, j, k);
                out.values[r * cols + c] = t.get(i, j, k);
            }
        }
    }
    Ok(out)
}

/// Inverse of [`unfold`].
pub fn fold(m: &DenseMatrix, mode: usize, dims: (usize, usize, usize)) -> Result<DenseTensor3> {
    check_mode(mode)?;
    if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 {
        return Err(Error::shape("tensor dims must be positive"));
    }
    let expected = unfolded_shape(mode, dims);
    if m.shape() != expected {
        return Err(Error::shape(format!(
            "mode-{mode} fold to {dims:?} needs a {}x{} matrix, got {}x{}",
            expected.0,
            expected.1,
            m.rows(),
            m.cols()
        )));
    }
    let mut t = DenseTensor3::zeros(dims);
    for i in 0..dims.0 {
        for j in 0..dims.1 {
            for k in 0..dims.2 {
                let (r, c) = unfolded_position(mode, dims, i, j, k);
                t.set(i, j, k, m.get(r, c));
            }
        }
    }
    Ok(t)
}

/// Column-wise Kronecker product. Row `ia * b.rows + ib` of column `r` is
/// `a[ia][r] * b[ib][r]`.
pub fn khatri_rao(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols() != b.cols() {
        return Err(Error::shape(format!(
            "khatri-rao needs equal column counts, got {} and {}",
            a.cols(),
            b.cols()
        )));
    }
    let r = a.cols();
    let mut out = DenseMatrix::zeros(a.rows() * b.rows(), r);
    for ia in 0..a.rows() {
        let arow = a.row(ia);
        for ib in 0..b.rows() {
            let brow = b.row(ib);
            let dst = ia * b.rows() + ib;
            for c in 0..r {
                out.values[dst * r + c] = arow[c] * brow[c];
            }
        }
    }
    Ok(out)
}

/// Sum of weighted rank-one tensors `sum_r w_r a_r ∘ b_r ∘ c_r`.
pub fn kruskal_tensor(
    weights: &[f64],
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
) -> Result<DenseTensor3> {
    let rank = weights.len();
    if a.cols() != rank || b.cols() != rank || c.cols() != rank {
        return Err(Error::shape(format!(
            "factor column counts ({}, {}, {}) do not match {} weights",
            a.cols(),
            b.cols(),
            c.cols(),
            rank
        )));
    }
    let dims = (a.rows(), b.rows(), c.rows());
    let mut out = DenseTensor3::zeros(dims);
    let mut bc = vec![0.0; rank];
    for j in 0..dims.1 {
        for k in 0..dims.2 {
            for r in 0..rank {
                bc[r] = weights[r] * b.get(j, r) * c.get(k, r);
            }
            for i in 0..dims.0 {
                let v: f64 = a.row(i).iter().zip(&bc).map(|(x, y)| x * y).sum();
                out.set(i, j, k, v);
            }
        }
    }
    Ok(out)
}

pub fn frobenius_norm(t: &DenseTensor3) -> f64 {
    t.values.iter().map(|v| v * v).sum::<f64>().sqrt()
}
