//! Dense 3-D tensors and the mode-n algebra every other module consumes.
//!
//! Storage conventions (fixed, relied upon by the file format and by all
//! oracles):
//!
//! * `Cube`: element (i, j, k) lives at offset `i + n1*j + n1*n2*k`.
//! * `Matrix`: column-major, element (r, c) at offset `r + rows*c`.
//! * `unfold(t, m)`: mode-m matricization with the remaining indices
//!   ordered by increasing mode number, earlier index fastest
//!   (Kolda-Bader). Concretely the column index is
//!   mode 1: `j + n2*k`, mode 2: `i + n1*k`, mode 3: `i + n1*j`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::Result;

/// Dense 3-D tensor of f64 samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Cube {
    dims: (usize, usize, usize),
    data: Vec<f64>,
}

impl Cube {
    /// Builds a cube from raw data in storage order. Zero-size dims and
    /// length mismatches are rejected.
    pub fn from_vec(dims: (usize, usize, usize), data: Vec<f64>) -> Result<Self> {
        let (n1, n2, n3) = dims;
        if n1 == 0 || n2 == 0 || n3 == 0 {
            return Err(Error::Dims(format!("cube dims must be positive, got {dims:?}")));
        }
        if data.len() != n1 * n2 * n3 {
            return Err(Error::Dims(format!(
                "cube data length {} does not match dims {:?}",
                data.len(),
                dims
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: (usize, usize, usize)) -> Result<Self> {
        let (n1, n2, n3) = dims;
        Self::from_vec(dims, vec![0.0; n1 * n2 * n3])
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false // dims are always positive
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.dims.0 && j < self.dims.1 && k < self.dims.2);
        i + self.dims.0 * (j + self.dims.1 * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let idx = self.index(i, j, k);
        self.data[idx] = v;
    }

    /// Errors with the given context if any sample is NaN or infinite.
    pub fn ensure_finite(&self, context: &str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Numeric(format!("non-finite sample in {context}")))
        }
    }

    pub fn fro_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn sum_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn dot(&self, other: &Cube) -> Result<f64> {
        self.check_same_dims(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    fn check_same_dims(&self, other: &Cube) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Dims(format!(
                "cube dims mismatch: {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Cube) -> Result<Cube> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Cube) -> Result<Cube> {
        self.zip(other, |a, b| a - b)
    }

    pub fn hadamard(&self, other: &Cube) -> Result<Cube> {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, factor: f64) -> Cube {
        Cube {
            dims: self.dims,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Cube {
        Cube {
            dims: self.dims,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip(&self, other: &Cube, f: impl Fn(f64, f64) -> f64) -> Result<Cube> {
        self.check_same_dims(other)?;
        Ok(Cube {
            dims: self.dims,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// In-place accumulate `self += factor * other`.
    pub fn add_scaled_assign(&mut self, other: &Cube, factor: f64) -> Result<()> {
        self.check_same_dims(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
        Ok(())
    }
}

/// Dense column-major matrix of f64 samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dims(format!(
                "matrix dims must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Dims(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::from_vec(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r + self.rows * c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r + self.rows * c] = v;
    }

    pub fn col(&self, c: usize) -> &[f64] {
        &self.data[self.rows * c..self.rows * (c + 1)]
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix {
            rows: self.cols,
            cols: self.rows,
            data: vec![0.0; self.data.len()],
        };
        for c in 0..self.cols {
            for r in 0..self.rows {
                out.data[c + out.rows * r] = self.data[r + self.rows * c];
            }
        }
        out
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dims(format!(
                "matmul shape mismatch: {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols)?;
        for c in 0..other.cols {
            for k in 0..self.cols {
                let b = other.data[k + other.rows * c];
                if b == 0.0 {
                    continue;
                }
                let a_col = &self.data[self.rows * k..self.rows * (k + 1)];
                let o_col = &mut out.data[self.rows * c..self.rows * (c + 1)];
                for (o, a) in o_col.iter_mut().zip(a_col) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn fro_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn ensure_finite(&self, context: &str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Numeric(format!("non-finite entry in {context}")))
        }
    }

    /// Max absolute deviation of `selfᵀ·self` from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.cols {
            for b in 0..self.cols {
                let dot: f64 = self
                    .col(a)
                    .iter()
                    .zip(self.col(b))
                    .map(|(x, y)| x * y)
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Mode-m matricization. See the module docs for the exact column order.
pub fn unfold(t: &Cube, mode: u8) -> Matrix {
    let (n1, n2, n3) = t.dims();
    match mode {
        1 => Matrix {
            rows: n1,
            cols: n2 * n3,
            data: t.data().to_vec(),
        },
        2 => {
            let mut m = Matrix {
                rows: n2,
                cols: n1 * n3,
                data: vec![0.0; n1 * n2 * n3],
            };
            for k in 0..n3 {
                for j in 0..n2 {
                    for i in 0..n1 {
                        m.data[j + n2 * (i + n1 * k)] = t.data()[i + n1 * (j + n2 * k)];
                    }
                }
            }
            m
        }
        3 => {
            let mut m = Matrix {
                rows: n3,
                cols: n1 * n2,
                data: vec![0.0; n1 * n2 * n3],
            };
            for k in 0..n3 {
                for j in 0..n2 {
                    for i in 0..n1 {
                        m.data[k + n3 * (i + n1 * j)] = t.data()[i + n1 * (j + n2 * k)];
                    }
                }
            }
            m
        }
        _ => panic!("mode must be 1, 2 or 3"),
    }
}

/// Exact inverse of [`unfold`] for the same mode and target dims.
pub fn fold(m: &Matrix, mode: u8, dims: (usize, usize, usize)) -> Result<Cube> {
    let (n1, n2, n3) = dims;
    let (want_rows, want_cols) = match mode {
        1 => (n1, n2 * n3),
        2 => (n2, n1 * n3),
        3 => (n3, n1 * n2),
        _ => panic!("mode must be 1, 2 or 3"),
    };
    if m.rows != want_rows || m.cols != want_cols {
        return Err(Error::Dims(format!(
            "fold mode {mode}: matrix is {}x{}, dims {dims:?} need {want_rows}x{want_cols}",
            m.rows, m.cols
        )));
    }
    let mut t = Cube::zeros(dims)?;
    match mode {
        1 => t.data_mut().copy_from_slice(&m.data),
        2 => {
            for k in 0..n3 {
                for j in 0..n2 {
                    for i in 0..n1 {
                        t.data_mut()[i + n1 * (j + n2 * k)] = m.data[j + n2 * (i + n1 * k)];
                    }
                }
            }
        }
        3 => {
            for k in 0..n3 {
                for j in 0..n2 {
                    for i in 0..n1 {
                        t.data_mut()[i + n1 * (j + n2 * k)] = m.data[k + n3 * (i + n1 * j)];
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(t)
}

/// Mode-m product `t ×ₘ m`: replaces the mode-m dimension by `m.rows`.
/// Equals `fold(m · unfold(t, mode), mode, new_dims)`.
pub fn mode_product(t: &Cube, m: &Matrix, mode: u8) -> Result<Cube> {
    let dims = t.dims();
    let nm = match mode {
        1 => dims.0,
        2 => dims.1,
        3 => dims.2,
        _ => panic!("mode must be 1, 2 or 3"),
    };
    if m.cols != nm {
        return Err(Error::Dims(format!(
            "mode_product mode {mode}: matrix has {} cols, tensor dim is {nm}",
            m.cols
        )));
    }
    let new_dims = match mode {
        1 => (m.rows, dims.1, dims.2),
        2 => (dims.0, m.rows, dims.2),
        _ => (dims.0, dims.1, m.rows),
    };
    let unfolded = unfold(t, mode);
    let product = m.matmul(&unfolded)?;
    fold(&product, mode, new_dims)
}
