//! Dense real linear algebra and a small linear-programming feasibility engine.
//!
//! Everything here is deliberately dense and allocation-happy: the rest of the
//! crate works on desk-scale instances (a few dozen variables at most), where
//! clarity and exact reproducibility matter more than throughput.

mod qr;
mod simplex;

pub use qr::{column_rank, least_squares, pseudo_inverse_apply, DEFAULT_RANK_TOL};
pub use simplex::{lp_solve, LpFeasibilityResult, LpProblem, LpStatus, VarBounds};

use thiserror::Error;

/// Errors from the dense linear algebra and LP layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry at position {0}")]
    NonFinite(usize),
    #[error("matrix does not have full column rank")]
    RankDeficient,
    #[error("simplex exceeded its pivot limit")]
    NumericalFailure,
    #[error("variable {0} has lower bound above its upper bound")]
    InvalidBounds(usize),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
}

/// Dense real vector. Entries are always finite; constructors reject NaN and
/// infinities so numerical garbage is caught at the boundary, not deep inside
/// an iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self, LinalgError> {
        match data.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(LinalgError::NonFinite(i)),
            None => Ok(Self { data }),
        }
    }

    /// Builds a vector from a slice, panicking on non-finite entries.
    /// Intended for literals in tests and examples.
    pub fn from_slice(s: &[f64]) -> Self {
        Self::new(s.to_vec()).expect("vector literal must be finite")
    }

    /// Internal constructor for arithmetic results.
    pub(crate) fn raw(data: Vec<f64>) -> Self {
        debug_assert!(data.iter().all(|v| v.is_finite()), "non-finite arithmetic result");
        Self { data }
    }

    pub fn zeros(n: usize) -> Self {
        Self { data: vec![0.0; n] }
    }

    pub fn ones(n: usize) -> Self {
        Self { data: vec![1.0; n] }
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

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot: length mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm1(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "dist: length mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `self + c * other`
    pub fn add_scaled(&self, c: f64, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len(), "add_scaled: length mismatch");
        Vector::raw(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + c * b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        self.add_scaled(-1.0, other)
    }

    pub fn scale(&self, c: f64) -> Vector {
        Vector::raw(self.data.iter().map(|v| c * v).collect())
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

/// Dense row-major matrix with at least one row and one column.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::InvalidShape(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        match data.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(LinalgError::NonFinite(i)),
            None => Ok(Self { rows, cols, data }),
        }
    }

    /// Builds from row slices, panicking on ragged or non-finite input.
    /// Intended for literals in tests and examples.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        assert!(!rows.is_empty(), "matrix literal must have rows");
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix literal");
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(rows.len(), cols, data).expect("matrix literal must be finite")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1);
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(v.is_finite());
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vector {
        Vector::raw((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    /// `A x`
    pub fn matvec(&self, x: &Vector) -> Vector {
        assert_eq!(self.cols, x.len(), "matvec: dimension mismatch");
        Vector::raw(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    /// `A^T y`
    pub fn tr_matvec(&self, y: &Vector) -> Vector {
        assert_eq!(self.rows, y.len(), "tr_matvec: dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let yi = y[i];
            for (j, a) in self.row(i).iter().enumerate() {
                out[j] += a * yi;
            }
        }
        Vector::raw(out)
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul: dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Submatrix formed by the given columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        assert!(!idx.is_empty(), "select_columns: empty index set");
        let mut out = Matrix::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (jj, &j) in idx.iter().enumerate() {
                out.set(i, jj, self.get(i, j));
            }
        }
        out
    }

    /// Copy with column `j` scaled by `s[j]`.
    pub fn scale_columns(&self, s: &[f64]) -> Matrix {
        assert_eq!(self.cols, s.len(), "scale_columns: dimension mismatch");
        let mut out = self.clone();
        for i in 0..self.rows {
            for (j, &sj) in s.iter().enumerate() {
                out.set(i, j, self.get(i, j) * sj);
            }
        }
        out
    }

    /// `A^T A` as a dense symmetric matrix.
    pub fn gram(&self) -> Matrix {
        let mut g = Matrix::zeros(self.cols, self.cols);
        for i in 0..self.rows {
            let r = self.row(i);
            for j in 0..self.cols {
                for k in j..self.cols {
                    let v = g.get(j, k) + r[j] * r[k];
                    g.set(j, k, v);
                }
            }
        }
        for j in 0..self.cols {
            for k in 0..j {
                let v = g.get(k, j);
                g.set(j, k, v);
            }
        }
        g
    }
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix, by power
/// iteration with a fixed deterministic starting vector.
pub fn lambda_max_sym(g: &Matrix, max_iter: usize, rel_tol: f64) -> f64 {
    assert_eq!(g.rows(), g.cols(), "lambda_max_sym: square matrix required");
    let n = g.cols();
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9e3779b97f4a7c15);
    let mut v = Vector::raw((0..n).map(|_| rng.random_range(0.1..1.0)).collect());
    let nv = v.norm();
    v = v.scale(1.0 / nv);
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let w = g.matvec(&v);
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        let done = (next - lambda).abs() <= rel_tol * next.abs().max(1.0);
        lambda = next;
        v = w.scale(1.0 / nw);
        if done {
            break;
        }
    }
    lambda.max(0.0)
}

/// Largest eigenvalue of `A^T A`.
pub fn lambda_max_gram(a: &Matrix, max_iter: usize, rel_tol: f64) -> f64 {
    lambda_max_sym(&a.gram(), max_iter, rel_tol)
}
