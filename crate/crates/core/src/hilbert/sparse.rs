//! Compressed-sparse-row storage for complex square matrices.
//!
//! Only the handful of kernels the simulator needs are provided: assembly
//! from triplets, products with sparse/dense operands, adjoints and sums.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![C64::new(1.0, 0.0); dim])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self::from_triplets(diag.len(), diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Assembles a matrix from `(row, col, value)` triplets; duplicates are
    /// summed and exact zeros dropped.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside {dim}x{dim}");
            rows[r].push((c, v));
        }
        Self::from_rows(dim, rows)
    }

    fn from_rows(dim: usize, rows: Vec<Vec<(usize, C64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut iter = row.into_iter().peekable();
            while let Some((c, mut v)) = iter.next() {
                while let Some(&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                if v != C64::new(0.0, 0.0) {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        let dim = m.nrows();
        let triplets = (0..dim)
            .flat_map(|r| (0..dim).map(move |c| (r, c)))
            .filter_map(|(r, c)| {
                let v = m[(r, c)];
                (v != C64::new(0.0, 0.0)).then_some((r, c, v))
            });
        Self::from_triplets(dim, triplets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Nonzero entries of row `r` as `(col, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn scale(&self, s: C64) -> Self {
        if s == C64::new(0.0, 0.0) {
            return Self::zeros(self.dim);
        }
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in sparse add");
        Self::from_triplets(self.dim, self.iter().chain(other.iter()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in sparse product");
        let rows = (0..self.dim)
            .map(|r| {
                let mut acc: Vec<(usize, C64)> = Vec::new();
                for (k, a) in self.row(r) {
                    acc.extend(other.row(k).map(|(c, b)| (c, a * b)));
                }
                acc
            })
            .collect();
        Self::from_rows(self.dim, rows)
    }

    pub fn mul_vec(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut y = DVector::zeros(self.dim);
        self.mul_vec_into(x.as_slice(), y.as_mut_slice());
        y
    }

    /// `y = A x` on raw slices.
    pub fn mul_vec_into(&self, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            *out = self.cols[span.clone()]
                .iter()
                .zip(&self.vals[span])
                .map(|(&c, &v)| v * x[c])
                .sum();
        }
    }

    /// `A · M` for dense `M`.
    pub fn mul_dense(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.dim, m.ncols());
        self.mul_dense_into(m, &mut out);
        out
    }

    /// `out = A · M`, overwriting `out`.
    pub fn mul_dense_into(&self, m: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        assert_eq!(m.nrows(), self.dim);
        assert_eq!(out.shape(), (self.dim, m.ncols()));
        let n = self.dim;
        for (src, dst) in m.as_slice().chunks_exact(n).zip(out.as_mut_slice().chunks_exact_mut(n)) {
            self.mul_vec_into(src, dst);
        }
    }

    /// `M · A` for dense `M`.
    pub fn dense_mul(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(m.nrows(), self.dim);
        self.dense_mul_add_into(m, &mut out);
        out
    }

    /// `out += M · A`.
    pub fn dense_mul_add_into(&self, m: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        assert_eq!(m.ncols(), self.dim);
        assert_eq!(out.shape(), (m.nrows(), self.dim));
        let rows = m.nrows();
        let src = m.as_slice();
        let dst = out.as_mut_slice();
        for (k, c, v) in self.iter() {
            let from = &src[k * rows..(k + 1) * rows];
            for (d, &x) in dst[c * rows..(c + 1) * rows].iter_mut().zip(from) {
                *d += v * x;
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    /// Induced infinity norm (max absolute row sum), an upper bound on the
    /// spectral norm of a Hermitian matrix.
    pub fn row_sum_norm(&self) -> f64 {
        (0..self.dim).map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Elementwise `‖A − A†‖_max`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }
}
