//! Block-diagonal spectral decomposition of sparse Hermitian matrices.
//!
//! The sparsity graph of a Hamiltonian on these registers splits into many
//! small connected components (fixed boson number, fixed parity, ...). Each
//! component is diagonalized densely, which makes `exp(-iHt)` cheap and exact
//! to machine precision for arbitrary `t`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::sparse::SparseMatrix;

#[derive(Clone, Debug)]
struct Block {
    indices: Vec<usize>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
}

#[derive(Clone, Debug)]
pub struct SpectralPropagator {
    dim: usize,
    blocks: Vec<Block>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl SpectralPropagator {
    /// Decomposes `h`, which is assumed Hermitian; only its Hermitian part is used.
    pub fn new(h: &SparseMatrix) -> Self {
        let dim = h.dim();
        let mut parent: Vec<usize> = (0..dim).collect();
        for (r, c, _) in h.iter() {
            let (a, b) = (find(&mut parent, r), find(&mut parent, c));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); dim];
        for i in 0..dim {
            let root = find(&mut parent, i);
            groups[root].push(i);
        }
        let blocks = groups
            .into_iter()
            .filter(|g| !g.is_empty())
            .map(|indices| {
                let n = indices.len();
                let m = DMatrix::from_fn(n, n, |a, b| {
                    (h.get(indices[a], indices[b]) + h.get(indices[b], indices[a]).conj()) * 0.5
                });
                let eig = SymmetricEigen::new(m);
                Block {
                    indices,
                    eigenvalues: eig.eigenvalues.iter().copied().collect(),
                    eigenvectors: eig.eigenvectors,
                }
            })
            .collect();
        Self { dim, blocks }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn largest_block(&self) -> usize {
        self.blocks.iter().map(|b| b.indices.len()).max().unwrap_or(0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.blocks.iter().flat_map(|b| b.eigenvalues.iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// `exp(-iHt) v`.
    pub fn apply(&self, t: f64, v: &DVector<C64>) -> DVector<C64> {
        assert_eq!(v.len(), self.dim);
        let mut out = DVector::zeros(self.dim);
        for b in &self.blocks {
            let local = DVector::from_iterator(b.indices.len(), b.indices.iter().map(|&i| v[i]));
            if local.iter().all(|c| *c == C64::new(0.0, 0.0)) {
                continue;
            }
            let mut coeffs = b.eigenvectors.adjoint() * local;
            for (c, &e) in coeffs.iter_mut().zip(&b.eigenvalues) {
                *c *= C64::from_polar(1.0, -e * t);
            }
            let back = &b.eigenvectors * coeffs;
            for (k, &i) in b.indices.iter().enumerate() {
                out[i] = back[k];
            }
        }
        out
    }

    /// `exp(-iHt)` as a block-sparse matrix.
    pub fn unitary(&self, t: f64) -> SparseMatrix {
        let mut triplets = Vec::new();
        for b in &self.blocks {
            let phases = DVector::from_iterator(
                b.eigenvalues.len(),
                b.eigenvalues.iter().map(|&e| C64::from_polar(1.0, -e * t)),
            );
            let scaled = DMatrix::from_fn(b.indices.len(), b.indices.len(), |r, c| {
                b.eigenvectors[(r, c)] * phases[c]
            });
            let u = scaled * b.eigenvectors.adjoint();
            for (r, &gr) in b.indices.iter().enumerate() {
                for (c, &gc) in b.indices.iter().enumerate() {
                    triplets.push((gr, gc, u[(r, c)]));
                }
            }
        }
        SparseMatrix::from_triplets(self.dim, triplets)
    }

    /// `U ρ U†` with `U = exp(-iHt)`.
    pub fn conjugate(&self, t: f64, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let u = self.unitary(t);
        u.adjoint().dense_mul(&u.mul_dense(rho))
    }
}

/// `exp(-iK)` for a Hermitian sparse generator.
pub fn expm_hermitian(k: &SparseMatrix) -> SparseMatrix {
    SpectralPropagator::new(k).unitary(1.0)
}

/// Dense `exp(-iK)` for a small Hermitian matrix.
pub fn expm_hermitian_dense(k: &DMatrix<C64>) -> DMatrix<C64> {
    let sym = (k + k.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(sym);
    let n = k.nrows();
    let scaled = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, c)] * C64::from_polar(1.0, -eig.eigenvalues[c]));
    scaled * eig.eigenvectors.adjoint()
}
