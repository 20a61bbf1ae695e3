use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::layout::HilbertLayout;
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;

/// Single-subsystem operator families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalKind {
    Annihilate,
    Create,
    Number,
    Parity,
    PauliX,
    PauliY,
    PauliZ,
    Identity,
}

impl LocalKind {
    fn name(self) -> &'static str {
        match self {
            LocalKind::Annihilate => "annihilate",
            LocalKind::Create => "create",
            LocalKind::Number => "number",
            LocalKind::Parity => "parity",
            LocalKind::PauliX => "pauli_x",
            LocalKind::PauliY => "pauli_y",
            LocalKind::PauliZ => "pauli_z",
            LocalKind::Identity => "identity",
        }
    }
}

/// Dense matrix of a local operator on a factor of dimension `dim`.
///
/// Qubit basis order is `(|↑⟩, |↓⟩)` with `σᶻ = diag(+1, −1)`. Oscillator
/// ladders are truncated: `â†|cutoff⟩` is dropped.
pub fn local_operator(kind: LocalKind, dim: usize) -> Result<DMatrix<C64>> {
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let mismatch = || Error::KindDimMismatch { kind: kind.name(), dim };
    match kind {
        LocalKind::PauliX | LocalKind::PauliY | LocalKind::PauliZ => {
            if dim != 2 {
                return Err(mismatch());
            }
            let z = C64::new(0.0, 0.0);
            let m = match kind {
                LocalKind::PauliX => [z, one, one, z],
                LocalKind::PauliY => [z, -i, i, z],
                _ => [one, z, z, -one],
            };
            Ok(DMatrix::from_row_slice(2, 2, &m))
        }
        LocalKind::Identity => {
            if dim == 0 {
                return Err(mismatch());
            }
            Ok(DMatrix::identity(dim, dim))
        }
        _ => {
            if dim < 2 {
                return Err(mismatch());
            }
            let mut m = DMatrix::zeros(dim, dim);
            for n in 0..dim {
                match kind {
                    LocalKind::Annihilate if n + 1 < dim => m[(n, n + 1)] = C64::from(((n + 1) as f64).sqrt()),
                    LocalKind::Create if n + 1 < dim => m[(n + 1, n)] = C64::from(((n + 1) as f64).sqrt()),
                    LocalKind::Number => m[(n, n)] = C64::from(n as f64),
                    LocalKind::Parity => m[(n, n)] = C64::from(if n % 2 == 0 { 1.0 } else { -1.0 }),
                    _ => {}
                }
            }
            Ok(m)
        }
    }
}

/// Square operator on a register, stored sparse.
#[derive(Clone, Debug)]
pub struct Operator {
    layout: Arc<HilbertLayout>,
    matrix: SparseMatrix,
    hermitian_hint: bool,
}

impl Operator {
    pub fn from_sparse(layout: Arc<HilbertLayout>, matrix: SparseMatrix) -> Result<Self> {
        if matrix.dim() != layout.total_dim() {
            return Err(Error::DimensionMismatch { expected: layout.total_dim(), got: matrix.dim() });
        }
        let hermitian_hint = matrix.hermiticity_defect() < HERMITIAN_TOL;
        Ok(Self { layout, matrix, hermitian_hint })
    }

    pub fn from_dense(layout: Arc<HilbertLayout>, matrix: &DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), got: matrix.ncols() });
        }
        Self::from_sparse(layout, SparseMatrix::from_dense(matrix))
    }

    pub fn identity(layout: &Arc<HilbertLayout>) -> Self {
        let d = layout.total_dim();
        Self { layout: layout.clone(), matrix: SparseMatrix::identity(d), hermitian_hint: true }
    }

    pub fn zeros(layout: &Arc<HilbertLayout>) -> Self {
        let d = layout.total_dim();
        Self { layout: layout.clone(), matrix: SparseMatrix::zeros(d), hermitian_hint: true }
    }

    /// Tensor product of local matrices on distinct subsystems, identity
    /// elsewhere.
    pub fn product(layout: &Arc<HilbertLayout>, factors: &[(usize, &DMatrix<C64>)]) -> Result<Self> {
        let mut seen = vec![false; layout.len()];
        for &(idx, local) in factors {
            let spec = layout.subsystem(idx)?;
            if local.nrows() != spec.dim || local.ncols() != spec.dim {
                return Err(Error::DimensionMismatch { expected: spec.dim, got: local.nrows() });
            }
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::Precondition(format!("subsystem {idx} appears twice in a product")));
            }
        }
        let total = layout.total_dim();
        let mut triplets = Vec::new();
        for row in 0..total {
            let digits = layout.digits(row);
            // expand the row over each factor's nonzero columns
            let mut partial: Vec<(usize, C64)> = vec![(row, C64::new(1.0, 0.0))];
            for &(idx, local) in factors {
                let stride = layout.stride(idx);
                let d = digits[idx];
                let mut next = Vec::new();
                for &(col, amp) in &partial {
                    for c in 0..local.ncols() {
                        let v = local[(d, c)];
                        if v != C64::new(0.0, 0.0) {
                            next.push((col - d * stride + c * stride, amp * v));
                        }
                    }
                }
                partial = next;
            }
            triplets.extend(partial.into_iter().map(|(col, v)| (row, col, v)));
        }
        Self::from_sparse(layout.clone(), SparseMatrix::from_triplets(total, triplets))
    }

    pub fn layout(&self) -> &Arc<HilbertLayout> {
        &self.layout
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        self.matrix.to_dense()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.matrix.get(r, c)
    }

    pub fn adjoint(&self) -> Self {
        Self { layout: self.layout.clone(), matrix: self.matrix.adjoint(), hermitian_hint: self.hermitian_hint }
    }

    pub fn scale(&self, s: impl Into<C64>) -> Self {
        let s = s.into();
        let matrix = self.matrix.scale(s);
        let hermitian_hint = self.hermitian_hint && s.im == 0.0;
        Self { layout: self.layout.clone(), matrix, hermitian_hint }
    }

    /// `self + self†`.
    pub fn plus_adjoint(&self) -> Self {
        let matrix = self.matrix.add(&self.matrix.adjoint());
        Self { layout: self.layout.clone(), matrix, hermitian_hint: true }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }

    /// `‖A − B‖_max`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.check_layout(other);
        self.matrix.max_abs_diff(&other.matrix)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.max_abs()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.matrix.hermiticity_defect()
    }

    pub fn require_hermitian(&self) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect < HERMITIAN_TOL {
            Ok(())
        } else {
            Err(Error::NotHermitian(defect))
        }
    }

    fn check_layout(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.layout, &other.layout) || self.layout == other.layout,
            "operator layouts differ"
        );
    }

    fn combine(&self, matrix: SparseMatrix) -> Self {
        let hermitian_hint = matrix.hermiticity_defect() < HERMITIAN_TOL;
        Self { layout: self.layout.clone(), matrix, hermitian_hint }
    }
}

/// Lifts a local matrix to the register, identity on every other factor.
pub fn embed(local: &DMatrix<C64>, index: usize, layout: &Arc<HilbertLayout>) -> Result<Operator> {
    Operator::product(layout, &[(index, local)])
}

/// Lifts a matrix acting on the joint space of several subsystems, listed
/// most significant first, to the register.
pub fn embed_joint(local: &DMatrix<C64>, indices: &[usize], layout: &Arc<HilbertLayout>) -> Result<Operator> {
    let mut seen = vec![false; layout.len()];
    let mut dims = Vec::with_capacity(indices.len());
    for &idx in indices {
        dims.push(layout.subsystem(idx)?.dim);
        if std::mem::replace(&mut seen[idx], true) {
            return Err(Error::Precondition(format!("subsystem {idx} appears twice in a joint embedding")));
        }
    }
    let local_dim: usize = dims.iter().product();
    if local.nrows() != local_dim || local.ncols() != local_dim {
        return Err(Error::DimensionMismatch { expected: local_dim, got: local.nrows() });
    }
    let split = |mut k: usize| {
        let mut out = vec![0; dims.len()];
        for (slot, &d) in out.iter_mut().zip(&dims).rev() {
            *slot = k % d;
            k /= d;
        }
        out
    };
    let total = layout.total_dim();
    let mut triplets = Vec::new();
    for row in 0..total {
        let digits = layout.digits(row);
        let lr = indices.iter().fold(0, |acc, &i| acc * layout.subsystems()[i].dim + digits[i]);
        for lc in 0..local_dim {
            let v = local[(lr, lc)];
            if v != C64::new(0.0, 0.0) {
                let mut col_digits = digits.clone();
                for (&i, d) in indices.iter().zip(split(lc)) {
                    col_digits[i] = d;
                }
                triplets.push((row, layout.compose(&col_digits), v));
            }
        }
    }
    Operator::from_sparse(layout.clone(), SparseMatrix::from_triplets(total, triplets))
}

/// Shorthand for `embed(local_operator(kind, dim), index, layout)`.
pub fn embed_kind(kind: LocalKind, index: usize, layout: &Arc<HilbertLayout>) -> Result<Operator> {
    let spec = layout.subsystem(index)?;
    embed(&local_operator(kind, spec.dim)?, index, layout)
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        self.check_layout(rhs);
        self.combine(self.matrix.add(&rhs.matrix))
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        &self + &rhs
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        self.check_layout(rhs);
        self.combine(self.matrix.sub(&rhs.matrix))
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        &self - &rhs
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        self.check_layout(rhs);
        self.combine(self.matrix.mul(&rhs.matrix))
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        &self * &rhs
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}
