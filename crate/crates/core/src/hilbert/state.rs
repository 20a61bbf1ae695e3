use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::layout::{build_layout, HilbertLayout};
use super::operator::Operator;
use super::MaxNorm;
use crate::error::{Error, Result};

const PURE_NORM_TOL: f64 = 1e-10;
const MIXED_HERM_TOL: f64 = 1e-10;
const MIXED_TRACE_TOL: f64 = 1e-9;
const MIXED_EIG_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum StateData {
    Pure(DVector<C64>),
    Mixed(DMatrix<C64>),
}

/// Pure vector or density matrix on a register.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    layout: Arc<HilbertLayout>,
    data: StateData,
}

impl QuantumState {
    pub fn pure(layout: Arc<HilbertLayout>, v: DVector<C64>) -> Result<Self> {
        if v.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch { expected: layout.total_dim(), got: v.len() });
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::InvalidState(format!("vector norm {norm} is not 1")));
        }
        Ok(Self { layout, data: StateData::Pure(v) })
    }

    /// Normalizes `v` before wrapping it.
    pub fn pure_normalized(layout: Arc<HilbertLayout>, v: DVector<C64>) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::pure(layout, v / C64::from(norm))
    }

    pub fn mixed(layout: Arc<HilbertLayout>, rho: DMatrix<C64>) -> Result<Self> {
        let d = layout.total_dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: rho.nrows() });
        }
        let herm = (&rho - rho.adjoint()).max_norm();
        if herm > MIXED_HERM_TOL {
            return Err(Error::InvalidState(format!("density matrix not Hermitian ({herm:.2e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > MIXED_TRACE_TOL || tr.im.abs() > MIXED_TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_eig = hermitian_eigen(&rho).eigenvalues.min();
        if min_eig < -MIXED_EIG_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { layout, data: StateData::Mixed(rho) })
    }

    /// Wraps a density matrix without the positivity check; used by
    /// integrators which report positivity violations separately.
    pub(crate) fn mixed_unchecked(layout: Arc<HilbertLayout>, rho: DMatrix<C64>) -> Self {
        Self { layout, data: StateData::Mixed(rho) }
    }

    pub(crate) fn pure_unchecked(layout: Arc<HilbertLayout>, v: DVector<C64>) -> Self {
        Self { layout, data: StateData::Pure(v) }
    }

    /// Tensor product of local kets, one per subsystem in layout order.
    pub fn product(layout: Arc<HilbertLayout>, factors: &[DVector<C64>]) -> Result<Self> {
        if factors.len() != layout.len() {
            return Err(Error::DimensionMismatch { expected: layout.len(), got: factors.len() });
        }
        let mut v = DVector::from_element(1, C64::new(1.0, 0.0));
        for (f, spec) in factors.iter().zip(layout.subsystems()) {
            if f.len() != spec.dim {
                return Err(Error::DimensionMismatch { expected: spec.dim, got: f.len() });
            }
            v = v.kronecker(f);
        }
        Self::pure_normalized(layout, v)
    }

    /// Tensor product of local density matrices.
    pub fn product_mixed(layout: Arc<HilbertLayout>, factors: &[DMatrix<C64>]) -> Result<Self> {
        if factors.len() != layout.len() {
            return Err(Error::DimensionMismatch { expected: layout.len(), got: factors.len() });
        }
        let mut m = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for (f, spec) in factors.iter().zip(layout.subsystems()) {
            if f.nrows() != spec.dim {
                return Err(Error::DimensionMismatch { expected: spec.dim, got: f.nrows() });
            }
            m = m.kronecker(f);
        }
        Self::mixed(layout, m)
    }

    /// Computational basis state with the given per-subsystem digits.
    pub fn basis(layout: Arc<HilbertLayout>, digits: &[usize]) -> Result<Self> {
        if digits.len() != layout.len() {
            return Err(Error::DimensionMismatch { expected: layout.len(), got: digits.len() });
        }
        for (k, (&d, s)) in digits.iter().zip(layout.subsystems()).enumerate() {
            if d >= s.dim {
                return Err(Error::IndexOutOfRange { index: d, len: layout.subsystem(k)?.dim });
            }
        }
        let mut v = DVector::zeros(layout.total_dim());
        v[layout.compose(digits)] = C64::new(1.0, 0.0);
        Ok(Self { layout, data: StateData::Pure(v) })
    }

    pub fn layout(&self) -> &Arc<HilbertLayout> {
        &self.layout
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn as_vector(&self) -> Option<&DVector<C64>> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Mixed(_) => None,
        }
    }

    pub fn density_matrix(&self) -> DMatrix<C64> {
        match &self.data {
            StateData::Pure(v) => v * v.adjoint(),
            StateData::Mixed(m) => m.clone(),
        }
    }

    pub fn to_mixed(&self) -> Self {
        Self { layout: self.layout.clone(), data: StateData::Mixed(self.density_matrix()) }
    }

    pub fn trace(&self) -> C64 {
        match &self.data {
            StateData::Pure(v) => C64::from(v.norm_squared()),
            StateData::Mixed(m) => m.trace(),
        }
    }

    pub fn purity(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm_squared().powi(2),
            StateData::Mixed(m) => (m * m).trace().re,
        }
    }

    /// Population of each global basis state.
    pub fn populations(&self) -> Vec<f64> {
        match &self.data {
            StateData::Pure(v) => v.iter().map(|c| c.norm_sqr()).collect(),
            StateData::Mixed(m) => (0..m.nrows()).map(|i| m[(i, i)].re).collect(),
        }
    }

    pub fn apply(&self, op: &Operator) -> Result<Self> {
        self.check_layout(op.layout())?;
        let data = match &self.data {
            StateData::Pure(v) => StateData::Pure(op.matrix().mul_vec(v)),
            StateData::Mixed(m) => {
                let left = op.matrix().mul_dense(m);
                StateData::Mixed(op.matrix().adjoint().dense_mul(&left))
            }
        };
        Ok(Self { layout: self.layout.clone(), data })
    }

    pub(crate) fn check_layout(&self, other: &Arc<HilbertLayout>) -> Result<()> {
        if Arc::ptr_eq(&self.layout, other) || *self.layout == **other {
            Ok(())
        } else {
            Err(Error::LayoutMismatch)
        }
    }
}

/// `⟨ψ|Ô|ψ⟩` or `Tr(ρÔ)`.
pub fn expectation(state: &QuantumState, op: &Operator) -> Result<C64> {
    state.check_layout(op.layout())?;
    let value = match &state.data {
        StateData::Pure(v) => {
            let ov = op.matrix().mul_vec(v);
            v.dotc(&ov)
        }
        StateData::Mixed(rho) => op.matrix().iter().map(|(r, c, o)| o * rho[(c, r)]).sum(),
    };
    Ok(value)
}

/// Real part of a Hermitian expectation value.
pub fn expect_real(state: &QuantumState, op: &Operator) -> Result<f64> {
    Ok(expectation(state, op)?.re)
}

/// Reduced density matrix on `keep`, in the original relative order.
pub fn partial_trace(state: &QuantumState, keep: &[usize]) -> Result<QuantumState> {
    if keep.is_empty() {
        return Err(Error::EmptySelection);
    }
    let layout = &state.layout;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    for &k in &kept {
        layout.subsystem(k)?;
    }
    let traced: Vec<usize> = (0..layout.len()).filter(|i| !kept.contains(i)).collect();
    let reduced_layout = build_layout(kept.iter().map(|&k| layout.subsystems()[k].clone()).collect())?;
    let dk = reduced_layout.total_dim();
    let de: usize = traced.iter().map(|&i| layout.subsystems()[i].dim).product();

    // global index for (kept multi-index a, traced multi-index e)
    let kept_dims: Vec<usize> = kept.iter().map(|&k| layout.subsystems()[k].dim).collect();
    let env_dims: Vec<usize> = traced.iter().map(|&k| layout.subsystems()[k].dim).collect();
    let split = |mut idx: usize, dims: &[usize]| {
        let mut out = vec![0; dims.len()];
        for (k, &d) in dims.iter().enumerate().rev() {
            out[k] = idx % d;
            idx /= d;
        }
        out
    };
    let mut index = vec![0usize; dk * de];
    let mut digits = vec![0usize; layout.len()];
    for a in 0..dk {
        let ka = split(a, &kept_dims);
        for e in 0..de {
            let ke = split(e, &env_dims);
            for (pos, &k) in kept.iter().enumerate() {
                digits[k] = ka[pos];
            }
            for (pos, &k) in traced.iter().enumerate() {
                digits[k] = ke[pos];
            }
            index[a * de + e] = layout.compose(&digits);
        }
    }

    let reduced = match &state.data {
        StateData::Pure(v) => {
            let m = DMatrix::from_fn(dk, de, |a, e| v[index[a * de + e]]);
            &m * m.adjoint()
        }
        StateData::Mixed(rho) => DMatrix::from_fn(dk, dk, |a, b| {
            (0..de).map(|e| rho[(index[a * de + e], index[b * de + e])]).sum()
        }),
    };
    Ok(QuantumState::mixed_unchecked(reduced_layout, reduced))
}

/// Fidelity `|⟨ψ|φ⟩|²`, `⟨ψ|ρ|ψ⟩`, or Uhlmann's `(Tr√(√ρ σ √ρ))²`.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    a.check_layout(&b.layout)?;
    let f = match (&a.data, &b.data) {
        (StateData::Pure(x), StateData::Pure(y)) => x.dotc(y).norm_sqr(),
        (StateData::Pure(x), StateData::Mixed(r)) | (StateData::Mixed(r), StateData::Pure(x)) => {
            x.dotc(&(r * x)).re
        }
        (StateData::Mixed(r), StateData::Mixed(s)) => {
            let sqrt_r = hermitian_sqrt(r);
            let inner = &sqrt_r * s * &sqrt_r;
            let eig = hermitian_eigen(&inner);
            eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum::<f64>().powi(2)
        }
    };
    Ok(f)
}

pub(crate) fn hermitian_eigen(m: &DMatrix<C64>) -> SymmetricEigen<C64, nalgebra::Dyn> {
    let sym = (m + m.adjoint()) * C64::from(0.5);
    SymmetricEigen::new(sym)
}

fn hermitian_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = hermitian_eigen(m);
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from(l.max(0.0).sqrt())));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Frequently used single-factor kets.
pub mod ket {
    use super::*;

    pub fn up() -> DVector<C64> {
        DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
    }

    pub fn down() -> DVector<C64> {
        DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
    }

    /// `(|↑⟩ + |↓⟩)/√2`, the `+1` eigenstate of `σˣ`.
    pub fn plus() -> DVector<C64> {
        (up() + down()) / C64::from(2f64.sqrt())
    }

    /// `(|↑⟩ − |↓⟩)/√2`.
    pub fn minus() -> DVector<C64> {
        (up() - down()) / C64::from(2f64.sqrt())
    }

    pub fn fock(n: usize, dim: usize) -> DVector<C64> {
        let mut v = DVector::zeros(dim);
        v[n] = C64::new(1.0, 0.0);
        v
    }
}
