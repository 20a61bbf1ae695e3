//! Tensor-product registers of qubits and truncated oscillators, with the
//! operator and state algebra used throughout the crate.

pub mod layout;
pub mod operator;
pub mod sparse;
pub mod spectral;
pub mod state;

pub use layout::{build_layout, HilbertLayout, SubsystemKind, SubsystemSpec};
pub use operator::{embed, embed_joint, embed_kind, local_operator, LocalKind, Operator};
pub use sparse::SparseMatrix;
pub use spectral::SpectralPropagator;
pub use state::{expect_real, expectation, fidelity, ket, partial_trace, QuantumState, StateData};

pub use num_complex::Complex64 as C64;

/// Largest entry modulus of a complex matrix or vector.
pub trait MaxNorm {
    fn max_norm(&self) -> f64;
}

impl<R, C, S> MaxNorm for nalgebra::Matrix<C64, R, C, S>
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::RawStorage<C64, R, C>,
{
    fn max_norm(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}
