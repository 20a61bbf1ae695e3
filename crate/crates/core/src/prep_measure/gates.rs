use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::spectral::expm_hermitian_dense;
use crate::hilbert::{embed, embed_joint, local_operator, partial_trace, LocalKind, QuantumState, SubsystemKind, C64};
use crate::models::rotation_matrix;

pub(crate) fn require_kind(state: &QuantumState, index: usize, kind: SubsystemKind) -> Result<()> {
    let spec = state.layout().subsystem(index)?;
    if spec.kind != kind {
        return Err(Error::WrongRegister(format!("`{}` is not a {kind:?}", spec.label)));
    }
    Ok(())
}

/// Anti-Jaynes-Cummings π pulse on the joint `(qubit, mode)` space.
///
/// Each pair `(|↓,n⟩, |↑,n+1⟩)` rotates by `π√(n+1)/2` so that
/// `|↓,0⟩ → i|↑,1⟩`. `|↑,0⟩` and the top rung `|↓,cutoff⟩` are untouched.
pub fn bsb_matrix(cutoff: usize) -> DMatrix<C64> {
    let dim = cutoff + 1;
    let mut u = DMatrix::<C64>::identity(2 * dim, 2 * dim);
    let up = |n: usize| n;
    let down = |n: usize| dim + n;
    for n in 0..cutoff {
        let theta = FRAC_PI_2 * ((n + 1) as f64).sqrt();
        let (c, s) = (C64::from(theta.cos()), C64::new(0.0, theta.sin()));
        let (a, b) = (down(n), up(n + 1));
        u[(a, a)] = c;
        u[(b, b)] = c;
        u[(b, a)] = s;
        u[(a, b)] = s;
    }
    u
}

pub fn bsb_pi(state: &QuantumState, qubit: usize, mode: usize) -> Result<QuantumState> {
    require_kind(state, qubit, SubsystemKind::Qubit)?;
    require_kind(state, mode, SubsystemKind::Oscillator)?;
    let cutoff = state.layout().subsystems()[mode].cutoff();
    state.apply(&embed_joint(&bsb_matrix(cutoff), &[qubit, mode], state.layout())?)
}

/// Rotation by `angle` about `cos(phase)σˣ + sin(phase)σʸ`. With this sign
/// convention `π/2` at phase `−π/2` takes `|↑⟩` to `|−⟩`.
pub fn carrier_rotation(state: &QuantumState, qubit: usize, angle: f64, phase: f64) -> Result<QuantumState> {
    require_kind(state, qubit, SubsystemKind::Qubit)?;
    state.apply(&embed(&rotation_matrix(angle, phase), qubit, state.layout())?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellState {
    #[serde(rename = "phi_plus")]
    PhiPlus,
    #[serde(rename = "phi_minus")]
    PhiMinus,
    #[serde(rename = "psi_plus")]
    PsiPlus,
    #[serde(rename = "psi_minus")]
    PsiMinus,
}

/// Two-qubit entangling gate `exp(−iπ/4·σ^φσ^φ)` with `φ = π/4 + φ̃/2`,
/// which maps `|↑↑⟩` to `(|↑↑⟩ + e^{iφ̃}|↓↓⟩)/√2`.
pub fn entangler(tilde_phase: f64) -> DMatrix<C64> {
    let phi = FRAC_PI_4 + tilde_phase / 2.0;
    let x = local_operator(LocalKind::PauliX, 2).expect("qubit");
    let y = local_operator(LocalKind::PauliY, 2).expect("qubit");
    let s = x * C64::from(phi.cos()) + y * C64::from(phi.sin());
    expm_hermitian_dense(&(s.kronecker(&s) * C64::from(FRAC_PI_4)))
}

/// Ideal Bell-state preparation on two qubits that start in a computational
/// basis product state, unentangled with the rest of the register.
///
/// The Φ states come from [`entangler`] with phases `φ̃` and `φ̃ + π`. Ψ⁺ adds
/// a global `R_x(π/2)` and Ψ⁻ an addressed π flip of the first qubit.
pub fn prepare_bell(state: &QuantumState, qubits: [usize; 2], which: BellState, tilde_phase: f64) -> Result<QuantumState> {
    let [q1, q2] = qubits;
    if q1 == q2 {
        return Err(Error::Precondition("Bell preparation needs two distinct qubits".into()));
    }
    require_kind(state, q1, SubsystemKind::Qubit)?;
    require_kind(state, q2, SubsystemKind::Qubit)?;
    let reduced = partial_trace(state, &[q1.min(q2), q1.max(q2)])?;
    if (reduced.purity() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState("qubits are entangled with the rest of the register".into()));
    }
    let pops = reduced.populations();
    let (basis, &p) = pops.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("four entries");
    if p < 1.0 - 1e-9 {
        return Err(Error::InvalidState("qubits are not in a computational basis state".into()));
    }
    // `basis` indexes the sorted pair; find each qubit's digit
    let (lo_down, hi_down) = (basis / 2 == 1, basis % 2 == 1);
    let downs = if q1 < q2 { [lo_down, hi_down] } else { [hi_down, lo_down] };
    let mut s = state.clone();
    for (&q, &down) in qubits.iter().zip(&downs) {
        if down {
            s = carrier_rotation(&s, q, PI, 0.0)?;
        }
    }
    let phase = match which {
        BellState::PhiPlus | BellState::PsiPlus => tilde_phase,
        BellState::PhiMinus | BellState::PsiMinus => tilde_phase + PI,
    };
    s = s.apply(&embed_joint(&entangler(phase), &qubits, s.layout())?)?;
    match which {
        BellState::PsiPlus => {
            s = carrier_rotation(&s, q1, FRAC_PI_2, 0.0)?;
            carrier_rotation(&s, q2, FRAC_PI_2, 0.0)
        }
        BellState::PsiMinus => carrier_rotation(&s, q1, PI, 0.0),
        _ => Ok(s),
    }
}
