use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::gates::{bsb_matrix, require_kind};
use crate::dynamics::ObservableSeries;
use crate::error::{Error, Result};
use crate::hilbert::{
    build_layout, embed_joint, embed_kind, expect_real, local_operator, partial_trace, LocalKind, Operator,
    QuantumState, SubsystemKind, SubsystemSpec, C64,
};

/// Population above `|1⟩` tolerated by the sideband probe before a leakage
/// warning.
pub const PROBE_LEAKAGE_LIMIT: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    fn projector(self) -> DMatrix<C64> {
        let mut p = DMatrix::zeros(2, 2);
        let i = if self == Spin::Up { 0 } else { 1 };
        p[(i, i)] = C64::from(1.0);
        p
    }
}

#[derive(Clone, Debug)]
pub struct PostSelected {
    pub state: QuantumState,
    pub probability: f64,
}

/// Projects `qubits` onto the pattern `keep` and renormalizes.
pub fn readout_postselect(state: &QuantumState, qubits: &[usize], keep: &[Spin]) -> Result<PostSelected> {
    if qubits.is_empty() {
        return Err(Error::EmptySelection);
    }
    if qubits.len() != keep.len() {
        return Err(Error::DimensionMismatch { expected: qubits.len(), got: keep.len() });
    }
    for &q in qubits {
        require_kind(state, q, SubsystemKind::Qubit)?;
    }
    let locals: Vec<DMatrix<C64>> = keep.iter().map(|s| s.projector()).collect();
    let factors: Vec<(usize, &DMatrix<C64>)> = qubits.iter().copied().zip(locals.iter()).collect();
    let proj = Operator::product(state.layout(), &factors)?;
    let projected = state.apply(&proj)?;
    let probability = projected.trace().re;
    if probability <= 1e-14 {
        return Err(Error::ZeroProbability);
    }
    let state = match projected.as_vector() {
        Some(v) => QuantumState::pure_normalized(state.layout().clone(), v.clone())?,
        None => QuantumState::mixed(state.layout().clone(), projected.density_matrix() / C64::from(probability))?,
    };
    Ok(PostSelected { state, probability })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OccupationProbe {
    /// `⟨â†â⟩`.
    Direct,
    /// A probe qubit post-selected in `|↑⟩`, a sideband π pulse, then the
    /// probability of finding the qubit in `|↓⟩`.
    BsbProbe,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Occupation {
    pub value: f64,
    pub warnings: Vec<String>,
}

pub fn measure_occupation(state: &QuantumState, mode: usize, via: OccupationProbe) -> Result<Occupation> {
    require_kind(state, mode, SubsystemKind::Oscillator)?;
    match via {
        OccupationProbe::Direct => {
            let n = embed_kind(LocalKind::Number, mode, state.layout())?;
            Ok(Occupation { value: expect_real(state, &n)?, warnings: Vec::new() })
        }
        OccupationProbe::BsbProbe => {
            let rho_m = partial_trace(state, &[mode])?.density_matrix();
            let cutoff = rho_m.nrows() - 1;
            let leak: f64 = (2..=cutoff).map(|n| rho_m[(n, n)].re).sum();
            let mut warnings = Vec::new();
            if leak > PROBE_LEAKAGE_LIMIT {
                warnings.push(format!(
                    "population {leak:.3e} above one excitation biases the sideband probe of mode {mode}"
                ));
            }
            let layout = build_layout(vec![SubsystemSpec::qubit("probe"), SubsystemSpec::oscillator("m", cutoff)])?;
            let mut up = DMatrix::<C64>::zeros(2, 2);
            up[(0, 0)] = C64::from(1.0);
            let joint = QuantumState::mixed(layout.clone(), up.kronecker(&rho_m))?;
            let pulsed = joint.apply(&embed_joint(&bsb_matrix(cutoff), &[0, 1], &layout)?)?;
            let p_down = 0.5 * (1.0 - expect_real(&pulsed, &embed_kind(LocalKind::PauliZ, 0, &layout)?)?);
            Ok(Occupation { value: p_down, warnings })
        }
    }
}

/// `⟨σ^φ ⊗ σ^φ⟩` with `σ^φ = cos φ σˣ + sin φ σʸ`, sampled at each phase.
pub fn parity_fringe(state: &QuantumState, qubits: [usize; 2], phases: &[f64]) -> Result<ObservableSeries> {
    let [q1, q2] = qubits;
    if q1 == q2 {
        return Err(Error::Precondition("parity needs two distinct qubits".into()));
    }
    require_kind(state, q1, SubsystemKind::Qubit)?;
    require_kind(state, q2, SubsystemKind::Qubit)?;
    let x = local_operator(LocalKind::PauliX, 2)?;
    let y = local_operator(LocalKind::PauliY, 2)?;
    let layout = state.layout();
    let corr = |a: &DMatrix<C64>, b: &DMatrix<C64>| -> Result<f64> {
        expect_real(state, &Operator::product(layout, &[(q1, a), (q2, b)])?)
    };
    let (xx, yy) = (corr(&x, &x)?, corr(&y, &y)?);
    let xy = corr(&x, &y)? + corr(&y, &x)?;
    let values = phases
        .iter()
        .map(|&phi| {
            let (s, c) = phi.sin_cos();
            c * c * xx + s * s * yy + s * c * xy
        })
        .collect();
    ObservableSeries::new("parity", phases.to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::thermal_matrix;
    use crate::hilbert::{fidelity, ket};
    use crate::models::LatticeGraph;
    use crate::prep_measure::{prepare_bell, BellState};
    use std::f64::consts::PI;

    fn link_state(j_t: f64) -> QuantumState {
        // |1,−,0⟩ evolved under the h = 0 link Hamiltonian, written out directly
        let layout = LatticeGraph::link().layout(2).unwrap();
        let a = QuantumState::product(layout.clone(), &[ket::fock(1, 3), ket::minus(), ket::fock(0, 3)]).unwrap();
        let b = QuantumState::product(layout.clone(), &[ket::fock(0, 3), ket::plus(), ket::fock(1, 3)]).unwrap();
        let v = a.as_vector().unwrap() * C64::from(j_t.cos()) + b.as_vector().unwrap() * C64::new(0.0, -j_t.sin());
        QuantumState::pure(layout, v).unwrap()
    }

    #[test]
    fn postselect_half_after_quarter_period() {
        let s = link_state(PI / 4.0);
        let kept = readout_postselect(&s, &[1], &[Spin::Up]).unwrap();
        assert!((kept.probability - 0.5).abs() < 1e-12);
        let other = readout_postselect(&s, &[1], &[Spin::Down]).unwrap();
        assert!((kept.probability + other.probability - 1.0).abs() < 1e-10);
    }

    #[test]
    fn postselect_product_and_zero_probability() {
        let layout = LatticeGraph::link().layout(2).unwrap();
        let s = QuantumState::product(layout.clone(), &[ket::fock(1, 3), ket::up(), ket::fock(2, 3)]).unwrap();
        let kept = readout_postselect(&s, &[1], &[Spin::Up]).unwrap();
        assert!((kept.probability - 1.0).abs() < 1e-14);
        assert!((fidelity(&kept.state, &s).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(readout_postselect(&s, &[1], &[Spin::Down]), Err(Error::ZeroProbability)));
        assert!(readout_postselect(&s, &[0], &[Spin::Up]).is_err());
        let mixed = readout_postselect(&s.to_mixed(), &[1], &[Spin::Up]).unwrap();
        assert!((mixed.state.trace().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn occupation_paths_agree_within_one_excitation() {
        for (j_t, expect) in [(PI / 2.0, 1.0), (PI / 4.0, 0.5)] {
            let s = link_state(j_t);
            for via in [OccupationProbe::Direct, OccupationProbe::BsbProbe] {
                let o = measure_occupation(&s, 2, via).unwrap();
                assert!((o.value - expect).abs() < 1e-12, "{via:?}");
                assert!(o.warnings.is_empty());
            }
        }
    }

    #[test]
    fn leakage_is_flagged() {
        let layout = build_layout(vec![SubsystemSpec::oscillator("m", 4)]).unwrap();
        let mut rho = DMatrix::<C64>::zeros(5, 5);
        rho[(0, 0)] = C64::from(0.55);
        rho[(1, 1)] = C64::from(0.40);
        rho[(2, 2)] = C64::from(0.05);
        let s = QuantumState::mixed(layout, rho).unwrap();
        let direct = measure_occupation(&s, 0, OccupationProbe::Direct).unwrap();
        let probe = measure_occupation(&s, 0, OccupationProbe::BsbProbe).unwrap();
        assert!((direct.value - 0.5).abs() < 1e-12);
        // |↑,2⟩ transfers with probability sin²(π/√2)
        let oracle = 0.40 + 0.05 * (PI / 2f64.sqrt()).sin().powi(2);
        assert!((probe.value - oracle).abs() < 1e-12);
        assert!((probe.value - direct.value).abs() > 1e-3);
        assert_eq!(probe.warnings.len(), 1);
    }

    #[test]
    fn thermal_probe_matches_formula() {
        let layout = build_layout(vec![SubsystemSpec::oscillator("m", 8)]).unwrap();
        let s = QuantumState::mixed(layout, thermal_matrix(0.3, 8).unwrap()).unwrap();
        let p = crate::dynamics::thermal_populations(0.3, 8).unwrap();
        let oracle: f64 = p.iter().enumerate().map(|(n, pn)| pn * (PI / 2.0 * (n as f64).sqrt()).sin().powi(2)).sum();
        let probe = measure_occupation(&s, 0, OccupationProbe::BsbProbe).unwrap();
        assert!((probe.value - oracle).abs() < 1e-12);
    }

    #[test]
    fn fringe_examples() {
        let layout = build_layout(vec![SubsystemSpec::qubit("a"), SubsystemSpec::qubit("b")]).unwrap();
        let s0 = QuantumState::basis(layout.clone(), &[0, 0]).unwrap();
        let phi = prepare_bell(&s0, [0, 1], BellState::PhiPlus, 0.0).unwrap();
        let phases: Vec<f64> = (0..16).map(|k| k as f64 * PI / 8.0).collect();
        let f = parity_fringe(&phi, [0, 1], &phases).unwrap();
        for (p, v) in phases.iter().zip(&f.values) {
            assert!((v - (2.0 * p).cos()).abs() < 1e-12);
        }
        let xx = Operator::product(&layout, &[(0, &local_operator(LocalKind::PauliX, 2).unwrap()), (1, &local_operator(LocalKind::PauliX, 2).unwrap())]).unwrap();
        assert!((f.values[0] - expect_real(&phi, &xx).unwrap()).abs() < 1e-15);
        let mut rho = DMatrix::<C64>::zeros(4, 4);
        rho[(0, 0)] = C64::from(0.5);
        rho[(3, 3)] = C64::from(0.5);
        let dephased = QuantumState::mixed(layout, rho).unwrap();
        let g = parity_fringe(&dephased, [0, 1], &phases).unwrap();
        assert!(g.values.iter().all(|v| v.abs() < 1e-15));
    }
}
