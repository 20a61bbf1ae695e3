//! Spin-dependent-force drive and its leading-order effective description.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Axis;
use crate::error::{Error, Result};
use crate::hilbert::{embed_kind, HilbertLayout, LocalKind, Operator, SubsystemKind, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdfParams {
    /// Force strengths Ω₁, Ω₂ in rad/s.
    pub omega1: f64,
    pub omega2: f64,
    /// Detuning Δ in rad/s.
    pub delta: f64,
    pub axis1: Axis,
    pub axis2: Axis,
    /// Register indices of the two driven oscillators.
    pub mode1: usize,
    pub mode2: usize,
    /// Ramp duration t_R in seconds.
    pub ramp: f64,
    /// `-1` swaps the conditioning axes, which negates the effective term.
    pub phase_sign: i8,
}

impl SdfParams {
    /// `σˣ`/`σʸ` forces producing `σᶻ`-conditioned tunnelling on modes
    /// `mode1`, `mode2`.
    pub fn link(omega1: f64, omega2: f64, delta: f64, ramp: f64, mode1: usize, mode2: usize) -> Self {
        Self { omega1, omega2, delta, axis1: Axis::X, axis2: Axis::Y, mode1, mode2, ramp, phase_sign: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPulse(msg));
        if !(self.omega1.is_finite() && self.omega2.is_finite() && self.delta.is_finite() && self.ramp.is_finite()) {
            return bad("non-finite drive parameter".into());
        }
        if self.delta == 0.0 {
            return bad("detuning must be nonzero".into());
        }
        if self.omega1 < 0.0 || self.omega2 < 0.0 {
            return bad("force strengths must be non-negative".into());
        }
        if self.ramp < 0.0 {
            return bad("ramp duration must be non-negative".into());
        }
        if self.mode1 == self.mode2 {
            return bad("the two forces must drive different modes".into());
        }
        if self.axis1 == self.axis2 {
            return bad("conditioning axes must differ for a nonvanishing effective term".into());
        }
        if self.phase_sign != 1 && self.phase_sign != -1 {
            return bad(format!("phase_sign must be ±1, got {}", self.phase_sign));
        }
        Ok(())
    }

    /// Conditioning axes after applying `phase_sign`.
    pub fn effective_axes(&self) -> (Axis, Axis) {
        if self.phase_sign < 0 {
            (self.axis2, self.axis1)
        } else {
            (self.axis1, self.axis2)
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_phase_sign(mut self, sign: i8) -> Self {
        self.phase_sign = sign;
        self
    }

    /// Largest angular frequency in the drive, used for step control.
    pub fn fastest_rate(&self) -> f64 {
        self.delta.abs().max(self.omega1).max(self.omega2)
    }
}

/// `Ω_eff = Ω₁Ω₂ / (2Δ)`.
pub fn effective_tunnelling_rate(sdf: &SdfParams) -> Result<f64> {
    if sdf.delta == 0.0 || !sdf.delta.is_finite() {
        return Err(Error::InvalidPulse("detuning must be nonzero".into()));
    }
    Ok(sdf.omega1 * sdf.omega2 / (2.0 * sdf.delta))
}

/// Hann-ramped rectangular envelope: `sin²` up over `ramp`, flat, `sin²` down.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub ramp: f64,
    pub flat: f64,
}

impl Envelope {
    pub fn new(ramp: f64, flat: f64) -> Self {
        Self { ramp, flat }
    }

    pub fn duration(&self) -> f64 {
        self.flat + 2.0 * self.ramp
    }

    /// Full width at half maximum, `flat + ramp`.
    pub fn fwhm(&self) -> f64 {
        self.flat + self.ramp
    }

    /// `∫g² dt = flat + 3/4·ramp`, the time the effective Hamiltonian acts.
    pub fn effective_time(&self) -> f64 {
        self.flat + 0.75 * self.ramp
    }

    pub fn value(&self, t: f64) -> f64 {
        let end = self.duration();
        if !(0.0..=end).contains(&t) {
            0.0
        } else if t < self.ramp {
            (PI * t / (2.0 * self.ramp)).sin().powi(2)
        } else if t <= self.ramp + self.flat {
            1.0
        } else {
            (PI * (end - t) / (2.0 * self.ramp)).sin().powi(2)
        }
    }
}

/// Precomputed operators of one drive: `H(t) = g(t)(e^{−iΔt} M + e^{iΔt} M†)`.
#[derive(Clone, Debug)]
pub struct SdfDrive {
    pub params: SdfParams,
    pub coupling: Operator,
}

/// `Sᵏ = Σ_q σᵏ_q` over every qubit in the layout.
pub fn collective_spin(layout: &Arc<HilbertLayout>, axis: Axis) -> Result<Operator> {
    let qubits = layout.qubit_indices();
    if qubits.is_empty() {
        return Err(Error::WrongRegister("drive needs at least one qubit".into()));
    }
    let mut s = Operator::zeros(layout);
    for q in qubits {
        s = s + embed_kind(axis.kind(), q, layout)?;
    }
    Ok(s)
}

fn check_modes(sdf: &SdfParams, layout: &HilbertLayout) -> Result<()> {
    for m in [sdf.mode1, sdf.mode2] {
        if layout.subsystem(m)?.kind != SubsystemKind::Oscillator {
            return Err(Error::WrongRegister(format!("drive target {m} is not an oscillator")));
        }
    }
    Ok(())
}

impl SdfDrive {
    pub fn new(params: SdfParams, layout: &Arc<HilbertLayout>) -> Result<Self> {
        params.validate()?;
        check_modes(&params, layout)?;
        let (i, j) = params.effective_axes();
        let a1 = embed_kind(LocalKind::Annihilate, params.mode1, layout)?;
        let a2 = embed_kind(LocalKind::Annihilate, params.mode2, layout)?;
        let si = collective_spin(layout, i)?;
        let sj = collective_spin(layout, j)?;
        let coupling = (&a1 * &si).scale(params.omega1 / 2.0) + (&sj * &a2).scale(params.omega2 / 2.0);
        Ok(Self { params, coupling })
    }

    /// Hamiltonian at segment-local time `t` with envelope value `g`.
    pub fn hamiltonian(&self, t: f64, g: f64) -> Operator {
        let phase = C64::from_polar(g, -self.params.delta * t);
        let m = self.coupling.scale(phase);
        &m + &m.adjoint()
    }
}

/// The drive Hamiltonian of one segment at local time `t`.
pub fn hamiltonian_micro(sdf: &SdfParams, envelope: &Envelope, t: f64, layout: &Arc<HilbertLayout>) -> Result<Operator> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::InvalidPulse(format!("time {t} must be finite and ≥ 0")));
    }
    Ok(SdfDrive::new(*sdf, layout)?.hamiltonian(t, envelope.value(t)))
}

/// Leading-order tunnelling term
/// `(Ω_eff/2)[Sⁱ, Sʲ](â₁†â₂ − â₁â₂†)`, Hermitian.
pub fn effective_hamiltonian(sdf: &SdfParams, layout: &Arc<HilbertLayout>) -> Result<Operator> {
    sdf.validate()?;
    check_modes(sdf, layout)?;
    let rate = effective_tunnelling_rate(sdf)?;
    let (i, j) = sdf.effective_axes();
    let si = collective_spin(layout, i)?;
    let sj = collective_spin(layout, j)?;
    let comm = si.commutator(&sj);
    let a1 = embed_kind(LocalKind::Annihilate, sdf.mode1, layout)?;
    let a2 = embed_kind(LocalKind::Annihilate, sdf.mode2, layout)?;
    let hop = &(&a1.adjoint() * &a2) - &(&a1 * &a2.adjoint());
    Ok((&comm * &hop).scale(rate / 2.0))
}

/// Spin-spin part of the leading-order term,
/// `−(Ω₁²(Sⁱ)² + Ω₂²(Sʲ)²)/(4Δ)`; a constant for a single qubit.
pub fn geometric_phase_term(sdf: &SdfParams, layout: &Arc<HilbertLayout>) -> Result<Operator> {
    sdf.validate()?;
    let (i, j) = sdf.effective_axes();
    let si = collective_spin(layout, i)?;
    let sj = collective_spin(layout, j)?;
    let sum = (&si * &si).scale(sdf.omega1 * sdf.omega1) + (&sj * &sj).scale(sdf.omega2 * sdf.omega2);
    Ok(sum.scale(-1.0 / (4.0 * sdf.delta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{hamiltonian_link, LatticeGraph, LinkParams, LinkSites};
    use proptest::prelude::*;

    fn link_sdf() -> SdfParams {
        let two_pi = 2.0 * PI;
        SdfParams::link(two_pi * 1.2e3, two_pi * 1.2e3, two_pi * 25e3, 0.0, 0, 2)
    }

    #[test]
    fn effective_rate_arithmetic() {
        let rate = effective_tunnelling_rate(&link_sdf()).unwrap();
        assert!((rate / (2.0 * PI) - 28.8).abs() < 1e-9);
        let flipped = effective_tunnelling_rate(&link_sdf().with_delta(-link_sdf().delta)).unwrap();
        assert_eq!(flipped, -rate);
        let mut off = link_sdf();
        off.omega1 = 0.0;
        assert_eq!(effective_tunnelling_rate(&off).unwrap(), 0.0);
        assert!(effective_tunnelling_rate(&link_sdf().with_delta(0.0)).is_err());
    }

    #[test]
    fn envelope_shape() {
        let e = Envelope::new(2.0, 3.0);
        assert_eq!(e.duration(), 7.0);
        assert_eq!(e.fwhm(), 5.0);
        assert_eq!(e.value(0.0), 0.0);
        assert!((e.value(1.0) - 0.5).abs() < 1e-15);
        assert_eq!(e.value(3.5), 1.0);
        assert!((e.value(6.0) - 0.5).abs() < 1e-15);
        assert_eq!(e.value(7.5), 0.0);
        // trapezoid-rule oracle for ∫g²
        let n = 200_000;
        let dt = e.duration() / n as f64;
        let area: f64 = (0..=n)
            .map(|k| {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                w * e.value(k as f64 * dt).powi(2) * dt
            })
            .sum();
        assert!((area - e.effective_time()).abs() < 1e-8);
        let rect = Envelope::new(0.0, 2.0);
        assert_eq!(rect.value(0.0), 1.0);
        assert_eq!(rect.fwhm(), 2.0);
    }

    #[test]
    fn micro_at_zero_phase() {
        let layout = LatticeGraph::link().layout(3).unwrap();
        let sdf = link_sdf();
        let h = hamiltonian_micro(&sdf, &Envelope::new(0.0, 1.0), 0.0, &layout).unwrap();
        let x1 = embed_kind(LocalKind::Annihilate, 0, &layout).unwrap();
        let x1 = &x1 + &x1.adjoint();
        let x2 = embed_kind(LocalKind::Annihilate, 2, &layout).unwrap();
        let x2 = &x2 + &x2.adjoint();
        let sx = embed_kind(LocalKind::PauliX, 1, &layout).unwrap();
        let sy = embed_kind(LocalKind::PauliY, 1, &layout).unwrap();
        let expected = (&x1 * &sx).scale(sdf.omega1 / 2.0) + (&sy * &x2).scale(sdf.omega2 / 2.0);
        assert!(h.max_abs_diff(&expected) < 1e-9);
        let ramped = Envelope::new(1.0, 1.0);
        let hr = hamiltonian_micro(&sdf, &ramped, 0.25, &layout).unwrap();
        let g = ramped.value(0.25);
        let full = hamiltonian_micro(&sdf, &ramped, 1.5, &layout).unwrap().max_abs();
        assert!(g > 0.0 && g < 1.0);
        assert!(hr.max_abs() <= full + 1e-9);
    }

    #[test]
    fn effective_term_matches_link_up_to_mode_phase() {
        let layout = LatticeGraph::link().layout(3).unwrap();
        let sdf = link_sdf();
        let rate = effective_tunnelling_rate(&sdf).unwrap();
        let heff = effective_hamiltonian(&sdf, &layout).unwrap();
        assert!(heff.hermiticity_defect() < 1e-12);
        // V = exp(iπ/2 n₂) maps the effective term onto real hopping
        let d = layout.total_dim();
        let v: Vec<C64> = (0..d).map(|k| C64::from_polar(1.0, PI / 2.0 * layout.digits(k)[2] as f64)).collect();
        let v = Operator::from_sparse(layout.clone(), crate::hilbert::SparseMatrix::from_diagonal(&v)).unwrap();
        let mapped = &(&v * &heff) * &v.adjoint();
        let link = hamiltonian_link(&LinkParams::new(rate, 0.0), &layout, LinkSites::STANDARD).unwrap();
        assert!(mapped.max_abs_diff(&link) < 1e-9 * rate.abs().max(1.0));
        // swapping the axes negates the conditioning
        let swapped = effective_hamiltonian(&sdf.with_phase_sign(-1), &layout).unwrap();
        assert!((&swapped + &heff).max_abs() < 1e-9);
    }

    #[test]
    fn invalid_drives() {
        let mut s = link_sdf();
        s.axis2 = Axis::X;
        assert!(s.validate().is_err());
        let mut s = link_sdf();
        s.mode2 = 0;
        assert!(s.validate().is_err());
        let layout = LatticeGraph::link().layout(2).unwrap();
        let mut s = link_sdf();
        s.mode2 = 1;
        assert!(SdfDrive::new(s, &layout).is_err());
        assert!(hamiltonian_micro(&link_sdf(), &Envelope::new(0.0, 1.0), -1.0, &layout).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]
        #[test]
        fn micro_is_hermitian(t in 0.0f64..2e-3) {
            let layout = LatticeGraph::loop_().layout(2).unwrap();
            let mut sdf = link_sdf();
            sdf.mode2 = 3;
            sdf.ramp = 4e-4;
            let h = hamiltonian_micro(&sdf, &Envelope::new(sdf.ramp, 1e-3), t, &layout).unwrap();
            prop_assert!(h.hermiticity_defect() < 1e-12 * h.max_abs().max(1.0));
        }
    }
}
