use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::sdf::{Envelope, SdfParams};
use crate::error::{Error, Result};
use crate::hilbert::{HilbertLayout, Operator, SubsystemKind, C64};

/// Instantaneous rotation `exp(−i·angle/2·(cos φ σˣ + sin φ σʸ))` on the
/// listed qubits, or on every qubit when the list is empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitGate {
    pub angle: f64,
    pub phase: f64,
    #[serde(default)]
    pub qubits: Vec<usize>,
}

impl QubitGate {
    pub fn global_pi_x() -> Self {
        Self { angle: PI, phase: 0.0, qubits: Vec::new() }
    }

    /// Single-qubit rotation matrix in the `(|↑⟩, |↓⟩)` basis.
    pub fn matrix(&self) -> DMatrix<C64> {
        rotation_matrix(self.angle, self.phase)
    }

    pub fn operator(&self, layout: &Arc<HilbertLayout>) -> Result<Operator> {
        let targets = if self.qubits.is_empty() { layout.qubit_indices() } else { self.qubits.clone() };
        for &q in &targets {
            if layout.subsystem(q)?.kind != SubsystemKind::Qubit {
                return Err(Error::WrongRegister(format!("gate target {q} is not a qubit")));
            }
        }
        let m = self.matrix();
        let factors: Vec<(usize, &DMatrix<C64>)> = targets.iter().map(|&q| (q, &m)).collect();
        Operator::product(layout, &factors)
    }
}

/// `exp(−i·angle/2·(cos φ σˣ + sin φ σʸ))`.
pub fn rotation_matrix(angle: f64, phase: f64) -> DMatrix<C64> {
    let c = C64::from((angle / 2.0).cos());
    let s = (angle / 2.0).sin();
    let off_upper = C64::new(0.0, -s) * C64::from_polar(1.0, -phase);
    let off_lower = C64::new(0.0, -s) * C64::from_polar(1.0, phase);
    DMatrix::from_row_slice(2, 2, &[c, off_upper, off_lower, c])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Sdf { sdf: SdfParams, flat_duration: f64 },
    Gate(QubitGate),
}

impl Step {
    pub fn envelope(&self) -> Option<Envelope> {
        match self {
            Step::Sdf { sdf, flat_duration } => Some(Envelope::new(sdf.ramp, *flat_duration)),
            Step::Gate(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Plain,
    LinkEcho,
    LoopPhaseCancel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    steps: Vec<Step>,
}

impl PulseSchedule {
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        for step in &steps {
            match step {
                Step::Sdf { sdf, flat_duration } => {
                    sdf.validate()?;
                    if !(flat_duration.is_finite() && *flat_duration >= 0.0) {
                        return Err(Error::InvalidPulse(format!("flat duration {flat_duration} must be ≥ 0")));
                    }
                }
                Step::Gate(g) => {
                    if !(g.angle.is_finite() && g.phase.is_finite()) {
                        return Err(Error::InvalidPulse("gate angle and phase must be finite".into()));
                    }
                }
            }
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn segments(&self) -> impl Iterator<Item = (&SdfParams, Envelope)> {
        self.steps.iter().filter_map(|s| match s {
            Step::Sdf { sdf, flat_duration } => Some((sdf, Envelope::new(sdf.ramp, *flat_duration))),
            Step::Gate(_) => None,
        })
    }

    /// Nominal interaction time: the sum of segment FWHMs.
    pub fn total_fwhm(&self) -> f64 {
        self.segments().map(|(_, e)| e.fwhm()).sum()
    }

    /// Wall-clock length including both ramps of every segment.
    pub fn total_duration(&self) -> f64 {
        self.segments().map(|(_, e)| e.duration()).sum()
    }

    /// Time the effective Hamiltonian acts, `Σ ∫g²`.
    pub fn effective_time(&self) -> f64 {
        self.segments().map(|(_, e)| e.effective_time()).sum()
    }
}

/// Builds one of the standard schedules with every SDF segment lasting
/// `segment_fwhm`.
///
/// * `Plain`: a single segment.
/// * `LinkEcho`: segment, global π about x, segment with swapped axes.
/// * `LoopPhaseCancel`: two echo arms of two segments each, `+Δ` then `−Δ`,
///   with the axis order flipped whenever the net effective sign would flip.
pub fn build_schedule(kind: ScheduleKind, sdf: &SdfParams, segment_fwhm: f64) -> Result<PulseSchedule> {
    sdf.validate()?;
    if !(segment_fwhm.is_finite() && segment_fwhm > 0.0) {
        return Err(Error::InvalidPulse(format!("segment duration {segment_fwhm} must be positive")));
    }
    let flat = segment_fwhm - sdf.ramp;
    if flat < 0.0 {
        return Err(Error::InvalidPulse(format!(
            "segment FWHM {segment_fwhm:.3e} s is shorter than the ramp {:.3e} s",
            sdf.ramp
        )));
    }
    let seg = |delta_sign: f64, sign: i8| Step::Sdf {
        sdf: sdf.with_delta(delta_sign * sdf.delta).with_phase_sign(sign * sdf.phase_sign),
        flat_duration: flat,
    };
    let steps = match kind {
        ScheduleKind::Plain => vec![seg(1.0, 1)],
        ScheduleKind::LinkEcho => vec![seg(1.0, 1), Step::Gate(QubitGate::global_pi_x()), seg(1.0, -1)],
        ScheduleKind::LoopPhaseCancel => vec![
            seg(1.0, 1),
            seg(-1.0, -1),
            Step::Gate(QubitGate::global_pi_x()),
            seg(1.0, -1),
            seg(-1.0, 1),
        ],
    };
    PulseSchedule::new(steps)
}
