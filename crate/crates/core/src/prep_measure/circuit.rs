use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::gates::{bsb_pi, carrier_rotation, prepare_bell, BellState};
use super::readout::{readout_postselect, Spin};
use super::squeeze::{squeeze, SqueezeParams};
use crate::error::Result;
use crate::hilbert::QuantumState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum PrepStep {
    Bsb { qubit: usize, mode: usize },
    Carrier { qubit: usize, angle: f64, phase: f64 },
    Bell { qubits: [usize; 2], state: BellState, #[serde(default)] tilde_phase: f64 },
    Squeeze { mode: usize, r: f64, #[serde(default)] theta: f64 },
    PostSelect { qubits: Vec<usize>, keep: Vec<Spin> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PrepCircuit {
    pub steps: Vec<PrepStep>,
}

#[derive(Clone, Debug)]
pub struct PrepOutcome {
    pub state: QuantumState,
    /// Product of all post-selection success probabilities.
    pub probability: f64,
}

impl PrepCircuit {
    pub fn new(steps: Vec<PrepStep>) -> Self {
        Self { steps }
    }

    /// Sideband π pulse moving the link qubit's excitation into `mode`,
    /// then a π/2 rotation leaving the link in `|−⟩`. From `|0,↓,0⟩` this
    /// yields `|1,−,0⟩` up to a global phase.
    pub fn excitation_with_minus_link(link: usize, mode: usize) -> Self {
        Self::new(vec![
            PrepStep::Bsb { qubit: link, mode },
            PrepStep::Carrier { qubit: link, angle: FRAC_PI_2, phase: -FRAC_PI_2 },
        ])
    }

    pub fn apply(&self, state: &QuantumState) -> Result<PrepOutcome> {
        let mut s = state.clone();
        let mut probability = 1.0;
        for step in &self.steps {
            s = match step {
                PrepStep::Bsb { qubit, mode } => bsb_pi(&s, *qubit, *mode)?,
                PrepStep::Carrier { qubit, angle, phase } => carrier_rotation(&s, *qubit, *angle, *phase)?,
                PrepStep::Bell { qubits, state, tilde_phase } => prepare_bell(&s, *qubits, *state, *tilde_phase)?,
                PrepStep::Squeeze { mode, r, theta } => squeeze(&s, *mode, &SqueezeParams::new(*r, *theta)?)?,
                PrepStep::PostSelect { qubits, keep } => {
                    let out = readout_postselect(&s, qubits, keep)?;
                    probability *= out.probability;
                    out.state
                }
            };
        }
        Ok(PrepOutcome { state: s, probability })
    }
}
