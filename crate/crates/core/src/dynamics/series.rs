use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{expectation, Operator, QuantumState};

/// Real values of one observable on a grid. The grid is usually time in
/// seconds; parity fringes reuse it for the analysis phase φ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// One-sigma uncertainties when the values come from sampled shots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<f64>>,
}

impl ObservableSeries {
    pub fn new(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), got: values.len() });
        }
        Ok(Self { label: label.into(), times, values, stderr: None })
    }

    pub fn with_stderr(mut self, stderr: Vec<f64>) -> Result<Self> {
        if stderr.len() != self.values.len() {
            return Err(Error::DimensionMismatch { expected: self.values.len(), got: stderr.len() });
        }
        self.stderr = Some(stderr);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest deviation from the first value.
    pub fn drift(&self) -> f64 {
        match self.values.first() {
            Some(&v0) => self.values.iter().map(|v| (v - v0).abs()).fold(0.0, f64::max),
            None => 0.0,
        }
    }

    pub fn map(&self, label: impl Into<String>, f: impl Fn(f64) -> f64) -> Self {
        Self {
            label: label.into(),
            times: self.times.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            stderr: None,
        }
    }
}

/// Named observables to record along an evolution.
#[derive(Clone, Debug, Default)]
pub struct Record {
    pub observables: Vec<(String, Operator)>,
    pub keep_states: bool,
}

impl Record {
    /// Keep every sampled state and record nothing else.
    pub fn states() -> Self {
        Self { observables: Vec::new(), keep_states: true }
    }

    pub fn observables(observables: Vec<(String, Operator)>) -> Self {
        Self { observables, keep_states: false }
    }

    pub fn with(mut self, label: impl Into<String>, op: Operator) -> Self {
        self.observables.push((label.into(), op));
        self
    }

    pub fn keep_states(mut self, keep: bool) -> Self {
        self.keep_states = keep;
        self
    }
}

/// Sampled evolution. `states` holds one state per time when requested by
/// the [`Record`], otherwise it is empty; `final_state` is always set.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
    pub final_state: QuantumState,
    pub series: BTreeMap<String, ObservableSeries>,
    /// Non-fatal integrator diagnostics, e.g. small positivity violations.
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn series(&self, label: &str) -> Result<&ObservableSeries> {
        self.series
            .get(label)
            .ok_or_else(|| Error::Precondition(format!("trajectory has no series `{label}`")))
    }

    /// Evaluates an observable on every stored state.
    pub fn observe(&self, label: &str, op: &Operator) -> Result<ObservableSeries> {
        if self.states.len() != self.times.len() {
            return Err(Error::Precondition("trajectory was recorded without states".into()));
        }
        let values = self.states.iter().map(|s| Ok(expectation(s, op)?.re)).collect::<Result<Vec<_>>>()?;
        ObservableSeries::new(label, self.times.clone(), values)
    }
}

/// Incrementally assembles a trajectory while an integrator runs.
pub(crate) struct Recorder<'a> {
    record: &'a Record,
    times: Vec<f64>,
    states: Vec<QuantumState>,
    values: Vec<Vec<f64>>,
    warnings: Vec<String>,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(record: &'a Record) -> Self {
        Self {
            record,
            times: Vec::new(),
            states: Vec::new(),
            values: vec![Vec::new(); record.observables.len()],
            warnings: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, t: f64, state: &QuantumState) -> Result<()> {
        self.times.push(t);
        for ((label, op), vals) in self.record.observables.iter().zip(&mut self.values) {
            let z = expectation(state, op)?;
            if op.hermitian_hint() && z.im.abs() > 1e-9 * z.re.abs().max(1.0) {
                self.warnings.push(format!("`{label}` has imaginary part {:.2e} at t={t:.6e}", z.im));
            }
            vals.push(z.re);
        }
        if self.record.keep_states {
            self.states.push(state.clone());
        }
        Ok(())
    }

    pub(crate) fn warn(&mut self, msg: String) {
        self.warnings.push(msg);
    }

    pub(crate) fn finish(self, final_state: QuantumState) -> Trajectory {
        let series = self
            .record
            .observables
            .iter()
            .zip(self.values)
            .map(|((label, _), values)| {
                let s = ObservableSeries { label: label.clone(), times: self.times.clone(), values, stderr: None };
                (label.clone(), s)
            })
            .collect();
        Trajectory { times: self.times, states: self.states, final_state, series, warnings: self.warnings }
    }
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Precondition("no sample times".into()));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Precondition("sample times must be finite and ≥ 0".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("sample times must be strictly increasing".into()));
    }
    Ok(())
}

/// Mean expectation of the generators at every stored state.
pub fn gauss_drift(trajectory: &Trajectory, generators: &[Operator]) -> Result<ObservableSeries> {
    if generators.is_empty() {
        return Err(Error::EmptySelection);
    }
    if trajectory.states.len() != trajectory.times.len() {
        return Err(Error::Precondition("gauss_drift needs a trajectory recorded with states".into()));
    }
    let n = generators.len() as f64;
    let values = trajectory
        .states
        .iter()
        .map(|s| {
            let mut acc = 0.0;
            for g in generators {
                acc += expectation(s, g)?.re;
            }
            Ok(acc / n)
        })
        .collect::<Result<Vec<_>>>()?;
    ObservableSeries::new("gauss", trajectory.times.clone(), values)
}
