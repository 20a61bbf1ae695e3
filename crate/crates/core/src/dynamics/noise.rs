use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    build_layout, embed_kind, HilbertLayout, LocalKind, Operator, QuantumState, SubsystemKind, SubsystemSpec, C64,
};

/// Decoherence parameters keyed by subsystem label. Absent entries mean no
/// heating, infinite coherence time or zero thermal occupation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Heating rate ṅ in quanta/s per oscillator.
    #[serde(default)]
    pub heating_rate: BTreeMap<String, f64>,
    /// Motional coherence time t_c in seconds per oscillator.
    #[serde(default)]
    pub motional_coherence: BTreeMap<String, f64>,
    /// Qubit T₂ in seconds.
    #[serde(default)]
    pub qubit_t2: BTreeMap<String, f64>,
    /// Mean thermal occupation of each oscillator before preparation.
    #[serde(default)]
    pub initial_nbar: BTreeMap<String, f64>,
}

impl NoiseModel {
    pub fn off() -> Self {
        Self::default()
    }

    pub fn with_heating(mut self, label: &str, rate: f64) -> Self {
        self.heating_rate.insert(label.into(), rate);
        self
    }

    pub fn with_coherence(mut self, label: &str, t_c: f64) -> Self {
        self.motional_coherence.insert(label.into(), t_c);
        self
    }

    pub fn with_t2(mut self, label: &str, t2: f64) -> Self {
        self.qubit_t2.insert(label.into(), t2);
        self
    }

    pub fn with_nbar(mut self, label: &str, nbar: f64) -> Self {
        self.initial_nbar.insert(label.into(), nbar);
        self
    }

    /// True when no jump operator is generated.
    pub fn is_noiseless(&self) -> bool {
        self.heating_rate.values().all(|&r| r == 0.0)
            && self.motional_coherence.values().all(|t| t.is_infinite())
            && self.qubit_t2.values().all(|t| t.is_infinite())
    }

    pub fn validate(&self) -> Result<()> {
        let check = |section: &str, map: &BTreeMap<String, f64>, allow_inf: bool, positive: bool| -> Result<()> {
            for (label, &v) in map {
                let ok = !v.is_nan() && (allow_inf || v.is_finite()) && if positive { v > 0.0 } else { v >= 0.0 };
                if !ok {
                    return Err(Error::Config {
                        key: format!("noise.{section}.{label}"),
                        message: format!("invalid value {v}"),
                    });
                }
            }
            Ok(())
        };
        check("heating_rate", &self.heating_rate, false, false)?;
        check("motional_coherence", &self.motional_coherence, true, true)?;
        check("qubit_t2", &self.qubit_t2, true, true)?;
        check("initial_nbar", &self.initial_nbar, false, false)
    }

    fn check_labels(&self, layout: &HilbertLayout) -> Result<()> {
        let sections = [
            (&self.heating_rate, SubsystemKind::Oscillator),
            (&self.motional_coherence, SubsystemKind::Oscillator),
            (&self.initial_nbar, SubsystemKind::Oscillator),
            (&self.qubit_t2, SubsystemKind::Qubit),
        ];
        for (map, kind) in sections {
            for label in map.keys() {
                match layout.index_of(label) {
                    Some(i) if layout.subsystems()[i].kind == kind => {}
                    _ => {
                        return Err(Error::WrongRegister(format!("noise entry `{label}` does not name a {kind:?}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Jump operators: `√ṅ â†` and `√ṅ â` per heated mode, `√(2/t_c) â†â`
    /// per dephased mode, `√(1/2T₂) σᶻ` per dephased qubit.
    pub fn jump_operators(&self, layout: &Arc<HilbertLayout>) -> Result<Vec<Operator>> {
        self.validate()?;
        self.check_labels(layout)?;
        let mut out = Vec::new();
        for (label, &rate) in &self.heating_rate {
            if rate > 0.0 {
                let m = layout.index_of(label).expect("checked label");
                out.push(embed_kind(LocalKind::Create, m, layout)?.scale(rate.sqrt()));
                out.push(embed_kind(LocalKind::Annihilate, m, layout)?.scale(rate.sqrt()));
            }
        }
        for (label, &t_c) in &self.motional_coherence {
            if t_c.is_finite() {
                let m = layout.index_of(label).expect("checked label");
                out.push(embed_kind(LocalKind::Number, m, layout)?.scale((2.0 / t_c).sqrt()));
            }
        }
        for (label, &t2) in &self.qubit_t2 {
            if t2.is_finite() {
                let q = layout.index_of(label).expect("checked label");
                out.push(embed_kind(LocalKind::PauliZ, q, layout)?.scale((0.5 / t2).sqrt()));
            }
        }
        Ok(out)
    }

    pub fn nbar(&self, label: &str) -> f64 {
        self.initial_nbar.get(label).copied().unwrap_or(0.0)
    }
}

/// Truncated Boltzmann populations `p_n ∝ (n̄/(1+n̄))ⁿ`, renormalized.
pub fn thermal_populations(nbar: f64, cutoff: usize) -> Result<Vec<f64>> {
    if !(nbar.is_finite() && nbar >= 0.0) {
        return Err(Error::Precondition(format!("mean occupation must be ≥ 0, got {nbar}")));
    }
    let ratio = nbar / (1.0 + nbar);
    let mut p: Vec<f64> = (0..=cutoff).map(|n| ratio.powi(n as i32)).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

pub fn thermal_matrix(nbar: f64, cutoff: usize) -> Result<DMatrix<C64>> {
    let p = thermal_populations(nbar, cutoff)?;
    Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(p.len(), p.into_iter().map(C64::from))))
}

/// Thermal state of a single oscillator labelled `m`.
pub fn thermal_oscillator_state(nbar: f64, cutoff: usize) -> Result<QuantumState> {
    let rho = thermal_matrix(nbar, cutoff)?;
    let layout = build_layout(vec![SubsystemSpec::oscillator("m", cutoff)])?;
    QuantumState::mixed(layout, rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_examples() {
        let s = thermal_oscillator_state(0.0, 10).unwrap();
        assert_eq!(s.populations()[0], 1.0);
        let p = thermal_populations(0.1, 10).unwrap();
        // geometric distribution oracle: p_n = n̄ⁿ/(1+n̄)^{n+1}
        for (n, &pn) in p.iter().enumerate().take(4) {
            let exact = 0.1f64.powi(n as i32) / 1.1f64.powi(n as i32 + 1);
            assert!((pn - exact).abs() < 1e-9, "n={n}");
        }
        assert!((p[0] - 0.909).abs() < 1e-3 && (p[1] - 0.0826).abs() < 1e-4);
        for nbar in [0.0, 0.1, 2.0, 50.0] {
            let t = thermal_oscillator_state(nbar, 6).unwrap();
            assert!((t.trace().re - 1.0).abs() < 1e-12);
        }
        assert!(thermal_populations(-0.1, 3).is_err());
    }

    #[test]
    fn jump_operator_set() {
        let layout = build_layout(vec![
            SubsystemSpec::oscillator("m1", 3),
            SubsystemSpec::qubit("l"),
            SubsystemSpec::oscillator("m2", 3),
        ])
        .unwrap();
        let noise = NoiseModel::off()
            .with_heating("m1", 300.0)
            .with_coherence("m1", 1.7e-3)
            .with_coherence("m2", f64::INFINITY)
            .with_t2("l", 1e-2);
        assert_eq!(noise.jump_operators(&layout).unwrap().len(), 4);
        assert!(!noise.is_noiseless());
        assert!(NoiseModel::off().with_coherence("m1", f64::INFINITY).is_noiseless());
        assert!(NoiseModel::off().with_heating("l", 1.0).jump_operators(&layout).is_err());
        assert!(NoiseModel::off().with_heating("m1", -1.0).validate().is_err());
    }
}
