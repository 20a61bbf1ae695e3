use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsystemKind {
    Qubit,
    Oscillator,
}

/// One tensor factor of a register.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsystemSpec {
    pub kind: SubsystemKind,
    pub dim: usize,
    pub label: String,
}

impl SubsystemSpec {
    pub fn qubit(label: impl Into<String>) -> Self {
        Self { kind: SubsystemKind::Qubit, dim: 2, label: label.into() }
    }

    /// Oscillator truncated to Fock states `0..=cutoff`.
    pub fn oscillator(label: impl Into<String>, cutoff: usize) -> Self {
        Self { kind: SubsystemKind::Oscillator, dim: cutoff + 1, label: label.into() }
    }

    pub fn cutoff(&self) -> usize {
        self.dim - 1
    }
}

/// Ordered register of subsystems. The order fixes the tensor-product
/// convention: the first subsystem is the most significant digit of a
/// global basis index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertLayout {
    subsystems: Vec<SubsystemSpec>,
    total_dim: usize,
}

impl HilbertLayout {
    pub fn subsystems(&self) -> &[SubsystemSpec] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn subsystem(&self, index: usize) -> Result<&SubsystemSpec> {
        self.subsystems.get(index).ok_or(Error::IndexOutOfRange { index, len: self.len() })
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.subsystems.iter().position(|s| s.label == label)
    }

    /// Product of the dimensions after `index`.
    pub fn stride(&self, index: usize) -> usize {
        self.subsystems[index + 1..].iter().map(|s| s.dim).product()
    }

    pub fn qubit_indices(&self) -> Vec<usize> {
        self.indices_of(SubsystemKind::Qubit)
    }

    pub fn oscillator_indices(&self) -> Vec<usize> {
        self.indices_of(SubsystemKind::Oscillator)
    }

    fn indices_of(&self, kind: SubsystemKind) -> Vec<usize> {
        self.subsystems.iter().enumerate().filter(|(_, s)| s.kind == kind).map(|(i, _)| i).collect()
    }

    /// Splits a global basis index into per-subsystem digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.len()];
        for (k, s) in self.subsystems.iter().enumerate().rev() {
            out[k] = index % s.dim;
            index /= s.dim;
        }
        out
    }

    pub fn compose(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.subsystems).fold(0, |acc, (&d, s)| acc * s.dim + d)
    }
}

impl fmt::Display for HilbertLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.subsystems.iter().map(|s| format!("{}[{}]", s.label, s.dim)).collect();
        write!(f, "{}", parts.join(" ⊗ "))
    }
}

/// Validates the subsystem list and returns a shareable layout.
pub fn build_layout(specs: Vec<SubsystemSpec>) -> Result<Arc<HilbertLayout>> {
    if specs.is_empty() {
        return Err(Error::EmptyLayout);
    }
    let mut seen = HashSet::new();
    for s in &specs {
        if !seen.insert(s.label.as_str()) {
            return Err(Error::DuplicateLabel(s.label.clone()));
        }
        let ok = match s.kind {
            SubsystemKind::Qubit => s.dim == 2,
            SubsystemKind::Oscillator => s.dim >= 2,
        };
        if !ok {
            return Err(Error::InvalidDimension { label: s.label.clone(), dim: s.dim });
        }
    }
    let total_dim = specs.iter().map(|s| s.dim).product();
    Ok(Arc::new(HilbertLayout { subsystems: specs, total_dim }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn register_dimensions() {
        let l = build_layout(vec![SubsystemSpec::qubit("l"), SubsystemSpec::oscillator("m", 2)]).unwrap();
        assert_eq!(l.total_dim(), 6);
        let link = build_layout(vec![
            SubsystemSpec::oscillator("m1", 3),
            SubsystemSpec::qubit("l"),
            SubsystemSpec::oscillator("m2", 3),
        ])
        .unwrap();
        assert_eq!(link.total_dim(), 32);
        let lp = build_layout(vec![
            SubsystemSpec::oscillator("m1", 3),
            SubsystemSpec::qubit("l1"),
            SubsystemSpec::qubit("l2"),
            SubsystemSpec::oscillator("m2", 3),
        ])
        .unwrap();
        assert_eq!(lp.total_dim(), 64);
        assert_eq!(lp.subsystems()[2].label, "l2");
    }

    #[test]
    fn rejects_bad_registers() {
        assert_eq!(build_layout(vec![]), Err(Error::EmptyLayout));
        let dup = build_layout(vec![SubsystemSpec::qubit("a"), SubsystemSpec::qubit("a")]);
        assert_eq!(dup, Err(Error::DuplicateLabel("a".into())));
        let small = build_layout(vec![SubsystemSpec::oscillator("m", 0)]);
        assert!(matches!(small, Err(Error::InvalidDimension { .. })));
        let bad_qubit = SubsystemSpec { kind: SubsystemKind::Qubit, dim: 3, label: "q".into() };
        assert!(matches!(build_layout(vec![bad_qubit]), Err(Error::InvalidDimension { .. })));
    }

    #[test]
    fn digits_roundtrip() {
        let l = build_layout(vec![
            SubsystemSpec::oscillator("a", 2),
            SubsystemSpec::qubit("q"),
            SubsystemSpec::oscillator("b", 3),
        ])
        .unwrap();
        for i in 0..l.total_dim() {
            assert_eq!(l.compose(&l.digits(i)), i);
        }
        assert_eq!(l.stride(0), 8);
        assert_eq!(l.stride(2), 1);
    }
}
