use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::gates::require_kind;
use crate::error::{Error, Result};
use crate::hilbert::{expect_real, local_operator, partial_trace, Operator, QuantumState, SubsystemKind, C64};
use crate::models::Axis;

/// Projective measurement to emulate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementBasis {
    /// Each listed qubit along `axis`; an outcome's value is the product of
    /// the ±1 eigenvalues.
    Qubits { qubits: Vec<usize>, axis: Axis },
    /// Fock number of one oscillator.
    Occupation { mode: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub labels: Vec<String>,
    /// Observable value assigned to each outcome.
    pub values: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub counts: Vec<u64>,
    pub shots: u64,
    pub seed: u64,
}

impl ShotRecord {
    pub fn mean(&self) -> f64 {
        self.counts.iter().zip(&self.values).map(|(&c, v)| c as f64 * v).sum::<f64>() / self.shots as f64
    }

    pub fn exact_mean(&self) -> f64 {
        self.probabilities.iter().zip(&self.values).map(|(p, v)| p * v).sum()
    }

    /// One-sigma (68%) standard error of [`ShotRecord::mean`] from the sample
    /// variance.
    pub fn stderr(&self) -> f64 {
        let m = self.mean();
        let var = self.counts.iter().zip(&self.values).map(|(&c, v)| c as f64 * (v - m).powi(2)).sum::<f64>()
            / self.shots as f64;
        (var / self.shots as f64).sqrt()
    }
}

/// SplitMix64 finalizer, used to derive independent sub-seeds.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn distribution(state: &QuantumState, basis: &MeasurementBasis) -> Result<(Vec<String>, Vec<f64>, Vec<f64>)> {
    match basis {
        MeasurementBasis::Qubits { qubits, axis } => {
            if qubits.is_empty() {
                return Err(Error::EmptySelection);
            }
            for &q in qubits {
                require_kind(state, q, SubsystemKind::Qubit)?;
            }
            let pauli = local_operator(axis.kind(), 2)?;
            let id = DMatrix::<C64>::identity(2, 2);
            let proj = [(&id + &pauli) * C64::from(0.5), (&id - &pauli) * C64::from(0.5)];
            let k = qubits.len();
            let (mut labels, mut values, mut probs) = (Vec::new(), Vec::new(), Vec::new());
            for pattern in 0..(1usize << k) {
                let signs: Vec<usize> = (0..k).map(|i| (pattern >> (k - 1 - i)) & 1).collect();
                let factors: Vec<(usize, &DMatrix<C64>)> =
                    qubits.iter().zip(&signs).map(|(&q, &s)| (q, &proj[s])).collect();
                let p = expect_real(state, &Operator::product(state.layout(), &factors)?)?.max(0.0);
                labels.push(signs.iter().map(|&s| if s == 0 { '+' } else { '-' }).collect());
                values.push(if signs.iter().sum::<usize>() % 2 == 0 { 1.0 } else { -1.0 });
                probs.push(p);
            }
            Ok((labels, values, probs))
        }
        MeasurementBasis::Occupation { mode } => {
            require_kind(state, *mode, SubsystemKind::Oscillator)?;
            let pops = partial_trace(state, &[*mode])?.populations();
            let labels = (0..pops.len()).map(|n| n.to_string()).collect();
            let values = (0..pops.len()).map(|n| n as f64).collect();
            Ok((labels, values, pops.into_iter().map(|p| p.max(0.0)).collect()))
        }
    }
}

/// Draws `shots` outcomes from the exact measurement distribution. The draw
/// is a multinomial built from conditional binomials, so a given seed always
/// yields the same counts.
pub fn sample_shots(state: &QuantumState, basis: &MeasurementBasis, shots: u64, seed: u64) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(Error::Precondition("shots must be ≥ 1".into()));
    }
    let (labels, values, mut probabilities) = distribution(state, basis)?;
    let total: f64 = probabilities.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroProbability);
    }
    probabilities.iter_mut().for_each(|p| *p /= total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probabilities.len()];
    let (mut left, mut mass) = (shots, 1.0f64);
    for (i, &p) in probabilities.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probabilities.len() {
            counts[i] = left;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(left, q).map_err(|e| Error::Precondition(e.to_string()))?.sample(&mut rng);
        counts[i] = draw;
        left -= draw;
        mass -= p;
    }
    Ok(ShotRecord { labels, values, probabilities, counts, shots, seed })
}
