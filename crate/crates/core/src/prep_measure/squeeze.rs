use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::gates::require_kind;
use crate::error::{Error, Result};
use crate::hilbert::spectral::expm_hermitian_dense;
use crate::hilbert::{embed, local_operator, partial_trace, LocalKind, QuantumState, SubsystemKind, C64};

/// Default bound on the population the squeezed state would place above the
/// cutoff.
pub const SQUEEZE_TAIL_TOLERANCE: f64 = 5e-3;

/// Squeezing parameter `ζ = r·e^{iθ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParams {
    pub r: f64,
    #[serde(default)]
    pub theta: f64,
}

impl SqueezeParams {
    /// Validates `r ≥ 0` and wraps `θ` into `[0, 2π)`.
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Precondition(format!("squeezing magnitude must be ≥ 0, got {r}")));
        }
        if !theta.is_finite() {
            return Err(Error::Precondition("squeezing phase must be finite".into()));
        }
        Ok(Self { r, theta: theta.rem_euclid(TAU) })
    }

    pub fn zeta(&self) -> C64 {
        C64::from_polar(self.r, self.theta)
    }

    pub fn inverse(&self) -> Self {
        Self { r: self.r, theta: (self.theta + TAU / 2.0).rem_euclid(TAU) }
    }
}

/// `S(ζ) = exp((ζ*â² − ζâ†²)/2)` on a mode truncated at `cutoff`, from the
/// exponential of the truncated generator.
pub fn squeeze_matrix(params: &SqueezeParams, cutoff: usize) -> Result<DMatrix<C64>> {
    let a = local_operator(LocalKind::Annihilate, cutoff + 1)?;
    let a2 = &a * &a;
    let zeta = params.zeta();
    // S = exp(−iK) with K = i(ζ*â² − ζâ†²)/2 Hermitian
    let k = (a2.clone() * zeta.conj() - a2.adjoint() * zeta) * C64::new(0.0, 0.5);
    Ok(expm_hermitian_dense(&k))
}

/// Population that `S(ζ)` pushes above `cutoff` for the given single-mode
/// density matrix, estimated on a padded space.
pub fn squeeze_tail(rho_mode: &DMatrix<C64>, params: &SqueezeParams) -> Result<f64> {
    let cutoff = rho_mode.nrows() - 1;
    let padded = 2 * cutoff + 40;
    let mut big = DMatrix::<C64>::zeros(padded + 1, padded + 1);
    big.view_mut((0, 0), (cutoff + 1, cutoff + 1)).copy_from(rho_mode);
    let s = squeeze_matrix(params, padded)?;
    let out = &s * big * s.adjoint();
    Ok((cutoff + 1..=padded).map(|n| out[(n, n)].re).sum::<f64>().max(0.0))
}

pub fn squeeze(state: &QuantumState, mode: usize, params: &SqueezeParams) -> Result<QuantumState> {
    squeeze_with_tolerance(state, mode, params, SQUEEZE_TAIL_TOLERANCE)
}

/// Applies `S(ζ)` after checking that the untruncated result keeps at least
/// `1 − tolerance` of its population below the cutoff.
pub fn squeeze_with_tolerance(
    state: &QuantumState,
    mode: usize,
    params: &SqueezeParams,
    tolerance: f64,
) -> Result<QuantumState> {
    require_kind(state, mode, SubsystemKind::Oscillator)?;
    let params = SqueezeParams::new(params.r, params.theta)?;
    let cutoff = state.layout().subsystems()[mode].cutoff();
    let rho_mode = partial_trace(state, &[mode])?.density_matrix();
    let deficit = squeeze_tail(&rho_mode, &params)?;
    if deficit > tolerance {
        return Err(Error::CutoffInadequate { cutoff, deficit, tolerance });
    }
    state.apply(&embed(&squeeze_matrix(&params, cutoff)?, mode, state.layout())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_layout, embed_kind, expect_real, fidelity, SubsystemSpec};
    use proptest::prelude::*;

    fn mode(cutoff: usize) -> std::sync::Arc<crate::hilbert::HilbertLayout> {
        build_layout(vec![SubsystemSpec::oscillator("m", cutoff)]).unwrap()
    }

    fn ln_factorial(n: usize) -> f64 {
        (1..=n).map(|k| (k as f64).ln()).sum()
    }

    /// Fock amplitudes of `S(ζ)|0⟩` and `S(ζ)|1⟩` from the generating-function
    /// expansion, independent of any matrix exponential.
    fn closed_form(params: &SqueezeParams, odd: bool, n: usize) -> C64 {
        let (r, th) = (params.r, params.theta);
        if (n % 2 == 1) != odd {
            return C64::from(0.0);
        }
        let m = n / 2;
        let ratio = C64::from_polar(r.tanh(), th) * -1.0;
        let mag = 0.5 * ln_factorial(n) - ln_factorial(m) - m as f64 * 2f64.ln();
        let pre = if odd { r.cosh().powf(-1.5) } else { r.cosh().powf(-0.5) };
        ratio.powu(m as u32) * (pre * mag.exp())
    }

    #[test]
    fn parity_of_squeezed_fock_states() {
        let layout = mode(25);
        let p = embed_kind(LocalKind::Parity, 0, &layout).unwrap();
        let params = SqueezeParams::new(0.96, 0.4).unwrap();
        for (n, sign) in [(0usize, 1.0), (1, -1.0)] {
            let s = squeeze(&QuantumState::basis(layout.clone(), &[n]).unwrap(), 0, &params).unwrap();
            assert!((expect_real(&s, &p).unwrap() - sign).abs() < 1e-9);
        }
    }

    #[test]
    fn amplitudes_match_closed_form() {
        let cutoff = 60;
        let layout = mode(cutoff);
        for (r, th) in [(0.5, 0.0), (1.0, 1.3), (1.2, 4.0)] {
            let params = SqueezeParams::new(r, th).unwrap();
            for odd in [false, true] {
                let s0 = QuantumState::basis(layout.clone(), &[odd as usize]).unwrap();
                let v = squeeze(&s0, 0, &params).unwrap().as_vector().unwrap().clone();
                for n in 0..=20 {
                    let err = (v[n] - closed_form(&params, odd, n)).norm();
                    assert!(err < 1e-6, "r={r} odd={odd} n={n} err={err:e}");
                }
            }
        }
    }

    #[test]
    fn vacuum_occupation_is_sinh_squared() {
        let layout = mode(60);
        let n = embed_kind(LocalKind::Number, 0, &layout).unwrap();
        let params = SqueezeParams::new(1.0, 0.0).unwrap();
        let s = squeeze(&QuantumState::basis(layout.clone(), &[0]).unwrap(), 0, &params).unwrap();
        let oracle: f64 = (0..=60).map(|k| k as f64 * closed_form(&params, false, k).norm_sqr()).sum();
        assert!((expect_real(&s, &n).unwrap() - oracle).abs() < 1e-6);
        assert!((oracle - 1f64.sinh().powi(2)).abs() < 1e-6);
    }

    #[test]
    fn inadequate_cutoff_is_rejected() {
        let layout = mode(10);
        let s0 = QuantumState::basis(layout.clone(), &[0]).unwrap();
        let err = squeeze(&s0, 0, &SqueezeParams::new(1.0, 0.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::CutoffInadequate { cutoff: 10, .. }));
        assert!(SqueezeParams::new(-0.1, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn inverse_undoes_squeeze(r in 0.0..0.9f64, th in 0.0..std::f64::consts::TAU) {
            let layout = mode(30);
            let s0 = QuantumState::basis(layout.clone(), &[1]).unwrap();
            let p = SqueezeParams::new(r, th).unwrap();
            let back = squeeze(&squeeze(&s0, 0, &p).unwrap(), 0, &p.inverse()).unwrap();
            prop_assert!(fidelity(&back, &s0).unwrap() > 1.0 - 1e-8);
            prop_assert!((back.trace().re - 1.0).abs() < 1e-10);
        }
    }
}
