use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::dynamics::ObservableSeries;
use crate::error::{Error, Result};

/// Amplitude of the best-fit `a + b cos 2φ + c sin 2φ` through a parity
/// fringe, clamped to `[0, 1]`. The fringe grid must span at least π.
pub fn extract_contrast(fringe: &ObservableSeries) -> Result<f64> {
    let phi = &fringe.times;
    if phi.len() < 3 {
        return Err(Error::Precondition("contrast needs at least 3 fringe points".into()));
    }
    let lo = phi.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // grids that omit the periodic endpoint still cover a full period
    let step = (hi - lo) / (phi.len() - 1) as f64;
    if hi - lo + step < PI * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!("fringe covers {:.3} rad; a full period of π is required", hi - lo)));
    }
    let a = DMatrix::from_fn(phi.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => (2.0 * phi[i]).cos(),
        _ => (2.0 * phi[i]).sin(),
    });
    let sol = a
        .svd(true, true)
        .solve(&DVector::from_column_slice(&fringe.values), 1e-13)
        .map_err(|e| Error::Fit(e.to_string()))?;
    Ok(sol[1].hypot(sol[2]).min(1.0))
}

fn moments(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (mean, x.iter().map(|v| (v - mean).powi(2)).sum::<f64>())
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if x.len() < 3 {
        return Err(Error::Precondition("correlation needs at least 3 points".into()));
    }
    let (mx, sx) = moments(x);
    let (my, sy) = moments(y);
    if sx == 0.0 || sy == 0.0 {
        return Err(Error::Degenerate("series has zero variance".into()));
    }
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok((cov / (sx.sqrt() * sy.sqrt())).clamp(-1.0, 1.0))
}

/// Root mean squared difference. With `rescale_spin` both series are first
/// mapped through `s ↦ (s + 1)/2`.
pub fn rmse(experimental: &[f64], reference: &[f64], rescale_spin: bool) -> Result<f64> {
    if experimental.len() != reference.len() {
        return Err(Error::DimensionMismatch { expected: reference.len(), got: experimental.len() });
    }
    if experimental.is_empty() {
        return Err(Error::EmptySelection);
    }
    let k = if rescale_spin { 0.5 } else { 1.0 };
    let sum: f64 = experimental.iter().zip(reference).map(|(a, b)| (k * (a - b)).powi(2)).sum();
    Ok((sum / experimental.len() as f64).sqrt())
}
