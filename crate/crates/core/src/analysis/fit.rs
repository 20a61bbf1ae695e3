use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::ObservableSeries;
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 500;
/// Cosine between residual and each scaled Jacobian column below which the
/// fit counts as converged.
const GRADIENT_TOL: f64 = 1e-10;
const STEP_TOL: f64 = 1e-14;

/// Parameters of `offset + amplitude·e^{−γt}·cos(2Ω₀t + phase)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Ω₀ in rad/s; populations oscillate at `2Ω₀`.
    pub omega0: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub decay_rate: f64,
    pub phase: f64,
    pub residual_rms: f64,
    /// True when the gradient test passed, false when the fit stopped on a
    /// vanishing step instead.
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.offset + self.amplitude * (-self.decay_rate * t).exp() * (2.0 * self.omega0 * t + self.phase).cos()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitGuess {
    pub omega0: f64,
    #[serde(default)]
    pub decay_rate: f64,
}

// parameter order: offset, amplitude, decay, angular frequency ω = 2Ω₀, phase
fn model(p: &[f64; 5], t: f64) -> (f64, [f64; 5]) {
    let [c, a, g, w, phi] = *p;
    let e = (-g * t).exp();
    let (s, co) = (w * t + phi).sin_cos();
    let v = c + a * e * co;
    (v, [1.0, e * co, -t * a * e * co, -t * a * e * s, -a * e * s])
}

/// Frequency of the largest periodogram peak of the mean-subtracted series,
/// searched on an oversampled grid up to the Nyquist rate of the mean step.
fn spectral_peak(t: &[f64], y: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let span = t[t.len() - 1] - t[0];
    let dt = span / (t.len() - 1) as f64;
    let w_min = 2.0 * PI / span;
    let w_max = PI / dt;
    let steps = (16.0 * w_max / w_min).ceil() as usize;
    let power = |w: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (&ti, &yi) in t.iter().zip(y) {
            let (s, c) = (w * ti).sin_cos();
            re += (yi - mean) * c;
            im += (yi - mean) * s;
        }
        re * re + im * im
    };
    let (mut best, mut best_p) = (w_min, f64::NEG_INFINITY);
    for k in 0..=steps {
        let w = w_min * 0.5 + (w_max - w_min * 0.5) * k as f64 / steps as f64;
        let p = power(w);
        if p > best_p {
            best = w;
            best_p = p;
        }
    }
    best
}

/// Linear least squares for offset and quadratures at a fixed frequency.
fn linear_start(t: &[f64], y: &[f64], w: f64, g: f64) -> [f64; 5] {
    let a = DMatrix::from_fn(t.len(), 3, |i, j| {
        let e = (-g * t[i]).exp();
        match j {
            0 => 1.0,
            1 => e * (w * t[i]).cos(),
            _ => e * (w * t[i]).sin(),
        }
    });
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&DVector::from_column_slice(y), 1e-14)
        .unwrap_or_else(|_| DVector::zeros(3));
    // b cos + s sin = A cos(wt + φ) with A cos φ = b, −A sin φ = s
    let amp = sol[1].hypot(sol[2]);
    [sol[0], amp, g, w, (-sol[2]).atan2(sol[1])]
}

/// Fits `offset + A·e^{−γt}·cos(2Ω₀t + φ)` with Levenberg-Marquardt under
/// Marquardt diagonal scaling, keeping `γ ≥ 0`.
///
/// Ω₀ starts at half the periodogram peak unless `guess` is given.
pub fn fit_decaying_sinusoid(series: &ObservableSeries, guess: Option<FitGuess>) -> Result<FitResult> {
    let (t, y) = (&series.times, &series.values);
    if t.len() < 8 {
        return Err(Error::Precondition(format!("fit needs at least 8 samples, got {}", t.len())));
    }
    if t.windows(2).any(|w| w[1] <= w[0]) || t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Precondition("fit needs finite values on an increasing grid".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let spread = y.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if spread <= 1e-12 * mean.abs().max(1e-300) || spread == 0.0 {
        return Err(Error::Degenerate("series is constant".into()));
    }
    let (w0, g0) = match guess {
        Some(g) => (2.0 * g.omega0, g.decay_rate.max(0.0)),
        None => (spectral_peak(t, y), 0.0),
    };
    let span = t[t.len() - 1] - t[0];
    if w0 * span < 2.0 * PI * (1.0 - 1e-9) {
        return Err(Error::Precondition(format!(
            "series spans {:.3} periods of the dominant oscillation; at least one is needed",
            w0 * span / (2.0 * PI)
        )));
    }
    let mut p = linear_start(t, y, w0, g0);
    let n = t.len();
    let eval = |p: &[f64; 5]| -> (DVector<f64>, DMatrix<f64>) {
        let mut r = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, 5);
        for i in 0..n {
            let (v, d) = model(p, t[i]);
            r[i] = v - y[i];
            for k in 0..5 {
                jac[(i, k)] = d[k];
            }
        }
        (r, jac)
    };
    let (mut r, mut jac) = eval(&p);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let scale_ref = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    loop {
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        let rnorm = r.norm();
        let diag: Vec<f64> = (0..5).map(|k| jtj[(k, k)].max(1e-300)).collect();
        let cosine = (0..5).map(|k| grad[k].abs() / (diag[k].sqrt() * rnorm.max(1e-300))).fold(0.0, f64::max);
        if rnorm <= 1e-14 * scale_ref || cosine <= GRADIENT_TOL {
            converged = true;
            break;
        }
        if iterations >= MAX_ITERATIONS {
            return Err(Error::Fit(format!("no convergence after {MAX_ITERATIONS} iterations")));
        }
        iterations += 1;
        let mut accepted = false;
        let mut tiny_step = false;
        while lambda < 1e16 {
            let mut lhs = jtj.clone();
            for k in 0..5 {
                lhs[(k, k)] += lambda * diag[k];
            }
            let Some(step) = lhs.cholesky().map(|c| c.solve(&(-&grad))) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = p;
            for k in 0..5 {
                trial[k] += step[k];
            }
            trial[2] = trial[2].max(0.0);
            let rel = (0..5).map(|k| (trial[k] - p[k]).abs() * diag[k].sqrt()).fold(0.0, f64::max);
            let (tr, tj) = eval(&trial);
            let tc = tr.norm_squared();
            if tc < cost {
                tiny_step = rel <= STEP_TOL * rnorm.max(1e-300) || (cost - tc) <= 1e-30 * cost;
                p = trial;
                r = tr;
                jac = tj;
                cost = tc;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                break;
            }
            if rel <= STEP_TOL * rnorm.max(1e-300) {
                tiny_step = true;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted || tiny_step {
            break;
        }
    }
    let [offset, mut amplitude, decay_rate, mut w, mut phase] = p;
    if !p.iter().all(|v| v.is_finite()) {
        return Err(Error::Fit("fit diverged".into()));
    }
    if w < 0.0 {
        w = -w;
        phase = -phase;
    }
    if amplitude < 0.0 {
        amplitude = -amplitude;
        phase += PI;
    }
    phase = (phase + PI).rem_euclid(2.0 * PI) - PI;
    Ok(FitResult {
        omega0: w / 2.0,
        amplitude,
        offset,
        decay_rate,
        phase,
        residual_rms: (cost / n as f64).sqrt(),
        converged,
        iterations,
    })
}
