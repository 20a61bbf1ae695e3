use std::f64::consts::FRAC_2_PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::state::hermitian_eigen;
use crate::hilbert::{local_operator, partial_trace, LocalKind, QuantumState, SubsystemKind, C64};

/// Largest population allowed in the top levels of the working space.
const TAIL_TOL: f64 = 1e-6;
const MAX_WORKING_DIM: usize = 600;

/// Rectangular grid of displacements `α = re + i·im`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl PhaseSpaceGrid {
    /// `points × points` grid on `[−extent, extent]²`.
    pub fn square(extent: f64, points: usize) -> Self {
        let axis: Vec<f64> =
            (0..points).map(|k| -extent + 2.0 * extent * k as f64 / (points.max(2) - 1) as f64).collect();
        Self { re: axis.clone(), im: axis }
    }

    fn max_radius(&self) -> f64 {
        let m = |v: &[f64]| v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        m(&self.re).hypot(m(&self.im))
    }
}

/// Wigner function samples; `values[(i, j)]` is `W(re[i] + i·im[j])`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub re_alpha: Vec<f64>,
    pub im_alpha: Vec<f64>,
    pub values: DMatrix<f64>,
}

fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { x[i] - x[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x[i + 1] - x[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

impl WignerGrid {
    /// Trapezoidal estimate of `∫W d²α`.
    pub fn integral(&self) -> f64 {
        let (wr, wi) = (trapezoid_weights(&self.re_alpha), trapezoid_weights(&self.im_alpha));
        let mut total = 0.0;
        for (i, a) in wr.iter().enumerate() {
            for (j, b) in wi.iter().enumerate() {
                total += a * b * self.values[(i, j)];
            }
        }
        total
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }
}

/// `W(α) = (2/π)·Tr[D(α) P D†(α) ρ]` of one oscillator, using displacement
/// operators exponentiated on a working space padded beyond the cutoff.
///
/// Fails when a displaced state reaches the top of the working space.
pub fn wigner(state: &QuantumState, mode: usize, grid: &PhaseSpaceGrid) -> Result<WignerGrid> {
    let spec = state.layout().subsystem(mode)?;
    if spec.kind != SubsystemKind::Oscillator {
        return Err(Error::WrongRegister(format!("`{}` is not an oscillator", spec.label)));
    }
    if grid.re.is_empty() || grid.im.is_empty() {
        return Err(Error::EmptySelection);
    }
    if grid.re.iter().chain(&grid.im).any(|v| !v.is_finite()) {
        return Err(Error::Precondition("grid coordinates must be finite".into()));
    }
    let rho_mode = partial_trace(state, &[mode])?.density_matrix();
    let base = rho_mode.nrows();
    let reach = grid.max_radius();
    let edge = (base as f64).sqrt() + reach;
    let dim = (edge * edge + 6.0 * edge).ceil() as usize + 12;
    if dim > MAX_WORKING_DIM {
        return Err(Error::Precondition(format!(
            "grid radius {reach:.2} needs a working space of {dim} levels, above the limit {MAX_WORKING_DIM}"
        )));
    }
    // ρ = Σ p_k |ψ_k⟩⟨ψ_k|, each ψ_k padded into the working space
    let rho_eig = hermitian_eigen(&rho_mode);
    let components: Vec<(f64, DVector<C64>)> = rho_eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 1e-14)
        .map(|(k, &p)| {
            let mut v = DVector::<C64>::zeros(dim);
            v.rows_mut(0, base).copy_from(&rho_eig.eigenvectors.column(k));
            (p, v)
        })
        .collect();
    let a = local_operator(LocalKind::Annihilate, dim)?;
    // D(r) = exp(r(â† − â)) = exp(−i r K) with K = i(â† − â)
    let k = (a.adjoint() - &a) * C64::new(0.0, 1.0);
    let eig = SymmetricEigen::new((&k + k.adjoint()) * C64::from(0.5));
    let (v, lam) = (eig.eigenvectors, eig.eigenvalues);
    let v_adj = v.adjoint();
    let guard = (dim / 5).max(4);

    let points: Vec<(usize, usize)> =
        (0..grid.re.len()).flat_map(|i| (0..grid.im.len()).map(move |j| (i, j))).collect();
    let results: Vec<Result<f64>> = points
        .par_iter()
        .map(|&(i, j)| {
            let alpha = C64::new(grid.re[i], grid.im[j]);
            let (r, theta) = (alpha.norm(), alpha.arg());
            // D†(α) = R(θ) D(−r) R(θ)† with R(θ) = e^{iθn}
            let rot = |sign: f64| {
                DVector::from_iterator(dim, (0..dim).map(|n| C64::from_polar(1.0, sign * theta * n as f64)))
            };
            let (fwd, back) = (rot(1.0), rot(-1.0));
            let phases = DVector::from_iterator(dim, lam.iter().map(|&l| C64::from_polar(1.0, r * l)));
            let (mut w, mut tail) = (0.0, 0.0);
            for (p, psi) in &components {
                let mut x = &v_adj * psi.component_mul(&back);
                x.component_mul_assign(&phases);
                let mut x = &v * x;
                x.component_mul_assign(&fwd);
                for (n, z) in x.iter().enumerate() {
                    let pop = p * z.norm_sqr();
                    w += if n % 2 == 0 { pop } else { -pop };
                    if n >= dim - guard {
                        tail += pop;
                    }
                }
            }
            if tail > TAIL_TOL {
                return Err(Error::Precondition(format!(
                    "displacement α = {alpha} leaks {tail:.2e} out of the working space"
                )));
            }
            Ok(FRAC_2_PI * w)
        })
        .collect();
    let mut values = DMatrix::zeros(grid.re.len(), grid.im.len());
    for (&(i, j), r) in points.iter().zip(results) {
        values[(i, j)] = r?;
    }
    Ok(WignerGrid { re_alpha: grid.re.clone(), im_alpha: grid.im.clone(), values })
}
