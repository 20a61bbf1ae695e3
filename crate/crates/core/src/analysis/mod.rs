//! Fitting, comparison metrics and phase-space reconstruction.

mod fit;
mod metrics;
mod wigner;

pub use fit::{fit_decaying_sinusoid, FitGuess, FitResult};
pub use metrics::{extract_contrast, pearson, rmse};
pub use wigner::{wigner, PhaseSpaceGrid, WignerGrid};
