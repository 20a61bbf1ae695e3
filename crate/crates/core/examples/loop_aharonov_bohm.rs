//! Two links in parallel: the Bell state of the link qubits sets the flux
//! through the loop and decides whether the phonon can tunnel at all.
//!
//! `cargo run --example loop_aharonov_bohm`

use z2sim::experiments::{bell_name, run_point, ExperimentConfig, Preset};
use z2sim::prep_measure::BellState;

fn main() -> z2sim::Result<()> {
    println!("{:>10} {:>10} {:>13} {:>12}", "sector", "max n_m2", "min contrast", "Gauss drift");
    for bell in [BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus] {
        let mut cfg = ExperimentConfig::preset(Preset::LoopAb);
        cfg.prep.bell = Some(bell);
        let res = run_point(&cfg)?;
        let d = |k: &str| res.derived_f64(k).unwrap_or(f64::NAN);
        println!("{:>10} {:>10.4} {:>13.4} {:>12.1e}", bell_name(bell), d("max_n_m2"), d("min_contrast"), d("gauss_drift"));
    }
    Ok(())
}
