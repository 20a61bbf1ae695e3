//! Largest tunnelling amplitude per flux sector as the field grows; the
//! Ψ⁺ sector peaks where the field matches the hopping.
//!
//! `cargo run --release --example lambda_sweep`

use z2sim::experiments::{execute, Axis1d, ExperimentConfig, Preset};

fn main() -> z2sim::Result<()> {
    let mut cfg = ExperimentConfig::preset(Preset::LambdaSweep);
    let grid: Vec<f64> = (0..=16).map(|k| k as f64 * 0.25).chain([20.0]).collect();
    cfg.physical.h_over_j = Some(Axis1d::List(grid));
    let exec = execute(&cfg, None)?;
    let sectors = ["phi_plus", "phi_minus", "psi_plus", "psi_minus"];
    print!("{:>6}", "h/J");
    for s in sectors {
        print!(" {s:>10}");
    }
    println!();
    for (g, _, res) in &exec.points {
        print!("{:>6.2}", g.expect("sweep point"));
        for s in sectors {
            print!(" {:>10.4}", res.derived_f64(&format!("max_n_m2_{s}")).unwrap_or(f64::NAN));
        }
        println!();
    }
    Ok(())
}
