//! Tunnelling frequency against the electric field term, recovered by
//! fitting a decaying sinusoid to n̄_m2 at each field setting.
//!
//! `cargo run --example field_sweep_fit`

use z2sim::experiments::{execute, ExperimentConfig, Preset};

fn main() -> z2sim::Result<()> {
    let cfg = ExperimentConfig::preset(Preset::LinkFieldSweep);
    let exec = execute(&cfg, None)?;
    println!("{:>6} {:>12} {:>14} {:>10}", "h/J", "Ω₀/J fit", "√(1+(h/J)²)", "amplitude");
    for (g, _, res) in &exec.points {
        let g = g.expect("sweep point");
        let n2 = res.series("n_m2").expect("n_m2 series");
        println!(
            "{:>6.2} {:>12.6} {:>14.6} {:>10.4}",
            g,
            res.derived_f64("omega0_over_j").unwrap_or(f64::NAN),
            (1.0 + g * g).sqrt(),
            n2.max()
        );
    }
    Ok(())
}
