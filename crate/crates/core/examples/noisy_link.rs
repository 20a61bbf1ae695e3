//! Link tunnelling with heating, motional dephasing and a thermal start,
//! sampled with a finite number of shots.
//!
//! `cargo run --release --example noisy_link`

use z2sim::experiments::{run_point, ExperimentConfig, NoiseSetting, Preset, Shots, TimeGrid};

fn main() -> z2sim::Result<()> {
    let mut cfg = ExperimentConfig::preset(Preset::LinkTunnelling);
    cfg.noise = NoiseSetting::LinkCalibrated;
    cfg.shots = Shots::Count(200);
    cfg.seed = 5;
    cfg.time = Some(TimeGrid::periods(3.0, 31));
    let res = run_point(&cfg)?;
    let n2 = res.series("n_m2").expect("n_m2 series");
    let err = n2.stderr.as_ref().expect("shot errors");
    println!("{:>9} {:>8} {:>8}", "t (us)", "n_m2", "± stderr");
    for ((t, v), e) in n2.times.iter().zip(&n2.values).zip(err) {
        println!("{:>9.1} {:>8.3} {:>8.3}", t * 1e6, v, e);
    }
    for key in ["omega0_over_j", "decay_rate_fit", "pearson_n_m1_n_m2"] {
        println!("{key} = {:.4}", res.derived_f64(key).unwrap_or(f64::NAN));
    }
    for w in &res.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
