//! Two detuned spin-dependent forces against the link Hamiltonian they are
//! meant to engineer. The infidelity falls as the detuning grows.
//!
//! `cargo run --release --example magnus_pulse`

use std::f64::consts::PI;

use z2sim::dynamics::{evolve_pulsed, evolve_static, Record, StepControl};
use z2sim::hilbert::{fidelity, QuantumState};
use z2sim::models::{
    build_schedule, effective_tunnelling_rate, hamiltonian_link, LatticeGraph, LinkParams, LinkSites, ScheduleKind,
    SdfParams,
};
use z2sim::prep_measure::PrepCircuit;

fn main() -> z2sim::Result<()> {
    let sites = LinkSites::STANDARD;
    let layout = LatticeGraph::link().layout(4)?;
    let s0 = PrepCircuit::excitation_with_minus_link(sites.link, sites.m1)
        .apply(&QuantumState::basis(layout.clone(), &[0, 1, 0])?)?
        .state;
    let omega = 2.0 * PI * 1.2e3;
    println!("{:>10} {:>10} {:>12} {:>12}", "Δ/2π kHz", "J/π Hz", "duration ms", "infidelity");
    for khz in [12.5, 25.0, 50.0] {
        let delta = 2.0 * PI * khz * 1e3;
        let ramp = 2.0 * PI * 10.0 / delta;
        let sdf = SdfParams::link(omega, omega, delta, ramp, sites.m1, sites.m2);
        let j = effective_tunnelling_rate(&sdf)?.abs();
        let t = PI / (2.0 * j);
        let sched = build_schedule(ScheduleKind::Plain, &sdf, t + 0.25 * ramp)?;
        let pulsed = evolve_pulsed(&sched, &s0, &[sched.total_duration()], &StepControl::default(), &Record::default())?;
        let ideal = evolve_static(&hamiltonian_link(&LinkParams::new(j, 0.0), &layout, sites)?, &s0, &[t], &Record::default())?;
        let infidelity = 1.0 - fidelity(&pulsed.final_state, &ideal.final_state)?;
        println!("{:>10.1} {:>10.1} {:>12.3} {:>12.2e}", khz, j / PI, sched.total_duration() * 1e3, infidelity);
    }
    Ok(())
}
