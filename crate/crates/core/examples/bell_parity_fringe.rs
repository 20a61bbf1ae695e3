//! Parity fringe of the two loop qubits during Φ⁺ tunnelling; the fitted
//! contrast follows |cos 4Jt|.
//!
//! `cargo run --example bell_parity_fringe`

use std::f64::consts::PI;

use z2sim::analysis::extract_contrast;
use z2sim::dynamics::{evolve_static, Record};
use z2sim::hilbert::QuantumState;
use z2sim::models::{hamiltonian_loop, LatticeGraph, LinkParams, LoopSites};
use z2sim::prep_measure::{parity_fringe, BellState, PrepCircuit, PrepStep};

fn main() -> z2sim::Result<()> {
    let s = LoopSites::STANDARD;
    let layout = LatticeGraph::loop_().layout(3)?;
    let j = 1.0;
    let s0 = PrepCircuit::new(vec![
        PrepStep::Bsb { qubit: s.l1, mode: s.m1 },
        PrepStep::Bell { qubits: [s.l1, s.l2], state: BellState::PhiPlus, tilde_phase: 0.0 },
    ])
    .apply(&QuantumState::basis(layout.clone(), &[0, 1, 1, 0])?)?
    .state;
    let ham = hamiltonian_loop(&LinkParams::new(j, 0.0), &layout, s)?;
    let phases: Vec<f64> = (0..16).map(|k| PI * k as f64 / 16.0).collect();
    let times: Vec<f64> = (0..=8).map(|k| k as f64 * PI / (32.0 * j)).collect();
    let traj = evolve_static(&ham, &s0, &times, &Record::states())?;
    println!("{:>6} {:>10} {:>10}", "4Jt/π", "contrast", "|cos 4Jt|");
    for (t, st) in times.iter().zip(&traj.states) {
        let fringe = parity_fringe(st, [s.l1, s.l2], &phases)?;
        println!("{:>6.3} {:>10.6} {:>10.6}", 4.0 * j * t / PI, extract_contrast(&fringe)?, (4.0 * j * t).cos().abs());
    }
    Ok(())
}
