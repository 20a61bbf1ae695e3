//! Single gauge link: a phonon hops from m1 to m2 while the link spin flips.
//!
//! `cargo run --example link_tunnelling`

use std::f64::consts::PI;

use z2sim::dynamics::{evolve_static, Record};
use z2sim::hilbert::{embed_kind, LocalKind, QuantumState};
use z2sim::models::{hamiltonian_link, link_generators, Conditioning, LatticeGraph, LinkParams, LinkSites};
use z2sim::prep_measure::PrepCircuit;

fn main() -> z2sim::Result<()> {
    let sites = LinkSites::STANDARD;
    let layout = LatticeGraph::link().layout(4)?;
    let params = LinkParams::new(PI * 1.47e3, 0.0);
    let vacuum = QuantumState::basis(layout.clone(), &[0, 1, 0])?;
    let s0 = PrepCircuit::excitation_with_minus_link(sites.link, sites.m1).apply(&vacuum)?.state;

    let ham = hamiltonian_link(&params, &layout, sites)?;
    let gens = link_generators(&layout, sites, Conditioning::ZBasis)?;
    let rec = Record::observables(vec![
        ("n_m1".into(), embed_kind(LocalKind::Number, sites.m1, &layout)?),
        ("n_m2".into(), embed_kind(LocalKind::Number, sites.m2, &layout)?),
        ("s_x".into(), embed_kind(LocalKind::PauliX, sites.link, &layout)?),
        ("G_m1".into(), gens[0].clone()),
    ]);
    let period = PI / params.omega0();
    let times: Vec<f64> = (0..=12).map(|k| k as f64 * period / 6.0).collect();
    let traj = evolve_static(&ham, &s0, &times, &rec)?;

    println!("{:>9} {:>8} {:>8} {:>8} {:>6}", "t (us)", "n_m1", "n_m2", "s_x", "G_m1");
    for (k, t) in times.iter().enumerate() {
        let v = |l: &str| traj.series[l].values[k];
        println!("{:>9.1} {:>8.4} {:>8.4} {:>8.4} {:>6.2}", t * 1e6, v("n_m1"), v("n_m2"), v("s_x"), v("G_m1"));
    }
    Ok(())
}
