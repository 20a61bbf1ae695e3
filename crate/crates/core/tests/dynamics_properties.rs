use std::f64::consts::PI;

use nalgebra::DVector;
use proptest::prelude::*;

use z2sim::dynamics::{evolve_lindblad, evolve_static, Dynamics, NoiseModel, Record, StepControl};
use z2sim::hilbert::{expect_real, ket, LocalKind, QuantumState, C64};
use z2sim::models::{
    gauss_generators, hamiltonian_lattice, hamiltonian_link, link_generators, sector_projector, Conditioning,
    LatticeGraph, LinkParams, LinkSites,
};

fn random_state(layout: &std::sync::Arc<z2sim::hilbert::HilbertLayout>, seed: &[f64]) -> QuantumState {
    let dim = layout.total_dim();
    let v = DVector::from_fn(dim, |i, _| C64::new(seed[(2 * i) % seed.len()], seed[(2 * i + 1) % seed.len()] - 0.3 * i as f64 / dim as f64));
    QuantumState::pure_normalized(layout.clone(), v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projected_sector_stays_confined(
        j in 0.1f64..3.0,
        h in -2.0f64..2.0,
        seed in prop::collection::vec(-1.0f64..1.0, 12),
        g1 in prop::sample::select(vec![-1.0, 1.0]),
        g2 in prop::sample::select(vec![-1.0, 1.0]),
        t in 0.0f64..5.0,
    ) {
        let layout = LatticeGraph::link().layout(2).unwrap();
        let gens = link_generators(&layout, LinkSites::STANDARD, Conditioning::ZBasis).unwrap();
        let proj = sector_projector(&gens, &[g1, g2]).unwrap();
        let raw = random_state(&layout, &seed).apply(&proj).unwrap();
        prop_assume!(raw.trace().re > 1e-6);
        let s0 = QuantumState::pure_normalized(layout.clone(), raw.as_vector().unwrap().clone()).unwrap();
        let ham = hamiltonian_link(&LinkParams::new(j, h), &layout, LinkSites::STANDARD).unwrap();
        let out = evolve_static(&ham, &s0, &[t], &Record::default()).unwrap().final_state;
        let kept = expect_real(&out, &proj).unwrap();
        prop_assert!((kept - 1.0).abs() < 1e-12, "sector weight {}", kept);
    }

    #[test]
    fn energy_is_conserved(
        j in 0.1f64..3.0,
        h in -2.0f64..2.0,
        seed in prop::collection::vec(-1.0f64..1.0, 16),
        t in 0.0f64..10.0,
    ) {
        let graph = LatticeGraph::triangle();
        let layout = graph.layout(1).unwrap();
        let ham = hamiltonian_lattice(&graph, j, h, &layout).unwrap();
        let s0 = random_state(&layout, &seed);
        let e0 = expect_real(&s0, &ham).unwrap();
        let out = evolve_static(&ham, &s0, &[t], &Record::default()).unwrap().final_state;
        prop_assert!((expect_real(&out, &ham).unwrap() - e0).abs() < 1e-10 * (1.0 + e0.abs()));
        for g in gauss_generators(&graph, &layout).unwrap() {
            prop_assert!((expect_real(&out, &g).unwrap() - expect_real(&s0, &g).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn open_evolution_is_linear_and_trace_preserving(
        w in 0.0f64..1.0,
        heating in 0.0f64..0.5,
        t_c in 1.0f64..20.0,
        t in 0.1f64..1.0,
    ) {
        let layout = LatticeGraph::link().layout(2).unwrap();
        let ham = hamiltonian_link(&LinkParams::new(1.0, 0.3), &layout, LinkSites::STANDARD).unwrap();
        let noise = NoiseModel::off().with_heating("m1", heating).with_coherence("m2", t_c).with_t2("l", 5.0);
        let a = QuantumState::basis(layout.clone(), &[1, 1, 0]).unwrap().to_mixed();
        let b = QuantumState::product(layout.clone(), &[ket::fock(0, 3), ket::plus(), ket::fock(1, 3)]).unwrap().to_mixed();
        let mix = QuantumState::mixed(layout.clone(), a.density_matrix() * C64::from(w) + b.density_matrix() * C64::from(1.0 - w)).unwrap();
        let control = StepControl { check_convergence: false, ..StepControl::default() };
        let run = |s: &QuantumState| {
            evolve_lindblad(Dynamics::Static(&ham), &noise, s, &[t], &control, &Record::default()).unwrap().final_state.density_matrix()
        };
        let (ra, rb, rm) = (run(&a), run(&b), run(&mix));
        let combo = ra * C64::from(w) + rb * C64::from(1.0 - w);
        let diff = (rm.clone() - combo).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-12, "linearity defect {}", diff);
        prop_assert!((rm.trace().re - 1.0).abs() < 1e-10);
    }
}

#[test]
fn half_period_transfers_the_excitation_exactly() {
    let layout = LatticeGraph::link().layout(3).unwrap();
    let j = 2.0;
    let ham = hamiltonian_link(&LinkParams::new(j, 0.0), &layout, LinkSites::STANDARD).unwrap();
    let s0 = QuantumState::product(layout.clone(), &[ket::fock(1, 4), ket::minus(), ket::fock(0, 4)]).unwrap();
    let out = evolve_static(&ham, &s0, &[PI / (2.0 * j)], &Record::default()).unwrap().final_state;
    let n2 = z2sim::hilbert::embed_kind(LocalKind::Number, 2, &layout).unwrap();
    assert!((expect_real(&out, &n2).unwrap() - 1.0).abs() < 1e-13);
}
