use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::graph::LatticeGraph;
use super::Axis;
use crate::error::{Error, Result};
use crate::hilbert::{embed_kind, expect_real, HilbertLayout, LocalKind, Operator, QuantumState, SubsystemKind};

/// Which Pauli carries the hopping and which the electric field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    /// `σᶻ`-conditioned hopping, `hσˣ` field.
    #[default]
    ZBasis,
    /// Hadamard-rotated: `σˣ`-conditioned hopping, `hσᶻ` field.
    RotatedBasis,
}

impl Conditioning {
    pub fn hopping_axis(self) -> Axis {
        match self {
            Conditioning::ZBasis => Axis::Z,
            Conditioning::RotatedBasis => Axis::X,
        }
    }

    /// Axis of the field term, which is also the axis of the link factor
    /// in the Gauss generators.
    pub fn field_axis(self) -> Axis {
        match self {
            Conditioning::ZBasis => Axis::X,
            Conditioning::RotatedBasis => Axis::Z,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub j: f64,
    pub h: f64,
    #[serde(default)]
    pub conditioning: Conditioning,
}

impl LinkParams {
    pub fn new(j: f64, h: f64) -> Self {
        Self { j, h, conditioning: Conditioning::ZBasis }
    }

    pub fn rotated(j: f64, h: f64) -> Self {
        Self { j, h, conditioning: Conditioning::RotatedBasis }
    }

    /// `Ω₀ = √(J² + h²)`.
    pub fn omega0(&self) -> f64 {
        self.j.hypot(self.h)
    }

    fn validate(&self) -> Result<()> {
        if !(self.j.is_finite() && self.h.is_finite()) || self.j < 0.0 {
            return Err(Error::Precondition(format!("need finite J ≥ 0 and finite h, got J={} h={}", self.j, self.h)));
        }
        Ok(())
    }
}

/// Register positions `[m1, ℓ, m2]` of a single link.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinkSites {
    pub m1: usize,
    pub link: usize,
    pub m2: usize,
}

impl LinkSites {
    pub const STANDARD: Self = Self { m1: 0, link: 1, m2: 2 };

    fn check(&self, layout: &HilbertLayout) -> Result<()> {
        check_register(layout, &[self.m1, self.m2], &[self.link])
    }
}

/// Register positions `[m1, ℓ1, ℓ2, m2]` of a two-link loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoopSites {
    pub m1: usize,
    pub l1: usize,
    pub l2: usize,
    pub m2: usize,
}

impl LoopSites {
    pub const STANDARD: Self = Self { m1: 0, l1: 1, l2: 2, m2: 3 };

    fn check(&self, layout: &HilbertLayout) -> Result<()> {
        check_register(layout, &[self.m1, self.m2], &[self.l1, self.l2])
    }
}

fn check_register(layout: &HilbertLayout, oscillators: &[usize], qubits: &[usize]) -> Result<()> {
    if layout.len() != oscillators.len() + qubits.len() {
        return Err(Error::WrongRegister(format!(
            "expected {} oscillators and {} qubits, layout `{layout}` has {} subsystems",
            oscillators.len(),
            qubits.len(),
            layout.len()
        )));
    }
    let mut all: Vec<usize> = oscillators.iter().chain(qubits).copied().collect();
    all.sort_unstable();
    all.dedup();
    if all.len() != layout.len() {
        return Err(Error::WrongRegister("site map repeats a subsystem".into()));
    }
    for (&idx, kind) in oscillators
        .iter()
        .map(|i| (i, SubsystemKind::Oscillator))
        .chain(qubits.iter().map(|i| (i, SubsystemKind::Qubit)))
    {
        if layout.subsystem(idx)?.kind != kind {
            return Err(Error::WrongRegister(format!("subsystem {idx} of `{layout}` is not a {kind:?}")));
        }
    }
    Ok(())
}

/// `J â†_to σ â_from + h.c.`
fn hop(layout: &Arc<HilbertLayout>, from: usize, to: usize, link: usize, axis: Axis, j: f64) -> Result<Operator> {
    let a = embed_kind(LocalKind::Annihilate, from, layout)?;
    let adag = embed_kind(LocalKind::Create, to, layout)?;
    let s = embed_kind(axis.kind(), link, layout)?;
    Ok((&(&adag * &s) * &a).scale(j).plus_adjoint())
}

fn field(layout: &Arc<HilbertLayout>, link: usize, axis: Axis, h: f64) -> Result<Operator> {
    Ok(embed_kind(axis.kind(), link, layout)?.scale(h))
}

/// `J(â†₁σᶻâ₂ + h.c.) + hσˣ`, or the rotated form.
pub fn hamiltonian_link(params: &LinkParams, layout: &Arc<HilbertLayout>, sites: LinkSites) -> Result<Operator> {
    params.validate()?;
    sites.check(layout)?;
    let c = params.conditioning;
    let hopping = hop(layout, sites.m2, sites.m1, sites.link, c.hopping_axis(), params.j)?;
    Ok(hopping + field(layout, sites.link, c.field_axis(), params.h)?)
}

/// `Σᵢ (J â†₂σᶻ_ℓᵢ â₁ + h.c.) + hσˣ_ℓᵢ`, or the rotated form.
pub fn hamiltonian_loop(params: &LinkParams, layout: &Arc<HilbertLayout>, sites: LoopSites) -> Result<Operator> {
    params.validate()?;
    sites.check(layout)?;
    let c = params.conditioning;
    let mut h = Operator::zeros(layout);
    for link in [sites.l1, sites.l2] {
        h = h + hop(layout, sites.m1, sites.m2, link, c.hopping_axis(), params.j)?;
        h = h + field(layout, link, c.field_axis(), params.h)?;
    }
    Ok(h)
}

/// `Σ_links (J â†_b σᶻ_ℓ â_a + h.c.) + h Σ_links σˣ_ℓ` for links `(a, b)`.
pub fn hamiltonian_lattice(graph: &LatticeGraph, j: f64, h: f64, layout: &Arc<HilbertLayout>) -> Result<Operator> {
    hamiltonian_lattice_with(graph, &LinkParams::new(j, h), layout)
}

pub fn hamiltonian_lattice_with(graph: &LatticeGraph, params: &LinkParams, layout: &Arc<HilbertLayout>) -> Result<Operator> {
    params.validate()?;
    let idx = graph.locate(layout)?;
    let c = params.conditioning;
    let mut h = Operator::zeros(layout);
    for (link, &q) in graph.links().iter().zip(&idx.links) {
        let a = idx.sites[graph.site_position(&link.a).expect("validated graph")];
        let b = idx.sites[graph.site_position(&link.b).expect("validated graph")];
        h = h + hop(layout, a, b, q, c.hopping_axis(), params.j)?;
        h = h + field(layout, q, c.field_axis(), params.h)?;
    }
    Ok(h)
}

/// `Ĝ_m = (Π_{ℓ ∋ m} σˣ_ℓ) P̂_m`, one per site in graph order.
pub fn gauss_generators(graph: &LatticeGraph, layout: &Arc<HilbertLayout>) -> Result<Vec<Operator>> {
    gauss_generators_with(graph, layout, Conditioning::ZBasis)
}

/// Generators in either basis; the rotated basis uses `σᶻ` link factors.
pub fn gauss_generators_with(
    graph: &LatticeGraph,
    layout: &Arc<HilbertLayout>,
    conditioning: Conditioning,
) -> Result<Vec<Operator>> {
    let idx = graph.locate(layout)?;
    let axis = conditioning.field_axis();
    graph
        .sites()
        .iter()
        .zip(&idx.sites)
        .map(|(site, &m)| {
            let mut g = embed_kind(LocalKind::Parity, m, layout)?;
            for (link, &q) in graph.links().iter().zip(&idx.links) {
                if link.a == *site || link.b == *site {
                    g = &g * &embed_kind(axis.kind(), q, layout)?;
                }
            }
            Ok(g)
        })
        .collect()
}

/// Generators `[Ĝ_m1, Ĝ_m2]` of a link at explicit register positions.
pub fn link_generators(layout: &Arc<HilbertLayout>, sites: LinkSites, conditioning: Conditioning) -> Result<Vec<Operator>> {
    sites.check(layout)?;
    let s = embed_kind(conditioning.field_axis().kind(), sites.link, layout)?;
    [sites.m1, sites.m2]
        .iter()
        .map(|&m| Ok(&s * &embed_kind(LocalKind::Parity, m, layout)?))
        .collect()
}

/// Generators `[Ĝ_m1, Ĝ_m2]` of a loop, `σˣ_ℓ1 σˣ_ℓ2 P̂_m`.
pub fn loop_generators(layout: &Arc<HilbertLayout>, sites: LoopSites, conditioning: Conditioning) -> Result<Vec<Operator>> {
    sites.check(layout)?;
    let axis = conditioning.field_axis().kind();
    let ss = &embed_kind(axis, sites.l1, layout)? * &embed_kind(axis, sites.l2, layout)?;
    [sites.m1, sites.m2]
        .iter()
        .map(|&m| Ok(&ss * &embed_kind(LocalKind::Parity, m, layout)?))
        .collect()
}

/// Projector `Π_m (1 + g_m Ĝ_m)/2` onto a joint generator eigenspace.
pub fn sector_projector(generators: &[Operator], eigenvalues: &[f64]) -> Result<Operator> {
    let first = generators.first().ok_or(Error::EmptySelection)?;
    if generators.len() != eigenvalues.len() {
        return Err(Error::DimensionMismatch { expected: generators.len(), got: eigenvalues.len() });
    }
    let id = Operator::identity(first.layout());
    let mut p = id.clone();
    for (g, &e) in generators.iter().zip(eigenvalues) {
        p = &p * &(&id + &g.scale(e)).scale(0.5);
    }
    Ok(p)
}

/// `arccos⟨σᶻ_ℓ1 σᶻ_ℓ2⟩` with the correlator clamped to `[−1, 1]`.
pub fn ab_phase(state: &QuantumState, links: (usize, usize)) -> Result<f64> {
    let layout = state.layout();
    for q in [links.0, links.1] {
        if layout.subsystem(q)?.kind != SubsystemKind::Qubit {
            return Err(Error::WrongRegister(format!("subsystem {q} is not a link qubit")));
        }
    }
    if links.0 == links.1 {
        return Err(Error::WrongRegister("AB phase needs two distinct links".into()));
    }
    let zz = &embed_kind(LocalKind::PauliZ, links.0, layout)? * &embed_kind(LocalKind::PauliZ, links.1, layout)?;
    Ok(expect_real(state, &zz)?.clamp(-1.0, 1.0).acos())
}
