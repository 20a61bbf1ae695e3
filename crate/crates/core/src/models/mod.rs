//! Gauge-invariant Hamiltonians, symmetry generators and the microscopic
//! drive that realizes them.

pub mod graph;
pub mod hamiltonian;
pub mod schedule;
pub mod sdf;

use serde::{Deserialize, Serialize};

use crate::hilbert::LocalKind;

pub use graph::{resource_count, GraphIndices, LatticeGraph, Link, ResourceCount};
pub use hamiltonian::{
    ab_phase, gauss_generators, gauss_generators_with, hamiltonian_lattice, hamiltonian_lattice_with, hamiltonian_link,
    hamiltonian_loop, link_generators, loop_generators, sector_projector, Conditioning, LinkParams, LinkSites, LoopSites,
};
pub use schedule::{build_schedule, rotation_matrix, PulseSchedule, QubitGate, ScheduleKind, Step};
pub use sdf::{
    collective_spin, effective_hamiltonian, effective_tunnelling_rate, geometric_phase_term, hamiltonian_micro,
    Envelope, SdfDrive, SdfParams,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn kind(self) -> LocalKind {
        match self {
            Axis::X => LocalKind::PauliX,
            Axis::Y => LocalKind::PauliY,
            Axis::Z => LocalKind::PauliZ,
        }
    }
}
