//! Digital state preparation and the measurement pipeline.

mod circuit;
mod gates;
mod readout;
mod shots;
mod squeeze;

pub use circuit::{PrepCircuit, PrepOutcome, PrepStep};
pub use gates::{bsb_matrix, bsb_pi, carrier_rotation, entangler, prepare_bell, BellState};
pub use readout::{
    measure_occupation, parity_fringe, readout_postselect, Occupation, OccupationProbe, PostSelected, Spin,
    PROBE_LEAKAGE_LIMIT,
};
pub use shots::{derive_seed, sample_shots, MeasurementBasis, ShotRecord};
pub use squeeze::{
    squeeze, squeeze_matrix, squeeze_tail, squeeze_with_tolerance, SqueezeParams, SQUEEZE_TAIL_TOLERANCE,
};
