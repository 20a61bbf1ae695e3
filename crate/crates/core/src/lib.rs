//! Simulation and analysis of Z2 lattice gauge theories encoded in hybrid
//! qubit-oscillator registers.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod hilbert;
pub mod models;
pub mod prep_measure;

pub use error::{Error, Result};
