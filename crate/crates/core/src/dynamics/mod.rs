//! Time evolution: exact static propagation, RK4 for pulsed schedules and
//! a Lindblad integrator for open systems.

mod closed;
mod lindblad;
mod noise;
mod series;

pub use closed::{evolve_pulsed, evolve_static, pulse_step_bound};
pub use lindblad::{evolve_lindblad, to_density, Dynamics};
pub use noise::{thermal_matrix, thermal_oscillator_state, thermal_populations, NoiseModel};
pub use series::{gauss_drift, ObservableSeries, Record, Trajectory};

/// Step-size policy for the time-dependent integrators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    /// Upper bound on the step, in seconds.
    pub dt: Option<f64>,
    /// Steps per fastest pulse period, divided by 40.
    pub refine: f64,
    /// Largest `‖generator‖·dt` the Lindblad integrator accepts.
    pub max_phase_step: f64,
    /// Repeat the run with half the step and require agreement.
    pub check_convergence: bool,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { dt: None, refine: 4.0, max_phase_step: 0.05, check_convergence: true }
    }
}
