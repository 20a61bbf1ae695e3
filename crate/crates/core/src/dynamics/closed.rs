use std::f64::consts::PI;

use nalgebra::DVector;

use super::lindblad::{evolve_lindblad, Dynamics};
use super::noise::NoiseModel;
use super::series::{check_times, Record, Recorder, Trajectory};
use super::StepControl;
use crate::error::{Error, Result};
use crate::hilbert::{QuantumState, SparseMatrix, SpectralPropagator, StateData, C64};
use crate::models::{Envelope, PulseSchedule, SdfDrive, Step};

const NORM_TOL: f64 = 1e-10;
const PULSED_NORM_DRIFT: f64 = 1e-8;
const PULSED_CONVERGENCE: f64 = 1e-8;

/// Exact evolution under a time-independent Hermitian Hamiltonian.
pub fn evolve_static(
    h: &crate::hilbert::Operator,
    state0: &QuantumState,
    times: &[f64],
    record: &Record,
) -> Result<Trajectory> {
    h.require_hermitian()?;
    state0.check_layout(h.layout())?;
    check_times(times)?;
    let prop = SpectralPropagator::new(h.matrix());
    let layout = state0.layout().clone();
    let mut rec = Recorder::new(record);
    let mut last = state0.clone();
    for &t in times {
        last = match state0.data() {
            StateData::Pure(v) => {
                let out = prop.apply(t, v);
                let norm = out.norm();
                if (norm - 1.0).abs() > NORM_TOL {
                    return Err(Error::Integration(format!("norm drifted to {norm} at t={t}")));
                }
                QuantumState::pure_unchecked(layout.clone(), out)
            }
            StateData::Mixed(rho) => QuantumState::mixed_unchecked(layout.clone(), prop.conjugate(t, rho)),
        };
        rec.push(t, &last)?;
    }
    Ok(rec.finish(last))
}

/// Precomputed time-dependent generator of one SDF segment.
pub(crate) struct Segment {
    pub m: SparseMatrix,
    pub mdag: SparseMatrix,
    pub delta: f64,
    pub envelope: Envelope,
}

impl Segment {
    pub(crate) fn coefficient(&self, t: f64) -> C64 {
        C64::from_polar(self.envelope.value(t), -self.delta * t)
    }

    /// `out = H(t) x`.
    pub(crate) fn apply(&self, t: f64, x: &[C64], out: &mut [C64], scratch: &mut [C64]) {
        let c = self.coefficient(t);
        self.m.mul_vec_into(x, out);
        self.mdag.mul_vec_into(x, scratch);
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o = c * *o + c.conj() * *s;
        }
    }

    /// Bound on `‖H(t)‖` over the segment.
    pub(crate) fn norm_bound(&self) -> f64 {
        self.m.row_sum_norm() + self.mdag.row_sum_norm()
    }
}

pub(crate) enum Piece {
    Drive(Segment),
    Gate(SparseMatrix),
}

/// Compiles a schedule against a layout.
pub(crate) fn compile(schedule: &PulseSchedule, layout: &std::sync::Arc<crate::hilbert::HilbertLayout>) -> Result<Vec<Piece>> {
    schedule
        .steps()
        .iter()
        .map(|step| match step {
            Step::Sdf { sdf, flat_duration } => {
                let drive = SdfDrive::new(*sdf, layout)?;
                let m = drive.coupling.matrix().clone();
                Ok(Piece::Drive(Segment {
                    mdag: m.adjoint(),
                    m,
                    delta: sdf.delta,
                    envelope: Envelope::new(sdf.ramp, *flat_duration),
                }))
            }
            Step::Gate(g) => Ok(Piece::Gate(g.operator(layout)?.matrix().clone())),
        })
        .collect()
}

/// Largest step allowed by the drive frequencies:
/// `min(2π/|Δ|, 2π/max Ω)/40`, further divided by `control.refine`.
pub fn pulse_step_bound(schedule: &PulseSchedule, control: &StepControl) -> f64 {
    let mut dt = schedule
        .segments()
        .map(|(p, _)| {
            let fastest = p.delta.abs().max(p.omega1).max(p.omega2);
            2.0 * PI / fastest / 40.0
        })
        .fold(f64::INFINITY, f64::min)
        / control.refine.max(1.0);
    if let Some(user) = control.dt {
        dt = dt.min(user);
    }
    dt
}

/// Samples in `(start, end]` become local integration stops.
fn stops_in(samples: &[f64], start: f64, end: f64) -> Vec<f64> {
    samples.iter().copied().filter(|&s| s > start && s <= end).collect()
}

struct Rk4Buffers {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
    scratch: Vec<C64>,
}

impl Rk4Buffers {
    fn new(d: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); d];
        Self { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z.clone(), scratch: z }
    }
}

/// Fixed-step RK4 of `ψ' = −i H(t) ψ` from local time `t0` to `t1`.
fn rk4_segment(seg: &Segment, psi: &mut [C64], t0: f64, t1: f64, dt_max: f64, buf: &mut Rk4Buffers) {
    if t1 <= t0 {
        return;
    }
    let n = ((t1 - t0) / dt_max).ceil().max(1.0) as usize;
    let h = (t1 - t0) / n as f64;
    let mi = C64::new(0.0, -1.0);
    let rhs = |t: f64, x: &[C64], out: &mut [C64], scratch: &mut [C64]| {
        seg.apply(t, x, out, scratch);
        out.iter_mut().for_each(|o| *o *= mi);
    };
    for step in 0..n {
        let t = t0 + step as f64 * h;
        let Rk4Buffers { k1, k2, k3, k4, tmp, scratch } = buf;
        rhs(t, psi, k1, scratch);
        for i in 0..psi.len() {
            tmp[i] = psi[i] + k1[i] * (h / 2.0);
        }
        rhs(t + h / 2.0, tmp, k2, scratch);
        for i in 0..psi.len() {
            tmp[i] = psi[i] + k2[i] * (h / 2.0);
        }
        rhs(t + h / 2.0, tmp, k3, scratch);
        for i in 0..psi.len() {
            tmp[i] = psi[i] + k3[i] * h;
        }
        rhs(t + h, tmp, k4, scratch);
        for i in 0..psi.len() {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}

fn run_pulsed_pure(
    pieces: &[Piece],
    state0: &QuantumState,
    samples: &[f64],
    dt: f64,
    record: &Record,
) -> Result<Trajectory> {
    let layout = state0.layout().clone();
    let mut psi: Vec<C64> = state0.as_vector().expect("pure input").iter().copied().collect();
    let mut buf = Rk4Buffers::new(psi.len());
    let mut rec = Recorder::new(record);
    let snapshot = |psi: &[C64]| QuantumState::pure_unchecked(layout.clone(), DVector::from_column_slice(psi));
    let mut cursor = 0.0;
    let mut emitted = 0;
    while emitted < samples.len() && samples[emitted] <= 0.0 {
        rec.push(samples[emitted], &snapshot(&psi))?;
        emitted += 1;
    }
    for piece in pieces {
        match piece {
            Piece::Gate(u) => {
                let mut out = vec![C64::new(0.0, 0.0); psi.len()];
                u.mul_vec_into(&psi, &mut out);
                psi = out;
            }
            Piece::Drive(seg) => {
                let dur = seg.envelope.duration();
                let mut local = 0.0;
                for stop in stops_in(samples, cursor, cursor + dur) {
                    rk4_segment(seg, &mut psi, local, stop - cursor, dt, &mut buf);
                    local = stop - cursor;
                    rec.push(stop, &snapshot(&psi))?;
                    emitted += 1;
                }
                rk4_segment(seg, &mut psi, local, dur, dt, &mut buf);
                cursor += dur;
            }
        }
    }
    if emitted != samples.len() {
        return Err(Error::Precondition(format!(
            "sample time {:.6e} s lies beyond the schedule end {cursor:.6e} s",
            samples[emitted]
        )));
    }
    let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > PULSED_NORM_DRIFT {
        return Err(Error::Integration(format!("norm drift {:.3e} exceeds {PULSED_NORM_DRIFT:.0e}", norm - 1.0)));
    }
    Ok(rec.finish(snapshot(&psi)))
}

/// Integrates the Schrödinger equation under the schedule's microscopic
/// Hamiltonian with fixed-step RK4. Sample times are absolute schedule
/// times; a sample on a segment boundary sees the state before any gate at
/// that boundary. Mixed inputs are evolved as density matrices.
pub fn evolve_pulsed(
    schedule: &PulseSchedule,
    state0: &QuantumState,
    sample_times: &[f64],
    control: &StepControl,
    record: &Record,
) -> Result<Trajectory> {
    check_times(sample_times)?;
    if !state0.is_pure() {
        return evolve_lindblad(Dynamics::Pulsed(schedule), &NoiseModel::off(), state0, sample_times, control, record);
    }
    let pieces = compile(schedule, state0.layout())?;
    let dt = pulse_step_bound(schedule, control);
    let traj = run_pulsed_pure(&pieces, state0, sample_times, dt, record)?;
    if control.check_convergence {
        let fine = run_pulsed_pure(&pieces, state0, &[], dt / 2.0, &Record::default())?;
        let a = traj.final_state.as_vector().expect("pure");
        let b = fine.final_state.as_vector().expect("pure");
        let change = 1.0 - a.dotc(b).norm_sqr();
        if change.abs() > PULSED_CONVERGENCE {
            return Err(Error::Integration(format!(
                "step {dt:.3e} s not converged: halving it changes the final fidelity by {change:.3e}"
            )));
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{embed_kind, fidelity, ket, LocalKind};
    use crate::models::{
        build_schedule, effective_hamiltonian, effective_tunnelling_rate, hamiltonian_link, LatticeGraph, LinkParams,
        LinkSites, ScheduleKind, SdfParams,
    };

    fn link_start(cutoff: usize) -> QuantumState {
        let layout = LatticeGraph::link().layout(cutoff).unwrap();
        QuantumState::product(layout, &[ket::fock(1, cutoff + 1), ket::minus(), ket::fock(0, cutoff + 1)]).unwrap()
    }

    #[test]
    fn static_link_matches_closed_form() {
        let s0 = link_start(3);
        let layout = s0.layout().clone();
        let (j, h) = (1.3, 0.7);
        let ham = hamiltonian_link(&LinkParams::new(j, h), &layout, LinkSites::STANDARD).unwrap();
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let n2 = embed_kind(LocalKind::Number, 2, &layout).unwrap();
        let sx = embed_kind(LocalKind::PauliX, 1, &layout).unwrap();
        let traj = evolve_static(&ham, &s0, &times, &Record::observables(vec![("n2".into(), n2), ("sx".into(), sx)]))
            .unwrap();
        let w = j.hypot(h);
        for (k, &t) in times.iter().enumerate() {
            let s2 = (w * t).sin().powi(2) * j * j / (w * w);
            assert!((traj.series["n2"].values[k] - s2).abs() < 1e-12);
            assert!((traj.series["sx"].values[k] - (-1.0 + 2.0 * s2)).abs() < 1e-12);
        }
        assert!(evolve_static(&ham, &s0, &[1.0, 0.5], &Record::default()).is_err());
        let anti = ham.scale(C64::new(0.0, 1.0));
        assert!(matches!(evolve_static(&anti, &s0, &[1.0], &Record::default()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn mixed_and_pure_static_agree() {
        let s0 = link_start(2);
        let ham = hamiltonian_link(&LinkParams::new(1.0, 0.4), s0.layout(), LinkSites::STANDARD).unwrap();
        let a = evolve_static(&ham, &s0, &[0.7], &Record::default()).unwrap();
        let b = evolve_static(&ham, &s0.to_mixed(), &[0.7], &Record::default()).unwrap();
        let diff = (a.final_state.density_matrix() - b.final_state.density_matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-13);
    }

    fn drive(omega: f64, delta: f64, ramp: f64) -> SdfParams {
        SdfParams::link(omega, omega, delta, ramp, 0, 2)
    }

    #[test]
    fn single_force_closes_its_loop() {
        // only the first force; after one detuning period the mode returns
        let layout = LatticeGraph::link().layout(6).unwrap();
        let mut p = drive(2.0, 20.0, 0.0);
        p.omega2 = 0.0;
        let period = 2.0 * PI / p.delta;
        let sched = build_schedule(ScheduleKind::Plain, &p, 3.0 * period).unwrap();
        let s0 = QuantumState::product(layout.clone(), &[ket::fock(0, 7), ket::up(), ket::fock(0, 7)]).unwrap();
        let n1 = embed_kind(LocalKind::Number, 0, &layout).unwrap();
        let control = StepControl { refine: 8.0, ..StepControl::default() };
        let traj = evolve_pulsed(
            &sched,
            &s0,
            &[0.5 * period, period, 2.0 * period],
            &control,
            &Record::observables(vec![("n1".into(), n1)]),
        )
        .unwrap();
        let n = &traj.series["n1"].values;
        assert!(n[0] > 1e-3);
        assert!(n[1] < 1e-9 && n[2] < 1e-9, "{n:?}");
    }

    #[test]
    fn pulsed_matches_effective_hamiltonian() {
        let layout = LatticeGraph::link().layout(3).unwrap();
        let p = drive(1.0, 30.0, 2.0 * PI / 30.0 * 5.0);
        let rate = effective_tunnelling_rate(&p).unwrap();
        let target = PI / 2.0 / rate;
        let env_fwhm = target + 0.25 * p.ramp;
        let sched = build_schedule(ScheduleKind::Plain, &p, env_fwhm).unwrap();
        assert!((sched.effective_time() - target).abs() < 1e-12);
        let s0 = link_start(3);
        let control = StepControl { refine: 4.0, ..StepControl::default() };
        let pulsed = evolve_pulsed(&sched, &s0, &[sched.total_duration()], &control, &Record::default()).unwrap();
        let heff = effective_hamiltonian(&p, &layout).unwrap();
        let exact = evolve_static(&heff, &s0, &[target], &Record::default()).unwrap();
        let f = fidelity(&pulsed.final_state, &exact.final_state).unwrap();
        assert!(f > 0.999, "fidelity {f}");
        let hl = hamiltonian_link(&LinkParams::new(rate, 0.0), &layout, LinkSites::STANDARD).unwrap();
        let link = evolve_static(&hl, &s0, &[target], &Record::default()).unwrap();
        assert!(fidelity(&pulsed.final_state, &link.final_state).unwrap() > 0.999);
    }

    #[test]
    fn echo_equals_flip_after_static() {
        let layout = LatticeGraph::link().layout(3).unwrap();
        let p = drive(1.0, 40.0, 2.0 * PI / 40.0 * 4.0);
        let rate = effective_tunnelling_rate(&p).unwrap();
        let arm = PI / 4.0 / rate + 0.25 * p.ramp;
        let sched = build_schedule(ScheduleKind::LinkEcho, &p, arm).unwrap();
        let s0 = link_start(3);
        let control = StepControl::default();
        let pulsed = evolve_pulsed(&sched, &s0, &[sched.total_duration()], &control, &Record::default()).unwrap();
        let hl = hamiltonian_link(&LinkParams::new(rate, 0.0), &layout, LinkSites::STANDARD).unwrap();
        let t_eff = sched.effective_time();
        let exact = evolve_static(&hl, &s0, &[t_eff], &Record::default()).unwrap();
        let x = embed_kind(LocalKind::PauliX, 1, &layout).unwrap();
        let flipped = exact.final_state.apply(&x).unwrap();
        assert!(fidelity(&pulsed.final_state, &flipped).unwrap() > 0.999);
    }

    #[test]
    fn sample_beyond_schedule_is_rejected() {
        let p = drive(1.0, 30.0, 0.0);
        let sched = build_schedule(ScheduleKind::Plain, &p, 0.5).unwrap();
        let s0 = link_start(2);
        let r = evolve_pulsed(&sched, &s0, &[0.7], &StepControl::default(), &Record::default());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}
