use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{config_err, ExperimentConfig, Preset, Shots};
use crate::analysis::{extract_contrast, fit_decaying_sinusoid, pearson, FitGuess};
use crate::dynamics::{
    evolve_lindblad, evolve_pulsed, evolve_static, thermal_matrix, Dynamics, NoiseModel, ObservableSeries, Record,
    StepControl, Trajectory,
};
use crate::error::Result;
use crate::hilbert::{
    build_layout, embed_kind, fidelity, ket, HilbertLayout, LocalKind, Operator, QuantumState, SubsystemKind,
    SubsystemSpec,
};
use crate::models::{
    build_schedule, effective_hamiltonian, effective_tunnelling_rate, hamiltonian_link, hamiltonian_loop,
    link_generators, loop_generators, resource_count, Axis, LatticeGraph, LinkParams, LinkSites, LoopSites,
    ScheduleKind, SdfParams,
};
use crate::prep_measure::{
    derive_seed, parity_fringe, sample_shots, BellState, MeasurementBasis, PrepCircuit, PrepStep,
};

/// Phases per parity fringe when extracting a contrast.
const FRINGE_POINTS: usize = 16;

/// Outcome of one preset at one parameter point.
#[derive(Clone, Debug, Default)]
pub struct PointResult {
    pub series: Vec<ObservableSeries>,
    pub derived: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
}

impl PointResult {
    pub fn series(&self, label: &str) -> Option<&ObservableSeries> {
        self.series.iter().find(|s| s.label == label)
    }

    pub fn derived_f64(&self, key: &str) -> Option<f64> {
        self.derived.get(key).and_then(Value::as_f64)
    }
}

/// Runs a preset at a single parameter point. List-valued axes are
/// rejected; see [`super::sweep`].
pub fn run_point(cfg: &ExperimentConfig) -> Result<PointResult> {
    if let Some(axis) = cfg.list_axes().first() {
        return Err(config_err(axis.name(), "list-valued; use `sweep`"));
    }
    let noise = cfg.noise.model();
    noise.validate()?;
    match cfg.preset {
        Preset::LinkTunnelling | Preset::LinkFieldSweep => link_tunnelling(cfg, &noise),
        Preset::LoopAb => loop_ab(cfg, &noise),
        Preset::LambdaSweep => lambda_point(cfg),
        Preset::SqueezedTunnelling => squeezed_tunnelling(cfg, &noise),
        Preset::MagnusCheck => magnus_check(cfg),
        Preset::ResourceCount => resources(cfg),
    }
}

pub fn bell_name(b: BellState) -> &'static str {
    match b {
        BellState::PhiPlus => "phi_plus",
        BellState::PhiMinus => "phi_minus",
        BellState::PsiPlus => "psi_plus",
        BellState::PsiMinus => "psi_minus",
    }
}

/// Register in the order `[first site, links…, other sites…]` with
/// per-site cutoffs.
fn register(graph: &LatticeGraph, cfg: &ExperimentConfig) -> Result<Arc<HilbertLayout>> {
    let sites = graph.sites();
    let mut specs = vec![SubsystemSpec::oscillator(sites[0].clone(), cfg.cutoff(&sites[0]))];
    specs.extend(graph.links().iter().map(|l| SubsystemSpec::qubit(l.label.clone())));
    specs.extend(sites[1..].iter().map(|s| SubsystemSpec::oscillator(s.clone(), cfg.cutoff(s))));
    build_layout(specs)
}

/// Oscillators in vacuum (or thermal when the noise model says so), qubits
/// in `|↓⟩`.
fn ground_state(layout: &Arc<HilbertLayout>, noise: &NoiseModel) -> Result<QuantumState> {
    let warm = layout
        .subsystems()
        .iter()
        .any(|s| s.kind == SubsystemKind::Oscillator && noise.nbar(&s.label) > 0.0);
    if !warm {
        let digits: Vec<usize> =
            layout.subsystems().iter().map(|s| usize::from(s.kind == SubsystemKind::Qubit)).collect();
        return QuantumState::basis(layout.clone(), &digits);
    }
    let factors = layout
        .subsystems()
        .iter()
        .map(|s| match s.kind {
            SubsystemKind::Oscillator => thermal_matrix(noise.nbar(&s.label), s.cutoff()),
            SubsystemKind::Qubit => Ok(ket::down() * ket::down().adjoint()),
        })
        .collect::<Result<Vec<_>>>()?;
    QuantumState::product_mixed(layout.clone(), &factors)
}

fn op(kind: LocalKind, index: usize, layout: &Arc<HilbertLayout>) -> Result<Operator> {
    embed_kind(kind, index, layout)
}

/// An observable, optionally backed by a projective measurement when
/// shots are sampled.
struct Probe {
    label: String,
    op: Operator,
    basis: Option<MeasurementBasis>,
    emit: bool,
}

impl Probe {
    fn new(label: &str, op: Operator, basis: Option<MeasurementBasis>) -> Self {
        Self { label: label.into(), op, basis, emit: true }
    }

    fn hidden(label: &str, op: Operator) -> Self {
        Self { label: label.into(), op, basis: None, emit: false }
    }
}

fn record(probes: &[Probe], keep_states: bool) -> Record {
    Record::observables(probes.iter().map(|p| (p.label.clone(), p.op.clone())).collect()).keep_states(keep_states)
}

/// Series of every emitted probe, replaced by shot means with standard
/// errors where a measurement basis is available.
fn measure(traj: &Trajectory, probes: &[Probe], shots: Shots, seed: u64) -> Result<Vec<ObservableSeries>> {
    let mut out = Vec::new();
    for (p_idx, probe) in probes.iter().enumerate().filter(|(_, p)| p.emit) {
        let exact = traj.series(&probe.label)?.clone();
        let (Shots::Count(n), Some(basis)) = (shots, &probe.basis) else {
            out.push(exact);
            continue;
        };
        let records = traj
            .states
            .iter()
            .enumerate()
            .map(|(k, s)| sample_shots(s, basis, n, derive_seed(seed, ((p_idx as u64) << 32) | k as u64)))
            .collect::<Result<Vec<_>>>()?;
        let values = records.iter().map(|r| r.mean()).collect();
        let stderr = records.iter().map(|r| r.stderr()).collect();
        out.push(ObservableSeries::new(&probe.label, traj.times.clone(), values)?.with_stderr(stderr)?);
    }
    Ok(out)
}

fn evolve(h: &Operator, noise: &NoiseModel, s0: &QuantumState, times: &[f64], rec: &Record) -> Result<Trajectory> {
    evolve_lindblad(Dynamics::Static(h), noise, s0, times, &StepControl::default(), rec)
}

fn max_drift(traj: &Trajectory, labels: &[&str]) -> Result<f64> {
    labels.iter().try_fold(0.0f64, |acc, l| Ok(acc.max(traj.series(l)?.drift())))
}

fn shots_ignored(cfg: &ExperimentConfig, out: &mut PointResult) {
    if cfg.shots != Shots::Exact {
        out.warnings.push(format!("`{}` reports exact values; `shots` is ignored", cfg.preset.name()));
    }
}

fn link_tunnelling(cfg: &ExperimentConfig, noise: &NoiseModel) -> Result<PointResult> {
    let (j, h) = (cfg.j()?, cfg.h()?);
    let params = LinkParams { j, h, conditioning: cfg.physical.conditioning };
    let layout = register(&LatticeGraph::link(), cfg)?;
    let sites = LinkSites::STANDARD;
    let s0 = PrepCircuit::excitation_with_minus_link(sites.link, sites.m1).apply(&ground_state(&layout, noise)?)?.state;
    let ham = hamiltonian_link(&params, &layout, sites)?;
    let omega0 = params.omega0();
    let times = cfg.time_grid().samples(PI / omega0)?;
    let gens = link_generators(&layout, sites, params.conditioning)?;
    let field_axis = params.conditioning.field_axis();
    let probes = vec![
        Probe::new("n_m1", op(LocalKind::Number, sites.m1, &layout)?, Some(MeasurementBasis::Occupation { mode: sites.m1 })),
        Probe::new("n_m2", op(LocalKind::Number, sites.m2, &layout)?, Some(MeasurementBasis::Occupation { mode: sites.m2 })),
        Probe::new(
            "s_x",
            op(field_axis.kind(), sites.link, &layout)?,
            Some(MeasurementBasis::Qubits { qubits: vec![sites.link], axis: field_axis }),
        ),
        Probe::hidden("gauss_m1", gens[0].clone()),
        Probe::hidden("gauss_m2", gens[1].clone()),
    ];
    let traj = evolve(&ham, noise, &s0, &times, &record(&probes, cfg.shots != Shots::Exact))?;
    let mut out = PointResult { series: measure(&traj, &probes, cfg.shots, cfg.seed)?, ..Default::default() };
    out.warnings.extend(traj.warnings.iter().cloned());

    out.derived.insert("j".into(), json!(j));
    out.derived.insert("h_over_j".into(), json!(h / j));
    out.derived.insert("omega0_expected".into(), json!(omega0));
    out.derived.insert("gauss_drift".into(), json!(max_drift(&traj, &["gauss_m1", "gauss_m2"])?));
    let n1 = traj.series("n_m1")?;
    let n2 = traj.series("n_m2")?;
    match pearson(&n1.values, &n2.values) {
        Ok(r) => {
            out.derived.insert("pearson_n_m1_n_m2".into(), json!(r));
        }
        Err(e) => out.warnings.push(format!("correlation unavailable: {e}")),
    }
    let fit_source = out.series.iter().find(|s| s.label == "n_m2").unwrap_or(n2);
    match fit_decaying_sinusoid(fit_source, Some(FitGuess { omega0, decay_rate: 0.0 })) {
        Ok(fit) => {
            out.derived.insert("omega0_fit".into(), json!(fit.omega0));
            out.derived.insert("omega0_over_j".into(), json!(fit.omega0 / j));
            out.derived.insert("decay_rate_fit".into(), json!(fit.decay_rate));
            out.derived.insert("fit_residual_rms".into(), json!(fit.residual_rms));
        }
        Err(e) => out.warnings.push(format!("sinusoid fit failed: {e}")),
    }
    Ok(out)
}

/// `|1⟩_{m1} ⊗ Bell ⊗ |0⟩_{m2}` on the loop register: a sideband pulse
/// loads the phonon through the first link, then the links are entangled.
fn loop_initial(layout: &Arc<HilbertLayout>, noise: &NoiseModel, bell: BellState) -> Result<QuantumState> {
    let s = LoopSites::STANDARD;
    let circuit = PrepCircuit::new(vec![
        PrepStep::Bsb { qubit: s.l1, mode: s.m1 },
        PrepStep::Bell { qubits: [s.l1, s.l2], state: bell, tilde_phase: 0.0 },
    ]);
    Ok(circuit.apply(&ground_state(layout, noise)?)?.state)
}

fn loop_ab(cfg: &ExperimentConfig, noise: &NoiseModel) -> Result<PointResult> {
    let (j, h) = (cfg.j()?, cfg.h()?);
    let params = LinkParams { j, h, conditioning: cfg.physical.conditioning };
    let bell = cfg.prep.bell.unwrap_or(BellState::PhiPlus);
    let layout = register(&LatticeGraph::loop_(), cfg)?;
    let s = LoopSites::STANDARD;
    let s0 = loop_initial(&layout, noise, bell)?;
    let ham = hamiltonian_loop(&params, &layout, s)?;
    let times = cfg.time_grid().samples(PI / (2.0 * j))?;
    let gens = loop_generators(&layout, s, params.conditioning)?;
    let zz = &op(LocalKind::PauliZ, s.l1, &layout)? * &op(LocalKind::PauliZ, s.l2, &layout)?;
    let probes = vec![
        Probe::new("n_m1", op(LocalKind::Number, s.m1, &layout)?, Some(MeasurementBasis::Occupation { mode: s.m1 })),
        Probe::new("n_m2", op(LocalKind::Number, s.m2, &layout)?, Some(MeasurementBasis::Occupation { mode: s.m2 })),
        Probe::new("s_zz", zz, Some(MeasurementBasis::Qubits { qubits: vec![s.l1, s.l2], axis: Axis::Z })),
        Probe::hidden("gauss_m1", gens[0].clone()),
        Probe::hidden("gauss_m2", gens[1].clone()),
    ];
    let traj = evolve(&ham, noise, &s0, &times, &record(&probes, true))?;
    let mut out = PointResult { series: measure(&traj, &probes, cfg.shots, cfg.seed)?, ..Default::default() };
    out.warnings.extend(traj.warnings.iter().cloned());

    let phases: Vec<f64> = (0..FRINGE_POINTS).map(|k| PI * k as f64 / FRINGE_POINTS as f64).collect();
    let contrast = traj
        .states
        .iter()
        .map(|st| extract_contrast(&parity_fringe(st, [s.l1, s.l2], &phases)?))
        .collect::<Result<Vec<_>>>()?;
    let contrast = ObservableSeries::new("contrast", times.clone(), contrast)?;

    out.derived.insert("sector".into(), json!(bell_name(bell)));
    out.derived.insert("h_over_j".into(), json!(h / j));
    out.derived.insert("max_n_m2".into(), json!(traj.series("n_m2")?.max()));
    out.derived.insert("min_contrast".into(), json!(contrast.min()));
    out.derived.insert("gauss_drift".into(), json!(max_drift(&traj, &["gauss_m1", "gauss_m2"])?));
    out.series.insert(2, contrast);
    Ok(out)
}

/// Maximum of `n̄_{m2}` over the time window for every requested sector.
fn lambda_point(cfg: &ExperimentConfig) -> Result<PointResult> {
    let (j, h) = (cfg.j()?, cfg.h()?);
    let params = LinkParams { j, h, conditioning: cfg.physical.conditioning };
    let sectors = cfg.prep.sectors.clone().unwrap_or_else(|| {
        vec![BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus]
    });
    let layout = register(&LatticeGraph::loop_(), cfg)?;
    let s = LoopSites::STANDARD;
    let ham = hamiltonian_loop(&params, &layout, s)?;
    let times = cfg.time_grid().samples(PI / j)?;
    let rec = Record::observables(vec![("n_m2".into(), op(LocalKind::Number, s.m2, &layout)?)]);
    let mut out = PointResult::default();
    shots_ignored(cfg, &mut out);
    out.derived.insert("h_over_j".into(), json!(h / j));
    for bell in sectors {
        let s0 = loop_initial(&layout, &NoiseModel::off(), bell)?;
        let traj = evolve_static(&ham, &s0, &times, &rec)?;
        let series = traj.series("n_m2")?;
        out.derived.insert(format!("max_n_m2_{}", bell_name(bell)), json!(series.max()));
        if cfg.output.series {
            out.series.push(series.map(format!("n_m2_{}", bell_name(bell)), |v| v));
        }
    }
    Ok(out)
}

fn squeezed_tunnelling(cfg: &ExperimentConfig, noise: &NoiseModel) -> Result<PointResult> {
    let (j, h) = (cfg.j()?, cfg.h()?);
    let params = LinkParams { j, h, conditioning: cfg.physical.conditioning };
    let r = match &cfg.prep.squeeze_r {
        Some(a) => a.values()[0],
        None => return Err(config_err("prep.squeeze_r", "required by `squeezed_tunnelling`")),
    };
    let layout = register(&LatticeGraph::link(), cfg)?;
    let sites = LinkSites::STANDARD;
    // |↓⟩ → |+⟩ and |↑⟩ → |−⟩ under the same π/2 rotation
    let mut steps = vec![PrepStep::Carrier { qubit: sites.link, angle: PI / 2.0, phase: -PI / 2.0 }];
    if cfg.prep.odd {
        steps.insert(0, PrepStep::Bsb { qubit: sites.link, mode: sites.m1 });
    }
    steps.push(PrepStep::Squeeze { mode: sites.m1, r, theta: cfg.prep.squeeze_theta });
    let s0 = PrepCircuit::new(steps).apply(&ground_state(&layout, noise)?)?.state;
    let ham = hamiltonian_link(&params, &layout, sites)?;
    let times = cfg.time_grid().samples(PI / params.omega0())?;
    let gens = link_generators(&layout, sites, params.conditioning)?;
    let probes = vec![
        Probe::new("parity_m1", op(LocalKind::Parity, sites.m1, &layout)?, None),
        Probe::new("n_m1", op(LocalKind::Number, sites.m1, &layout)?, Some(MeasurementBasis::Occupation { mode: sites.m1 })),
        Probe::new("n_m2", op(LocalKind::Number, sites.m2, &layout)?, Some(MeasurementBasis::Occupation { mode: sites.m2 })),
        Probe::new("gauss_m1", gens[0].clone(), None),
        Probe::new("gauss_m2", gens[1].clone(), None),
    ];
    let traj = evolve(&ham, noise, &s0, &times, &record(&probes, cfg.shots != Shots::Exact))?;
    let mut out = PointResult { series: measure(&traj, &probes, cfg.shots, cfg.seed)?, ..Default::default() };
    out.warnings.extend(traj.warnings.iter().cloned());
    out.derived.insert("squeeze_r".into(), json!(r));
    out.derived.insert("initial_parity_m1".into(), json!(traj.series("parity_m1")?.values[0]));
    out.derived.insert("initial_gauss_m1".into(), json!(traj.series("gauss_m1")?.values[0]));
    out.derived.insert("gauss_drift".into(), json!(max_drift(&traj, &["gauss_m1", "gauss_m2"])?));
    Ok(out)
}

fn magnus_check(cfg: &ExperimentConfig) -> Result<PointResult> {
    let p = &cfg.physical;
    let need = |key: &str, v: Option<f64>| v.ok_or_else(|| config_err(key, "required by `magnus_check`"));
    let omega1 = need("physical.omega1", p.omega1)?;
    let omega2 = need("physical.omega2", p.omega2)?;
    let delta = need("physical.delta", p.delta.as_ref().map(|d| d.values()[0]))?;
    let ramp = p.ramp.unwrap_or(2.0 * PI * 10.0 / delta.abs());
    let layout = register(&LatticeGraph::link(), cfg)?;
    let sites = LinkSites::STANDARD;
    let sdf = SdfParams::link(omega1, omega2, delta, ramp, sites.m1, sites.m2);
    let rate = effective_tunnelling_rate(&sdf)?;
    let s0 = PrepCircuit::excitation_with_minus_link(sites.link, sites.m1).apply(&ground_state(&layout, &NoiseModel::off())?)?.state;
    let targets = cfg.time_grid().samples(PI / rate.abs())?;
    if let Some(&t) = targets.iter().find(|&&t| t > 0.0 && t < 0.75 * ramp) {
        return Err(config_err("time", format!("target {t:.3e} s is shorter than the ramp allows ({:.3e} s)", 0.75 * ramp)));
    }
    let heff = effective_hamiltonian(&sdf, &layout)?;
    let n2 = op(LocalKind::Number, sites.m2, &layout)?;
    let reference = evolve_static(&heff, &s0, &targets, &Record::observables(vec![("n_m2".into(), n2.clone())]).keep_states(true))?;
    let pulsed: Vec<QuantumState> = targets
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(s0.clone());
            }
            let sched = build_schedule(ScheduleKind::Plain, &sdf, t + 0.25 * ramp)?;
            Ok(evolve_pulsed(&sched, &s0, &[sched.total_duration()], &StepControl::default(), &Record::default())?.final_state)
        })
        .collect::<Result<_>>()?;
    let fid = pulsed.iter().zip(&reference.states).map(|(a, b)| fidelity(a, b)).collect::<Result<Vec<_>>>()?;
    let n_pulsed = pulsed.iter().map(|s| crate::hilbert::expect_real(s, &n2)).collect::<Result<Vec<_>>>()?;

    let mut out = PointResult::default();
    shots_ignored(cfg, &mut out);
    let worst = fid.iter().copied().fold(1.0, f64::min);
    out.derived.insert("delta".into(), json!(delta));
    out.derived.insert("ramp".into(), json!(ramp));
    out.derived.insert("j_eff".into(), json!(rate));
    out.derived.insert("final_fidelity".into(), json!(fid[fid.len() - 1]));
    out.derived.insert("min_fidelity".into(), json!(worst));
    out.derived.insert("max_infidelity".into(), json!(1.0 - worst));
    out.series.push(ObservableSeries::new("fidelity", targets.clone(), fid)?);
    out.series.push(ObservableSeries::new("n_m2_pulsed", targets.clone(), n_pulsed)?);
    out.series.push(reference.series("n_m2")?.map("n_m2_effective", |v| v));
    Ok(out)
}

fn resources(cfg: &ExperimentConfig) -> Result<PointResult> {
    let graph = cfg.resolve_graph()?;
    let count = resource_count(&graph);
    let mut out = PointResult::default();
    out.derived.insert("qubits".into(), json!(count.qubits));
    out.derived.insert("oscillators".into(), json!(count.oscillators));
    out.derived.insert("sites".into(), json!(graph.sites()));
    out.derived.insert("links".into(), json!(graph.links().iter().map(|l| l.label.clone()).collect::<Vec<_>>()));
    Ok(out)
}
