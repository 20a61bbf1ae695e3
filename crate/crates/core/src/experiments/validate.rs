use std::f64::consts::PI;

use serde::Serialize;

use super::config::{parse_config, ExperimentConfig, NoiseSetting, Preset, SweepAxis};
use crate::error::Error;
use crate::hilbert::{ket, SubsystemKind};
use crate::models::{build_schedule, LatticeGraph, ScheduleKind, SdfParams};
use crate::prep_measure::{squeeze_tail, SqueezeParams, SQUEEZE_TAIL_TOLERANCE};
use crate::dynamics::{pulse_step_bound, StepControl};

/// Dense Lindblad integration above this many levels is flagged as slow.
const LINDBLAD_DIM_ADVISORY: usize = 300;
/// Pulsed RK4 runs above this many steps are flagged as slow.
const PULSED_STEP_ADVISORY: f64 = 5e6;
/// Fewer samples per natural period than this is flagged.
const MIN_SAMPLES_PER_PERIOD: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    /// The config cannot run.
    Error,
    /// The config runs but the result or runtime may disappoint.
    Advisory,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Advisory => "advisory",
        };
        write!(f, "{tag}: `{}`: {}", self.key, self.message)
    }
}

struct Findings(Vec<Finding>);

impl Findings {
    fn error(&mut self, key: &str, message: impl Into<String>) {
        self.0.push(Finding { severity: Severity::Error, key: key.into(), message: message.into() });
    }

    fn advise(&mut self, key: &str, message: impl Into<String>) {
        self.0.push(Finding { severity: Severity::Advisory, key: key.into(), message: message.into() });
    }

    fn record_error(&mut self, e: Error) {
        match e {
            Error::Config { key, message } => self.error(&key, message),
            other => self.error("<config>", other.to_string()),
        }
    }
}

/// Parses and validates config text; parse failures become findings.
pub fn validate_text(text: &str) -> Vec<Finding> {
    match parse_config(text) {
        Ok(cfg) => validate(&cfg),
        Err(e) => {
            let mut f = Findings(Vec::new());
            f.record_error(e);
            f.0
        }
    }
}

fn allowed_axes(preset: Preset) -> &'static [SweepAxis] {
    match preset {
        Preset::LinkTunnelling | Preset::LinkFieldSweep | Preset::LoopAb | Preset::LambdaSweep => {
            &[SweepAxis::H, SweepAxis::HOverJ]
        }
        Preset::SqueezedTunnelling => &[SweepAxis::H, SweepAxis::HOverJ, SweepAxis::SqueezeR],
        Preset::MagnusCheck => &[SweepAxis::Delta],
        Preset::ResourceCount => &[],
    }
}

fn preset_graph(preset: Preset) -> Option<LatticeGraph> {
    match preset {
        Preset::LoopAb | Preset::LambdaSweep => Some(LatticeGraph::loop_()),
        Preset::ResourceCount => None,
        _ => Some(LatticeGraph::link()),
    }
}

/// Checks a config without running it. An empty list means runnable;
/// advisories do not block a run.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Finding> {
    let mut f = Findings(Vec::new());
    let p = cfg.preset;
    let axes = cfg.list_axes();
    if axes.len() > 1 {
        let names: Vec<&str> = axes.iter().map(|a| a.name()).collect();
        f.error("physical", format!("at most one list-valued axis is allowed, found {}", names.join(", ")));
    }
    for a in &axes {
        if !allowed_axes(p).contains(a) {
            f.error(a.name(), format!("`{}` cannot sweep `{}`", p.name(), a.name()));
        }
        if cfg.axis_values(*a).is_empty() {
            f.error(a.name(), "empty list");
        }
    }
    let numbers = |axis: SweepAxis| cfg.axis_values(axis);
    for axis in [SweepAxis::H, SweepAxis::HOverJ, SweepAxis::Delta, SweepAxis::SqueezeR] {
        if numbers(axis).iter().any(|v| !v.is_finite()) {
            f.error(axis.name(), "values must be finite");
        }
    }
    if cfg.physical.h.is_some() && cfg.physical.h_over_j.is_some() {
        f.error("physical.h", "give either `h` or `h_over_j`, not both");
    }

    if matches!(p, Preset::MagnusCheck | Preset::ResourceCount) {
        if p == Preset::ResourceCount {
            if let Err(e) = cfg.resolve_graph() {
                f.record_error(e);
            }
        }
    } else if let Err(e) = cfg.j() {
        f.record_error(e);
    }
    if p == Preset::MagnusCheck {
        check_magnus(cfg, &mut f);
    }
    if p == Preset::SqueezedTunnelling {
        check_squeezing(cfg, &mut f);
    }
    if p == Preset::LambdaSweep && cfg.prep.sectors.as_ref().is_some_and(Vec::is_empty) {
        f.error("prep.sectors", "empty list");
    }

    if let Some(graph) = preset_graph(p) {
        for (key, &c) in &cfg.cutoffs {
            if key != "default" && !graph.sites().contains(key) {
                f.error(&format!("cutoffs.{key}"), format!("not a site of `{}` (sites: {})", p.name(), graph.sites().join(", ")));
            }
            if c == 0 {
                f.error(&format!("cutoffs.{key}"), "cutoff must be ≥ 1");
            }
        }
        check_noise(cfg, &graph, &mut f);
        if p != Preset::MagnusCheck {
            check_time(cfg, &mut f);
        }
    }
    f.0
}

fn check_time(cfg: &ExperimentConfig, f: &mut Findings) {
    let grid = cfg.time_grid();
    if let Err(e) = grid.samples(1.0) {
        f.record_error(e);
        return;
    }
    if let (Some(periods), false) = (grid.periods, cfg.preset == Preset::LambdaSweep) {
        let per_period = (grid.points - 1) as f64 / periods;
        if per_period < MIN_SAMPLES_PER_PERIOD {
            f.advise("time.points", format!("{per_period:.1} samples per period undersample the oscillation"));
        }
    }
}

fn check_noise(cfg: &ExperimentConfig, graph: &LatticeGraph, f: &mut Findings) {
    let noise = cfg.noise.model();
    if let Err(e) = noise.validate() {
        f.record_error(e);
        return;
    }
    let layout = match graph.layout(1) {
        Ok(l) => l,
        Err(e) => return f.record_error(e),
    };
    let sections = [
        ("heating_rate", &noise.heating_rate, SubsystemKind::Oscillator),
        ("motional_coherence", &noise.motional_coherence, SubsystemKind::Oscillator),
        ("initial_nbar", &noise.initial_nbar, SubsystemKind::Oscillator),
        ("qubit_t2", &noise.qubit_t2, SubsystemKind::Qubit),
    ];
    for (section, map, kind) in sections {
        for label in map.keys() {
            let ok = layout.index_of(label).is_some_and(|i| layout.subsystems()[i].kind == kind);
            if !ok {
                f.error(&format!("noise.{section}.{label}"), format!("`{label}` is not a {kind:?} of `{}`", cfg.preset.name()));
            }
        }
    }
    if matches!(cfg.preset, Preset::LambdaSweep | Preset::MagnusCheck) && cfg.noise != NoiseSetting::Off {
        f.error("noise", format!("`{}` runs closed dynamics only", cfg.preset.name()));
        return;
    }
    if !noise.is_noiseless() {
        let dim: usize = graph.sites().iter().map(|s| cfg.cutoff(s) + 1).product::<usize>() << graph.links().len();
        if dim > LINDBLAD_DIM_ADVISORY {
            f.advise(
                "noise",
                format!("dense Lindblad integration on {dim} levels stores {dim}×{dim} matrices and will be slow"),
            );
        }
    }
}

fn check_squeezing(cfg: &ExperimentConfig, f: &mut Findings) {
    let Some(r_axis) = &cfg.prep.squeeze_r else {
        return f.error("prep.squeeze_r", "required by `squeezed_tunnelling`");
    };
    let cutoff = cfg.cutoff("m1");
    let fock = usize::from(cfg.prep.odd);
    if cutoff < fock {
        return f.error("cutoffs.m1", "cutoff too small for the initial phonon");
    }
    let v = ket::fock(fock, cutoff + 1);
    let rho = &v * v.adjoint();
    for r in r_axis.values() {
        let params = match SqueezeParams::new(r, cfg.prep.squeeze_theta) {
            Ok(p) => p,
            Err(e) => return f.error("prep.squeeze_r", e.to_string()),
        };
        match squeeze_tail(&rho, &params) {
            Ok(tail) if tail > SQUEEZE_TAIL_TOLERANCE => f.error(
                "cutoffs.m1",
                format!("cutoff {cutoff} truncates {tail:.2e} of the squeezed state at r = {r} (limit {SQUEEZE_TAIL_TOLERANCE:.0e})"),
            ),
            Ok(_) => {}
            Err(e) => f.error("prep.squeeze_r", e.to_string()),
        }
    }
}

fn check_magnus(cfg: &ExperimentConfig, f: &mut Findings) {
    let p = &cfg.physical;
    let (Some(o1), Some(o2), Some(deltas)) = (p.omega1, p.omega2, p.delta.as_ref()) else {
        for (key, present) in [("physical.omega1", p.omega1.is_some()), ("physical.omega2", p.omega2.is_some()), ("physical.delta", p.delta.is_some())] {
            if !present {
                f.error(key, "required by `magnus_check`");
            }
        }
        return;
    };
    let grid = cfg.time_grid();
    for delta in deltas.values() {
        let ramp = p.ramp.unwrap_or(2.0 * PI * 10.0 / delta.abs());
        let sdf = SdfParams::link(o1, o2, delta, ramp, 0, 2);
        if let Err(e) = sdf.validate() {
            return f.error("physical", e.to_string());
        }
        let rate = o1 * o2 / (2.0 * delta);
        if rate == 0.0 {
            return f.error("physical.omega1", "the effective tunnelling rate vanishes");
        }
        let targets = match grid.samples(PI / rate.abs()) {
            Ok(t) => t,
            Err(e) => return f.record_error(e),
        };
        let longest = targets[targets.len() - 1];
        if longest < 0.75 * ramp {
            return f.error("time", "targets are shorter than the ramp allows");
        }
        if let Ok(sched) = build_schedule(ScheduleKind::Plain, &sdf, longest + 0.25 * ramp) {
            let steps = sched.total_duration() / pulse_step_bound(&sched, &StepControl::default());
            if steps > PULSED_STEP_ADVISORY {
                f.advise("physical.delta", format!("about {steps:.1e} RK4 steps per target at Δ = {delta:.3e} rad/s"));
            }
        }
        if (delta.abs() / o1.max(o2)) < 5.0 {
            f.advise("physical.delta", "|Δ|/Ω below 5: the leading-order effective model is not expected to hold");
        }
    }
}
