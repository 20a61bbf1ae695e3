//! Acceptance suite: twelve end-to-end criteria, each with a tolerance and a
//! wall-clock budget. Runs without the libtest harness so that every
//! criterion prints exactly one line whether it passes or not.

use std::f64::consts::{FRAC_2_PI, PI};
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use z2sim::analysis::{extract_contrast, pearson, rmse, wigner, PhaseSpaceGrid};
use z2sim::dynamics::{evolve_lindblad, evolve_pulsed, evolve_static, Dynamics, NoiseModel, Record, StepControl};
use z2sim::experiments::{self, run_point, Axis1d, ExperimentConfig, NoiseSetting, Preset, Shots, TimeGrid};
use z2sim::hilbert::{build_layout, embed_kind, fidelity, ket, LocalKind, QuantumState, SubsystemSpec};
use z2sim::models::{
    build_schedule, effective_tunnelling_rate, gauss_generators, hamiltonian_lattice, hamiltonian_link,
    hamiltonian_loop, LatticeGraph, LinkParams, LinkSites, LoopSites, ScheduleKind, SdfParams,
};
use z2sim::prep_measure::{parity_fringe, squeeze, BellState, PrepCircuit, PrepStep, SqueezeParams};

type Check = z2sim::Result<(bool, String)>;

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

const CRITERIA: [Criterion; 12] = [
    Criterion { id: 1, name: "link closed-form dynamics", budget: Duration::from_secs(1), run: link_closed_form },
    Criterion { id: 2, name: "tunnelling frequency fit", budget: Duration::from_secs(5), run: omega0_fit },
    Criterion { id: 3, name: "Gauss law conservation", budget: Duration::from_secs(10), run: gauss_law },
    Criterion { id: 4, name: "loop Aharonov-Bohm interference", budget: Duration::from_secs(2), run: loop_interference },
    Criterion { id: 5, name: "Lambda-system sector sweep", budget: Duration::from_secs(60), run: lambda_sweep },
    Criterion { id: 6, name: "pulsed vs effective Hamiltonian", budget: Duration::from_secs(120), run: magnus },
    Criterion { id: 7, name: "parity contrast law", budget: Duration::from_secs(10), run: contrast_law },
    Criterion { id: 8, name: "noise model limits", budget: Duration::from_secs(60), run: noise_limits },
    Criterion { id: 9, name: "squeezed matter parity", budget: Duration::from_secs(30), run: squeezed_parity },
    Criterion { id: 10, name: "Wigner function sanity", budget: Duration::from_secs(30), run: wigner_sanity },
    Criterion { id: 11, name: "correlation and rmse metrics", budget: Duration::from_secs(1), run: metrics },
    Criterion { id: 12, name: "seeded determinism", budget: Duration::MAX, run: determinism },
];

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for c in &CRITERIA {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= c.budget;
        let pass = ok && in_time;
        let budget = if c.budget == Duration::MAX { "relative".to_string() } else { format!("{:.0} s", c.budget.as_secs_f64()) };
        let late = if in_time { "" } else { " OVER BUDGET" };
        println!(
            "criterion {:>2} {:<34} {} ({:.2} s / {budget}{late}) {detail}",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !pass {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}

fn max_abs_diff(a: &[f64], b: impl IntoIterator<Item = f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn link_config(h_over_j: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset(Preset::LinkTunnelling);
    cfg.physical.h_over_j = Some(Axis1d::Scalar(h_over_j));
    cfg
}

fn link_closed_form() -> Check {
    let mut worst: f64 = 0.0;
    for g in [0.0, 0.5, 1.0, 1.57] {
        let cfg = link_config(g);
        let res = run_point(&cfg)?;
        let j = cfg.physical.j.unwrap();
        let w = j * (1.0 + g * g).sqrt();
        let n2 = res.series("n_m2").unwrap();
        let amp = |t: f64| (j / w).powi(2) * (w * t).sin().powi(2);
        worst = worst
            .max(max_abs_diff(&res.series("n_m1").unwrap().values, n2.times.iter().map(|&t| 1.0 - amp(t))))
            .max(max_abs_diff(&n2.values, n2.times.iter().map(|&t| amp(t))))
            .max(max_abs_diff(&res.series("s_x").unwrap().values, n2.times.iter().map(|&t| -1.0 + 2.0 * amp(t))));
        let span = n2.times.last().unwrap() * w / PI;
        if (span - 3.0).abs() > 1e-9 {
            return Ok((false, format!("grid spans {span} periods at h/J = {g}")));
        }
    }
    Ok((worst < 1e-7, format!("max deviation {worst:.2e} (tol 1e-7)")))
}

fn omega0_fit() -> Check {
    let reported = [1.0004f64, 1.624, 3.465];
    let mut worst_rel: f64 = 0.0;
    let mut worst_reported: f64 = 0.0;
    for (g, r) in [0.02f64, 0.79, 1.57].into_iter().zip(reported) {
        let mut cfg = ExperimentConfig::preset(Preset::LinkFieldSweep);
        cfg.physical.h_over_j = Some(Axis1d::Scalar(g));
        let fit = run_point(&cfg)?
            .derived_f64("omega0_over_j")
            .ok_or_else(|| z2sim::Error::Fit(format!("no fit at h/J = {g}")))?;
        worst_rel = worst_rel.max((fit / (1.0 + g * g).sqrt() - 1.0).abs());
        worst_reported = worst_reported.max((fit / r.sqrt() - 1.0).abs());
    }
    Ok((
        worst_rel < 1e-4 && worst_reported < 1e-4,
        format!("relative error {worst_rel:.2e} vs relation, {worst_reported:.2e} vs tabulated (tol 1e-4)"),
    ))
}

fn gauss_law() -> Check {
    let graphs = [
        ("link", LatticeGraph::link()),
        ("loop", LatticeGraph::loop_()),
        ("triangle", LatticeGraph::triangle()),
        ("tetrahedron", LatticeGraph::tetrahedron()),
    ];
    let (j, h) = (1.0, 0.7);
    let mut comm: f64 = 0.0;
    for (_, graph) in &graphs {
        let layout = graph.layout(3)?;
        let ham = hamiltonian_lattice(graph, j, h, &layout)?;
        for g in gauss_generators(graph, &layout)? {
            comm = comm.max(ham.commutator(&g).max_abs());
        }
    }
    // the exact propagator diagonalizes every boson-number block; at cutoff 3
    // the tetrahedron's largest block is too big for the budget
    let mut drift: f64 = 0.0;
    for (name, graph) in &graphs {
        let cutoff = if *name == "tetrahedron" { 1 } else { 3 };
        let layout = graph.layout(cutoff)?;
        let ham = hamiltonian_lattice(graph, j, h, &layout)?;
        let gens = gauss_generators(graph, &layout)?;
        // one boson on the first site, every link in |+⟩: a superposition of sectors
        let factors: Vec<_> = layout
            .subsystems()
            .iter()
            .enumerate()
            .map(|(i, s)| match s.kind {
                z2sim::hilbert::SubsystemKind::Qubit => ket::plus(),
                z2sim::hilbert::SubsystemKind::Oscillator => ket::fock(usize::from(i == 0), s.cutoff() + 1),
            })
            .collect();
        let s0 = QuantumState::product(layout.clone(), &factors)?;
        let period = PI / j.hypot(h);
        let times: Vec<f64> = (0..=100).map(|k| 5.0 * period * k as f64 / 100.0).collect();
        let rec = Record::observables(gens.iter().enumerate().map(|(i, g)| (format!("g{i}"), g.clone())).collect());
        let traj = evolve_static(&ham, &s0, &times, &rec)?;
        for s in traj.series.values() {
            drift = drift.max(s.drift());
        }
    }
    Ok((comm < 1e-12 && drift < 1e-9, format!("max |[H, G]| {comm:.1e} (tol 1e-12), drift {drift:.1e} (tol 1e-9)")))
}

fn loop_config(bell: BellState) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset(Preset::LoopAb);
    cfg.prep.bell = Some(bell);
    cfg
}

fn loop_interference() -> Check {
    let cfg = loop_config(BellState::PhiPlus);
    let j = cfg.physical.j.unwrap();
    let phi = run_point(&cfg)?;
    let n2 = phi.series("n_m2").unwrap();
    let dev = max_abs_diff(&n2.values, n2.times.iter().map(|&t| (2.0 * j * t).sin().powi(2)));
    let amplitude = n2.max() - n2.min();
    let psi = run_point(&loop_config(BellState::PsiPlus))?.derived_f64("max_n_m2").unwrap();
    Ok((
        dev < 1e-7 && (amplitude - 1.0).abs() < 1e-7 && psi < 1e-10,
        format!("Φ+ deviation {dev:.1e}, swing {amplitude:.9}; Ψ+ max n_m2 {psi:.1e}"),
    ))
}

fn lambda_sweep() -> Check {
    let cfg = ExperimentConfig::preset(Preset::LambdaSweep);
    let exec = experiments::execute(&cfg, None)?;
    let col = |key: &str| -> Vec<(f64, f64)> {
        exec.points.iter().map(|(v, _, r)| (v.unwrap(), r.derived_f64(key).unwrap())).collect()
    };
    let psi_minus = col("max_n_m2_psi_minus").iter().map(|p| p.1).fold(0.0, f64::max);
    let psi_plus = col("max_n_m2_psi_plus");
    let in_range: Vec<&(f64, f64)> = psi_plus.iter().filter(|p| p.0 <= 4.0).collect();
    let peak = in_range.iter().copied().fold((0.0, f64::NEG_INFINITY), |a, &b| if b.1 > a.1 { b } else { a });
    let far: f64 = ["phi_plus", "phi_minus", "psi_plus", "psi_minus"]
        .iter()
        .map(|s| col(&format!("max_n_m2_{s}")).iter().find(|p| p.0 == 20.0).unwrap().1)
        .fold(0.0, f64::max);
    Ok((
        psi_minus < 1e-10 && (peak.0 - 1.0).abs() <= 0.05 && far < 0.02,
        format!("Ψ- max {psi_minus:.1e}; Ψ+ peak at h/J = {:.2} ({:.3}); max at h/J = 20: {far:.4}", peak.0, peak.1),
    ))
}

/// Infidelity between the pulsed sequence and the link Hamiltonian with the
/// effective rate, at `J t = π/2`.
fn pulsed_infidelity(delta: f64) -> z2sim::Result<f64> {
    let omega = 2.0 * PI * 1.2e3;
    let ramp = 2.0 * PI * 10.0 / delta.abs();
    let layout = LatticeGraph::link().layout(4)?;
    let sites = LinkSites::STANDARD;
    let sdf = SdfParams::link(omega, omega, delta, ramp, sites.m1, sites.m2);
    let j = effective_tunnelling_rate(&sdf)?.abs();
    let oracle_j = omega * omega / (2.0 * delta.abs());
    if (j / oracle_j - 1.0).abs() > 1e-12 {
        return Err(z2sim::Error::Precondition(format!("effective rate {j} differs from {oracle_j}")));
    }
    let s0 = QuantumState::basis(layout.clone(), &[0, 1, 0])?;
    let s0 = PrepCircuit::excitation_with_minus_link(sites.link, sites.m1).apply(&s0)?.state;
    let t = PI / (2.0 * j);
    let sched = build_schedule(ScheduleKind::Plain, &sdf, t + 0.25 * ramp)?;
    let pulsed = evolve_pulsed(&sched, &s0, &[sched.total_duration()], &StepControl::default(), &Record::default())?;
    let ham = hamiltonian_link(&LinkParams::new(j, 0.0), &layout, sites)?;
    let reference = evolve_static(&ham, &s0, &[t], &Record::default())?;
    Ok(1.0 - fidelity(&pulsed.final_state, &reference.final_state)?)
}

fn magnus() -> Check {
    let delta = 2.0 * PI * 25e3;
    let base = pulsed_infidelity(delta)?;
    let doubled = pulsed_infidelity(2.0 * delta)?;
    Ok((
        1.0 - base >= 0.999 && doubled < base,
        format!("fidelity {:.6} at |Δ|/Ω = {:.1}; infidelity {base:.2e} -> {doubled:.2e} when doubled", 1.0 - base, 25.0 / 1.2),
    ))
}

fn contrast_law() -> Check {
    let j = PI * 0.35e3;
    let layout = LatticeGraph::loop_().layout(4)?;
    let s = LoopSites::STANDARD;
    let ham = hamiltonian_loop(&LinkParams::new(j, 0.0), &layout, s)?;
    let mut digits = vec![0; 4];
    digits[s.l1] = 1;
    digits[s.l2] = 1;
    let s0 = PrepCircuit::new(vec![
        PrepStep::Bsb { qubit: s.l1, mode: s.m1 },
        PrepStep::Bell { qubits: [s.l1, s.l2], state: BellState::PhiPlus, tilde_phase: 0.0 },
    ])
    .apply(&QuantumState::basis(layout.clone(), &digits)?)?
    .state;
    let phases: Vec<f64> = (0..16).map(|k| PI * k as f64 / 16.0).collect();
    let contrast = |t: f64| -> z2sim::Result<f64> {
        let st = evolve_static(&ham, &s0, &[t], &Record::default())?.final_state;
        extract_contrast(&parity_fringe(&st, [s.l1, s.l2], &phases)?)
    };
    let mut dev: f64 = 0.0;
    for k in 0..20 {
        let t = k as f64 * PI / (2.0 * j) / 19.0;
        dev = dev.max((contrast(t)? - (4.0 * j * t).cos().abs()).abs());
    }
    // golden-section search for the contrast minimum inside the first half-period
    let (mut a, mut b) = (0.05 * PI / (4.0 * j), 0.45 * PI / (2.0 * j));
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while (b - a) * 4.0 * j > 1e-9 {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if contrast(c)? < contrast(d)? {
            b = d;
        } else {
            a = c;
        }
    }
    let crossing = 2.0 * j * (a + b);
    let err = (crossing - PI / 2.0).abs();
    Ok((dev < 1e-6 && err < 1e-6, format!("max deviation {dev:.1e}, zero at 4Jt = π/2 {:+.1e}", crossing - PI / 2.0)))
}

fn noise_limits() -> Check {
    // all rates zero
    let cfg = link_config(0.5);
    let layout = LatticeGraph::link().layout(4)?;
    let sites = LinkSites::STANDARD;
    let s0 = PrepCircuit::excitation_with_minus_link(sites.link, sites.m1)
        .apply(&QuantumState::basis(layout.clone(), &[0, 1, 0])?)?
        .state;
    let j = cfg.physical.j.unwrap();
    let ham = hamiltonian_link(&LinkParams::new(j, 0.5 * j), &layout, sites)?;
    let zero = NoiseModel::off().with_heating("m1", 0.0).with_heating("m2", 0.0).with_coherence("m1", f64::INFINITY);
    let times: Vec<f64> = (0..=60).map(|k| k as f64 * 1e-5).collect();
    let rec = Record::observables(vec![
        ("n1".into(), embed_kind(LocalKind::Number, sites.m1, &layout)?),
        ("n2".into(), embed_kind(LocalKind::Number, sites.m2, &layout)?),
        ("sx".into(), embed_kind(LocalKind::PauliX, sites.link, &layout)?),
    ]);
    let open = evolve_lindblad(Dynamics::Static(&ham), &zero, &s0.to_mixed(), &times, &StepControl::default(), &rec)?;
    let closed = evolve_static(&ham, &s0, &times, &rec)?;
    let mut closed_diff: f64 = 0.0;
    for (label, s) in &closed.series {
        closed_diff = closed_diff.max(max_abs_diff(&s.values, open.series(label)?.values.iter().copied()));
    }

    // heating an idle oscillator
    let idle = build_layout(vec![SubsystemSpec::oscillator("m", 8)])?;
    let vac = QuantumState::basis(idle.clone(), &[0])?;
    let heat = NoiseModel::off().with_heating("m", 300.0);
    let rec = Record::observables(vec![("n".into(), embed_kind(LocalKind::Number, 0, &idle)?)]);
    let zero_h = z2sim::hilbert::Operator::zeros(&idle);
    let n_1ms = *evolve_lindblad(Dynamics::Static(&zero_h), &heat, &vac, &[1e-3], &StepControl::default(), &rec)?
        .series("n")?
        .values
        .last()
        .unwrap();

    // calibrated noise on the link preset: peaks fall period by period
    let mut noisy = ExperimentConfig::preset(Preset::LinkTunnelling);
    noisy.noise = NoiseSetting::LinkCalibrated;
    noisy.shots = Shots::Exact;
    noisy.time = Some(TimeGrid::periods(4.0, 161));
    let res = run_point(&noisy)?;
    let n2 = res.series("n_m2").unwrap();
    let period = PI / noisy.j()?;
    // half the peak-to-trough swing inside each period; heating lifts the
    // baseline, so raw maxima are not a measure of the oscillation
    let peaks: Vec<f64> = (0..4)
        .map(|k| {
            let window: Vec<f64> = n2
                .times
                .iter()
                .zip(&n2.values)
                .filter(|(t, _)| **t >= k as f64 * period - 1e-12 && **t <= (k + 1) as f64 * period + 1e-12)
                .map(|(_, v)| *v)
                .collect();
            let hi = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = window.iter().copied().fold(f64::INFINITY, f64::min);
            (hi - lo) / 2.0
        })
        .collect();
    let decreasing = peaks.windows(2).all(|w| w[1] < w[0]);
    let heat_ok = (n_1ms / 0.30 - 1.0).abs() <= 0.01;
    Ok((
        closed_diff < 1e-8 && heat_ok && decreasing,
        format!(
            "zero-rate diff {closed_diff:.1e}; <n>(1 ms) = {n_1ms:.4}; peaks {}",
            peaks.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>().join(" > ")
        ),
    ))
}

fn squeezed_parity() -> Check {
    let mut parity_err: f64 = 0.0;
    let mut drift: f64 = 0.0;
    for (odd, expected) in [(false, 1.0), (true, -1.0)] {
        let mut cfg = ExperimentConfig::preset(Preset::SqueezedTunnelling);
        cfg.prep.odd = odd;
        if cfg.cutoff("m1") != 25 {
            return Ok((false, format!("preset cutoff is {}", cfg.cutoff("m1"))));
        }
        let res = run_point(&cfg)?;
        parity_err = parity_err.max((res.derived_f64("initial_parity_m1").unwrap() - expected).abs());
        drift = drift.max(res.derived_f64("gauss_drift").unwrap());
    }
    Ok((parity_err < 1e-6 && drift < 1e-6, format!("parity error {parity_err:.1e}, Gauss drift {drift:.1e} (tol 1e-6)")))
}

fn wigner_sanity() -> Check {
    let layout = build_layout(vec![SubsystemSpec::oscillator("m", 25)])?;
    let fock = |n: usize| QuantumState::basis(layout.clone(), &[n]);
    let origin = PhaseSpaceGrid { re: vec![0.0], im: vec![0.0] };
    let w0 = wigner(&fock(0)?, 0, &origin)?.values[(0, 0)];
    let w1 = wigner(&fock(1)?, 0, &origin)?.values[(0, 0)];
    let origin_err = (w0 - FRAC_2_PI).abs().max((w1 + FRAC_2_PI).abs());
    let grid = PhaseSpaceGrid::square(5.0, 81);
    let squeezed = squeeze(&fock(1)?, 0, &SqueezeParams::new(0.96, 0.0)?)?;
    let mut worst: f64 = 0.0;
    for st in [fock(0)?, fock(1)?, squeezed] {
        worst = worst.max((wigner(&st, 0, &grid)?.integral() - 1.0).abs());
    }
    Ok((origin_err < 1e-9 && worst <= 0.05, format!("W(0) error {origin_err:.1e}; worst integral error {worst:.3}")))
}

fn metrics() -> Check {
    let res = run_point(&link_config(0.0))?;
    let r = pearson(&res.series("n_m1").unwrap().values, &res.series("n_m2").unwrap().values)?;
    let a: Vec<f64> = (0..50).map(|k| (k as f64 * 0.37).sin()).collect();
    let b: Vec<f64> = a.iter().map(|x| x + 0.2).collect();
    let e = rmse(&a, &b, true)?;
    // exact up to rounding of the shifted inputs
    let ok = (r + 1.0).abs() <= 1e-9 && (e - 0.1).abs() <= 4.0 * f64::EPSILON;
    Ok((ok, format!("pearson {r:.12}; rescaled rmse {e:.17}")))
}

fn dir_files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "csv") {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Check {
    let mut cfg = ExperimentConfig::preset(Preset::LinkFieldSweep);
    cfg.shots = Shots::Count(500);
    cfg.seed = 20240611;
    let tmp = tempfile::tempdir().map_err(|e| z2sim::Error::Io(e.to_string()))?;
    let (base, a, b) = (tmp.path().join("base"), tmp.path().join("a"), tmp.path().join("b"));
    let start = Instant::now();
    experiments::sweep(&ExperimentConfig { seed: cfg.seed + 1, ..cfg.clone() }, &base, None)?;
    let single = start.elapsed();
    let start = Instant::now();
    experiments::sweep(&cfg, &a, None)?;
    experiments::sweep(&cfg, &b, None)?;
    let pair = start.elapsed();
    let (fa, fb) = (dir_files(&a), dir_files(&b));
    let identical = !fa.is_empty() && fa == fb;
    let in_time = pair < single * 2;
    Ok((
        identical && in_time,
        format!(
            "{} CSVs byte-identical: {identical}; two runs {:.2} s vs preset {:.2} s",
            fa.len(),
            pair.as_secs_f64(),
            single.as_secs_f64()
        ),
    ))
}
