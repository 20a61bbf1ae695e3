//! Preset experiments, parameter sweeps and their on-disk artifacts.
//!
//! A run writes one CSV per observable (`time_s,<label>[,stderr]`) and a
//! `manifest.json` listing the files, the echoed config and the derived
//! quantities. Sweeps put each point in `point_NNN/` and add `summary.csv`
//! with every numeric derived value against the sweep axis.

mod config;
mod output;
mod presets;
mod validate;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

pub use config::{
    link_calibrated_noise, load_config, parse_config, Axis1d, ExperimentConfig, NoiseSetting, Output, Physical,
    Prep, Preset, Shots, SweepAxis, TimeGrid,
};
pub use output::{read_series, series_csv, summary_csv, write_atomic, write_series, PointRecord, RunManifest};
pub use presets::{bell_name, run_point, PointResult};
pub use validate::{validate, validate_text, Finding, Severity};

use crate::error::{Error, Result};
use crate::prep_measure::derive_seed;

/// Results of every point of a run, in axis order.
#[derive(Clone, Debug)]
pub struct Execution {
    pub axis: Option<SweepAxis>,
    pub points: Vec<(Option<f64>, u64, PointResult)>,
}

fn first_error(findings: &[Finding]) -> Result<()> {
    match findings.iter().find(|f| f.severity == Severity::Error) {
        Some(f) => Err(Error::Config { key: f.key.clone(), message: f.message.clone() }),
        None => Ok(()),
    }
}

fn pool(workers: Option<usize>) -> Result<Option<rayon::ThreadPool>> {
    match workers {
        Some(0) => Err(Error::Config { key: "--workers".into(), message: "must be ≥ 1".into() }),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(Some)
            .map_err(|e| Error::Precondition(e.to_string())),
        None => Ok(None),
    }
}

/// Evaluates a config in memory. A single list-valued axis is swept, each
/// point getting a seed derived from the config seed and its index.
pub fn execute(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<Execution> {
    first_error(&validate(cfg))?;
    let axes = cfg.list_axes();
    let Some(&axis) = axes.first() else {
        return Ok(Execution { axis: None, points: vec![(None, cfg.seed, run_point(cfg)?)] });
    };
    let values = cfg.axis_values(axis);
    let job = || {
        values
            .par_iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut point = cfg.at(axis, v);
                point.seed = derive_seed(cfg.seed, i as u64);
                let res = run_point(&point).map_err(|e| match e {
                    Error::Integration(m) => Error::Integration(format!("{} = {v}: {m}", axis.name())),
                    other => other,
                })?;
                Ok((Some(v), point.seed, res))
            })
            .collect::<Result<Vec<_>>>()
    };
    let points = match pool(workers)? {
        Some(p) => p.install(job)?,
        None => job()?,
    };
    Ok(Execution { axis: Some(axis), points })
}

/// Runs a config and writes its artifacts under `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path, workers: Option<usize>) -> Result<RunManifest> {
    write_execution("run", cfg, out, workers)
}

/// Like [`run`], but requires exactly one list-valued axis.
pub fn sweep(cfg: &ExperimentConfig, out: &Path, workers: Option<usize>) -> Result<RunManifest> {
    if cfg.list_axes().len() != 1 {
        return Err(Error::Config {
            key: "physical".into(),
            message: format!("sweep needs exactly one list-valued axis, found {}", cfg.list_axes().len()),
        });
    }
    write_execution("sweep", cfg, out, workers)
}

fn write_execution(command: &str, cfg: &ExperimentConfig, out: &Path, workers: Option<usize>) -> Result<RunManifest> {
    let start = Instant::now();
    let exec = execute(cfg, workers)?;
    let mut records = Vec::new();
    for (i, (value, seed, res)) in exec.points.iter().enumerate() {
        let prefix = if exec.axis.is_some() { format!("point_{i:03}/") } else { String::new() };
        let mut files = Vec::new();
        if cfg.output.series {
            for s in &res.series {
                let rel = format!("{prefix}{}.csv", s.label);
                write_series(&out.join(&rel), s)?;
                files.push(rel);
            }
        }
        records.push(PointRecord {
            index: i,
            value: *value,
            seed: *seed,
            files,
            derived: res.derived.clone(),
            warnings: res.warnings.clone(),
        });
    }
    let summary_file = match exec.axis {
        Some(axis) => {
            let values: Vec<f64> = exec.points.iter().filter_map(|p| p.0).collect();
            let columns = numeric_columns(&exec.points.iter().map(|p| &p.2).collect::<Vec<_>>());
            write_atomic(&out.join("summary.csv"), &summary_csv(axis.name(), &values, &columns)?)?;
            Some("summary.csv".to_string())
        }
        None => None,
    };
    let manifest = RunManifest {
        artifact: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config: cfg.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        sweep_axis: exec.axis.map(|a| a.name().to_string()),
        summary_file,
        points: records,
    };
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    write_atomic(&out.join(RunManifest::FILE_NAME), &json)?;
    Ok(manifest)
}

/// Derived keys that are numeric at every point, in key order.
fn numeric_columns(points: &[&PointResult]) -> Vec<(String, Vec<f64>)> {
    let Some(first) = points.first() else { return Vec::new() };
    first
        .derived
        .keys()
        .filter_map(|k| {
            let col: Option<Vec<f64>> = points.iter().map(|p| p.derived_f64(k)).collect();
            col.map(|c| (k.clone(), c))
        })
        .collect()
}
