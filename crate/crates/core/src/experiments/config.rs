use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dynamics::NoiseModel;
use crate::error::{Error, Result};
use crate::models::{Conditioning, LatticeGraph};
use crate::prep_measure::BellState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    LinkTunnelling,
    LinkFieldSweep,
    LoopAb,
    LambdaSweep,
    SqueezedTunnelling,
    MagnusCheck,
    ResourceCount,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::LinkTunnelling,
        Preset::LinkFieldSweep,
        Preset::LoopAb,
        Preset::LambdaSweep,
        Preset::SqueezedTunnelling,
        Preset::MagnusCheck,
        Preset::ResourceCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::LinkTunnelling => "link_tunnelling",
            Preset::LinkFieldSweep => "link_field_sweep",
            Preset::LoopAb => "loop_ab",
            Preset::LambdaSweep => "lambda_sweep",
            Preset::SqueezedTunnelling => "squeezed_tunnelling",
            Preset::MagnusCheck => "magnus_check",
            Preset::ResourceCount => "resource_count",
        }
    }

    /// Oscillator cutoff used when the config gives none.
    pub fn default_cutoff(self) -> usize {
        match self {
            Preset::LambdaSweep => 1,
            Preset::SqueezedTunnelling => 25,
            _ => 4,
        }
    }
}

/// A scalar parameter or a list of values to sweep over.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis1d {
    Scalar(f64),
    List(Vec<f64>),
}

impl Axis1d {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis1d::Scalar(v) => vec![*v],
            Axis1d::List(v) => v.clone(),
        }
    }

    pub fn is_list(&self) -> bool {
        matches!(self, Axis1d::List(_))
    }
}

/// Effective-model parameters. Rates are angular frequencies in rad/s,
/// durations in seconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physical {
    /// Tunnelling rate J.
    pub j: Option<f64>,
    /// Absolute field h; excludes `h_over_j`.
    pub h: Option<Axis1d>,
    pub h_over_j: Option<Axis1d>,
    /// SDF detuning Δ.
    pub delta: Option<Axis1d>,
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    /// SDF ramp t_R.
    pub ramp: Option<f64>,
    #[serde(default)]
    pub conditioning: Conditioning,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default)]
    pub start: f64,
    pub stop: Option<f64>,
    /// Stop expressed in natural periods of the preset.
    pub periods: Option<f64>,
    pub points: usize,
}

impl TimeGrid {
    pub fn periods(periods: f64, points: usize) -> Self {
        Self { start: 0.0, stop: None, periods: Some(periods), points }
    }

    /// Evenly spaced samples, with `period` resolving a `periods` stop.
    pub fn samples(&self, period: f64) -> Result<Vec<f64>> {
        let stop = match (self.stop, self.periods) {
            (Some(s), None) => s,
            (None, Some(p)) => self.start + p * period,
            _ => return Err(config_err("time", "give exactly one of `stop` and `periods`")),
        };
        if !(self.start.is_finite() && stop.is_finite()) || stop <= self.start || self.start < 0.0 {
            return Err(config_err("time", format!("need 0 ≤ start < stop, got [{}, {stop}]", self.start)));
        }
        if self.points < 2 {
            return Err(config_err("time.points", "need at least 2 samples"));
        }
        let n = self.points - 1;
        Ok((0..=n).map(|k| self.start + (stop - self.start) * k as f64 / n as f64).collect())
    }
}

/// `"exact"` or a positive number of shots per sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Shots {
    #[default]
    Exact,
    Count(u64),
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => s.serialize_str("exact"),
            Shots::Count(n) => s.serialize_u64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Word(String),
            Count(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Word(w) if w == "exact" => Ok(Shots::Exact),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("expected \"exact\" or a shot count, found \"{w}\""))),
            Raw::Count(n) if n >= 1 => Ok(Shots::Count(n as u64)),
            Raw::Count(n) => Err(serde::de::Error::custom(format!("shots must be ≥ 1, found {n}"))),
        }
    }
}

/// `"off"`, `"link_calibrated"` or an explicit [`NoiseModel`] table.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum NoiseSetting {
    #[default]
    Off,
    LinkCalibrated,
    Model(NoiseModel),
}

impl NoiseSetting {
    pub fn model(&self) -> NoiseModel {
        match self {
            NoiseSetting::Off => NoiseModel::off(),
            NoiseSetting::LinkCalibrated => link_calibrated_noise(),
            NoiseSetting::Model(m) => m.clone(),
        }
    }
}

/// Heating, motional coherence and initial occupation measured for the
/// two-mode link register. Qubit dephasing is not included.
pub fn link_calibrated_noise() -> NoiseModel {
    NoiseModel::off()
        .with_nbar("m1", 0.1)
        .with_nbar("m2", 0.1)
        .with_heating("m1", 300.0)
        .with_heating("m2", 5.0)
        .with_coherence("m1", 1.7e-3)
        .with_coherence("m2", 2.3e-3)
}

impl Serialize for NoiseSetting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NoiseSetting::Off => s.serialize_str("off"),
            NoiseSetting::LinkCalibrated => s.serialize_str("link_calibrated"),
            NoiseSetting::Model(m) => m.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for NoiseSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Word(String),
            Model(NoiseModel),
        }
        match Raw::deserialize(d).map_err(|_| {
            serde::de::Error::custom(
                "expected \"off\", \"link_calibrated\" or a table with heating_rate, motional_coherence, qubit_t2, initial_nbar",
            )
        })? {
            Raw::Word(w) if w == "off" => Ok(NoiseSetting::Off),
            Raw::Word(w) if w == "link_calibrated" => Ok(NoiseSetting::LinkCalibrated),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("unknown noise keyword \"{w}\""))),
            Raw::Model(m) => Ok(NoiseSetting::Model(m)),
        }
    }
}

/// Digital state preparation choices.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prep {
    /// Link-pair Bell state for `loop_ab`.
    pub bell: Option<BellState>,
    /// Sectors scanned by `lambda_sweep`; all four when absent.
    pub sectors: Option<Vec<BellState>>,
    pub squeeze_r: Option<Axis1d>,
    #[serde(default)]
    pub squeeze_theta: f64,
    /// Start from `S(ζ)|1⟩` with the link in `|−⟩` instead of `S(ζ)|0⟩, |+⟩`.
    #[serde(default)]
    pub odd: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: Option<PathBuf>,
    /// Write per-point series; summaries and the manifest are always written.
    #[serde(default = "yes")]
    pub series: bool,
}

fn yes() -> bool {
    true
}

impl Default for Output {
    fn default() -> Self {
        Self { dir: None, series: true }
    }
}

/// One experiment: a preset plus the parameters it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    #[serde(default)]
    pub physical: Physical,
    /// Per-oscillator cutoffs keyed by site label; `default` applies to the rest.
    #[serde(default)]
    pub cutoffs: BTreeMap<String, usize>,
    #[serde(default)]
    pub noise: NoiseSetting,
    pub time: Option<TimeGrid>,
    #[serde(default)]
    pub shots: Shots,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub prep: Prep,
    /// Built-in graph name (`link`, `loop`, `triangle`, `tetrahedron`,
    /// `chain<N>`) or an edge-list path relative to the config file.
    pub graph: Option<String>,
    #[serde(default)]
    pub output: Output,
    /// Hardware calibration rows, echoed to the manifest and never used.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub calibration: BTreeMap<String, serde_json::Value>,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

pub(crate) fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config { key: key.into(), message: message.into() }
}

/// Parses a TOML config. Errors name the offending key.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| config_err("<document>", e.message().to_string()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let key = if key == "." { "<root>".into() } else { key };
        config_err(&key, e.inner().message().trim().to_string())
    })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf);
    Ok(cfg)
}

/// The sweepable axes of a config.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    H,
    HOverJ,
    Delta,
    SqueezeR,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::H => "h",
            SweepAxis::HOverJ => "h_over_j",
            SweepAxis::Delta => "delta",
            SweepAxis::SqueezeR => "squeeze_r",
        }
    }
}

impl ExperimentConfig {
    /// The default configuration of a preset, with the parameter row of the
    /// matching experiment.
    pub fn preset(preset: Preset) -> Self {
        let j_link = PI * 1.47e3;
        let mut cfg = Self {
            preset,
            physical: Physical::default(),
            cutoffs: BTreeMap::new(),
            noise: NoiseSetting::Off,
            time: None,
            shots: Shots::Exact,
            seed: 0,
            prep: Prep::default(),
            graph: None,
            output: Output::default(),
            calibration: BTreeMap::new(),
            base_dir: None,
        };
        let cal = |pairs: &[(&str, serde_json::Value)]| -> BTreeMap<String, serde_json::Value> {
            pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
        };
        use serde_json::json;
        match preset {
            Preset::LinkTunnelling => {
                cfg.physical.j = Some(j_link);
                cfg.physical.h_over_j = Some(Axis1d::Scalar(0.0));
                cfg.time = Some(TimeGrid::periods(3.0, 241));
                cfg.calibration = cal(&[
                    ("delta_over_2pi_khz", json!(-25.0)),
                    ("omega_over_2pi_khz", json!([1.201, 1.216])),
                    ("segment_fwhm_us", json!("2 x (80 - 1080)")),
                    ("conditioning", json!("sigma_z")),
                ]);
            }
            Preset::LinkFieldSweep => {
                cfg.physical.j = Some(PI * 1.51e3);
                cfg.physical.h_over_j = Some(Axis1d::List(vec![0.02, 0.79, 1.57]));
                cfg.time = Some(TimeGrid::periods(4.0, 241));
                cfg.calibration = cal(&[
                    ("power_mw", json!(3.5)),
                    ("delta_over_2pi_khz", json!(-20.0)),
                    ("omega_over_2pi_khz", json!([0.19, 1.608])),
                    ("segment_fwhm_us", json!("80 - 1280")),
                    ("conditioning", json!("sigma_y")),
                ]);
            }
            Preset::LoopAb => {
                cfg.physical.j = Some(PI * 0.35e3);
                cfg.physical.h_over_j = Some(Axis1d::Scalar(0.0));
                cfg.prep.bell = Some(BellState::PhiPlus);
                cfg.time = Some(TimeGrid::periods(2.0, 121));
                cfg.calibration = cal(&[
                    ("delta_over_2pi_khz", json!([20.0, -20.0])),
                    ("segment_fwhm_us", json!("2 x 2 x (80 - 580)")),
                ]);
            }
            Preset::LambdaSweep => {
                cfg.physical.j = Some(1.0);
                let mut grid: Vec<f64> = (0..=200).map(|k| k as f64 * 0.02).collect();
                grid.push(20.0);
                cfg.physical.h_over_j = Some(Axis1d::List(grid));
                cfg.time = Some(TimeGrid::periods(1.0, 1000));
                cfg.output.series = false;
            }
            Preset::SqueezedTunnelling => {
                cfg.physical.j = Some(j_link);
                cfg.physical.h_over_j = Some(Axis1d::Scalar(0.0));
                cfg.prep.squeeze_r = Some(Axis1d::Scalar(0.96));
                cfg.time = Some(TimeGrid::periods(2.0, 81));
                cfg.calibration = cal(&[("delta_over_2pi_khz", json!(25.0)), ("segment_fwhm_us", json!(530.0))]);
            }
            Preset::MagnusCheck => {
                let delta = 2.0 * PI * 25e3;
                cfg.physical.omega1 = Some(2.0 * PI * 1.2e3);
                cfg.physical.omega2 = Some(2.0 * PI * 1.2e3);
                cfg.physical.delta = Some(Axis1d::Scalar(delta));
                cfg.physical.ramp = Some(2.0 * PI * 10.0 / delta);
                cfg.time = Some(TimeGrid::periods(0.5, 5));
            }
            Preset::ResourceCount => {
                cfg.graph = Some("tetrahedron".into());
            }
        }
        cfg
    }

    /// Which axes hold lists.
    pub fn list_axes(&self) -> Vec<SweepAxis> {
        let mut out = Vec::new();
        let p = &self.physical;
        for (axis, value) in [
            (SweepAxis::H, &p.h),
            (SweepAxis::HOverJ, &p.h_over_j),
            (SweepAxis::Delta, &p.delta),
            (SweepAxis::SqueezeR, &self.prep.squeeze_r),
        ] {
            if value.as_ref().is_some_and(Axis1d::is_list) {
                out.push(axis);
            }
        }
        out
    }

    pub fn axis_values(&self, axis: SweepAxis) -> Vec<f64> {
        let v = match axis {
            SweepAxis::H => &self.physical.h,
            SweepAxis::HOverJ => &self.physical.h_over_j,
            SweepAxis::Delta => &self.physical.delta,
            SweepAxis::SqueezeR => &self.prep.squeeze_r,
        };
        v.as_ref().map(Axis1d::values).unwrap_or_default()
    }

    /// Copy with `axis` fixed to one value.
    pub fn at(&self, axis: SweepAxis, value: f64) -> Self {
        let mut c = self.clone();
        let slot = match axis {
            SweepAxis::H => &mut c.physical.h,
            SweepAxis::HOverJ => &mut c.physical.h_over_j,
            SweepAxis::Delta => &mut c.physical.delta,
            SweepAxis::SqueezeR => &mut c.prep.squeeze_r,
        };
        *slot = Some(Axis1d::Scalar(value));
        c
    }

    pub fn j(&self) -> Result<f64> {
        let j = self.physical.j.ok_or_else(|| config_err("physical.j", format!("required by `{}`", self.preset.name())))?;
        if !(j.is_finite() && j > 0.0) {
            return Err(config_err("physical.j", format!("must be a positive rate, got {j}")));
        }
        Ok(j)
    }

    /// Absolute field at a single point; zero when unset.
    pub fn h(&self) -> Result<f64> {
        let scalar = |key: &str, a: &Axis1d| match a {
            Axis1d::Scalar(v) if v.is_finite() => Ok(*v),
            Axis1d::Scalar(v) => Err(config_err(key, format!("must be finite, got {v}"))),
            Axis1d::List(_) => Err(config_err(key, "list-valued; use `sweep`")),
        };
        match (&self.physical.h, &self.physical.h_over_j) {
            (Some(_), Some(_)) => Err(config_err("physical.h", "give either `h` or `h_over_j`, not both")),
            (Some(h), None) => scalar("physical.h", h),
            (None, Some(r)) => Ok(scalar("physical.h_over_j", r)? * self.j()?),
            (None, None) => Ok(0.0),
        }
    }

    pub fn cutoff(&self, site: &str) -> usize {
        self.cutoffs
            .get(site)
            .or_else(|| self.cutoffs.get("default"))
            .copied()
            .unwrap_or_else(|| self.preset.default_cutoff())
    }

    pub fn time_grid(&self) -> TimeGrid {
        self.time.clone().unwrap_or_else(|| match ExperimentConfig::preset(self.preset).time {
            Some(t) => t,
            None => TimeGrid::periods(1.0, 2),
        })
    }

    /// Resolves `graph`, reading an edge list from disk when it is not a
    /// built-in name.
    pub fn resolve_graph(&self) -> Result<LatticeGraph> {
        let name = self.graph.as_deref().ok_or_else(|| config_err("graph", "required by `resource_count`"))?;
        if let Some(g) = named_graph(name)? {
            return Ok(g);
        }
        let path = match &self.base_dir {
            Some(base) if Path::new(name).is_relative() => base.join(name),
            _ => PathBuf::from(name),
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| config_err("graph", format!("not a built-in graph and unreadable as a file ({}): {e}", path.display())))?;
        LatticeGraph::parse_edge_list(&text)
    }
}

fn named_graph(name: &str) -> Result<Option<LatticeGraph>> {
    Ok(Some(match name {
        "link" => LatticeGraph::link(),
        "loop" => LatticeGraph::loop_(),
        "triangle" => LatticeGraph::triangle(),
        "tetrahedron" => LatticeGraph::tetrahedron(),
        _ => match name.strip_prefix("chain").map(str::parse::<usize>) {
            Some(Ok(n)) => LatticeGraph::chain(n)?,
            _ => return Ok(None),
        },
    }))
}
