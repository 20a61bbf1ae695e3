use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ExperimentConfig;
use crate::dynamics::ObservableSeries;
use crate::error::{Error, Result};

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// CSV text with header `time_s,<label>[,stderr]`, 17 significant digits.
pub fn series_csv(series: &ObservableSeries) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    match &series.stderr {
        Some(err) => {
            w.write_record(["time_s", series.label.as_str(), "stderr"]).map_err(csv_err)?;
            for ((t, v), e) in series.times.iter().zip(&series.values).zip(err) {
                w.write_record([fmt(*t), fmt(*v), fmt(*e)]).map_err(csv_err)?;
            }
        }
        None => {
            w.write_record(["time_s", series.label.as_str()]).map_err(csv_err)?;
            for (t, v) in series.times.iter().zip(&series.values) {
                w.write_record([fmt(*t), fmt(*v)]).map_err(csv_err)?;
            }
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_series(path: &Path, series: &ObservableSeries) -> Result<()> {
    write_atomic(path, &series_csv(series)?)
}

/// Parses a file written by [`write_series`].
pub fn read_series(path: &Path) -> Result<ObservableSeries> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = r.headers().map_err(|e| io_err(path, e))?.clone();
    let with_err = match header.len() {
        2 => false,
        3 if &header[2] == "stderr" => true,
        _ => return Err(Error::Parse(format!("{}: unexpected header `{}`", path.display(), header.as_slice()))),
    };
    if &header[0] != "time_s" {
        return Err(Error::Parse(format!("{}: first column must be time_s", path.display())));
    }
    let (mut t, mut v, mut e) = (Vec::new(), Vec::new(), Vec::new());
    for (n, row) in r.records().enumerate() {
        let row = row.map_err(|e| io_err(path, e))?;
        let num = |i: usize| -> Result<f64> {
            row[i].parse().map_err(|_| Error::Parse(format!("{} row {}: `{}` is not a number", path.display(), n + 2, &row[i])))
        };
        t.push(num(0)?);
        v.push(num(1)?);
        if with_err {
            e.push(num(2)?);
        }
    }
    let s = ObservableSeries::new(&header[1], t, v)?;
    if with_err {
        s.with_stderr(e)
    } else {
        Ok(s)
    }
}

/// Table keyed by a sweep axis: header `<axis>,<column>…`.
pub fn summary_csv(axis: &str, values: &[f64], columns: &[(String, Vec<f64>)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    let mut header = vec![axis.to_string()];
    header.extend(columns.iter().map(|(c, _)| c.clone()));
    w.write_record(&header).map_err(csv_err)?;
    for (i, x) in values.iter().enumerate() {
        let mut row = vec![fmt(*x)];
        row.extend(columns.iter().map(|(_, col)| fmt(col[i])));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Files and derived values of one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    /// Sweep-axis value; absent for single runs.
    pub value: Option<f64>,
    pub seed: u64,
    /// Paths relative to the output directory.
    pub files: Vec<String>,
    pub derived: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub wall_time_s: f64,
    pub sweep_axis: Option<String>,
    pub summary_file: Option<String>,
    pub points: Vec<PointRecord>,
}

impl RunManifest {
    pub const FILE_NAME: &'static str = "manifest.json";

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(Self::FILE_NAME);
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    /// Every listed file, relative to the output directory.
    pub fn files(&self) -> Vec<&str> {
        self.points.iter().flat_map(|p| p.files.iter().map(String::as_str)).chain(self.summary_file.as_deref()).collect()
    }

    /// Checks that each listed series exists and parses.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for p in &self.points {
            for f in &p.files {
                read_series(&dir.join(f))?;
            }
        }
        if let Some(s) = &self.summary_file {
            let path = dir.join(s);
            let mut r = csv::Reader::from_path(&path).map_err(|e| io_err(&path, e))?;
            for row in r.records() {
                row.map_err(|e| io_err(&path, e))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_round_trip_is_bit_exact() {
        let t = vec![0.0, 1.0 / 3.0, 2e-5, 7.0];
        let v = vec![std::f64::consts::PI, -1e-300, 0.1 + 0.2, 1.0];
        let s = ObservableSeries::new("n_m2", t, v).unwrap().with_stderr(vec![0.0, 1e-3, 0.5, 2.0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/n_m2.csv");
        write_series(&path, &s).unwrap();
        assert_eq!(read_series(&path).unwrap(), s);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("time_s,n_m2,stderr\n"));
        assert!(!dir.path().join("sub/n_m2.csv.partial").exists());
    }

    #[test]
    fn malformed_csv_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "t,x\n0,1\n").unwrap();
        assert!(read_series(&path).is_err());
        fs::write(&path, "time_s,x\n0,abc\n").unwrap();
        assert!(read_series(&path).is_err());
    }
}
