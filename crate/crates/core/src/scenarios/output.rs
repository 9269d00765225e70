use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::observables::TrajectoryRecord;

/// Environment variable naming the default output root.
pub const OUTPUT_DIR_ENV: &str = "NAIMARK_OUTPUT_DIR";

/// Float format of every CSV cell: 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column names for `n_probs` populations and the optional second subspace
/// and `N` metric.
pub fn trajectory_header(n_probs: usize, second_subspace: bool, with_n: bool) -> Vec<String> {
    let mut h: Vec<String> = ["t", "bloch_x", "bloch_y", "bloch_z"]
        .map(String::from)
        .to_vec();
    if second_subspace {
        h.extend(["bloch2_x", "bloch2_y", "bloch2_z"].map(String::from));
    }
    h.push("entropy".into());
    h.extend((0..n_probs).map(|k| format!("p{k}")));
    h.push("norm".into());
    h.push("min_eig_M".into());
    if with_n {
        h.push("min_eig_N".into());
    }
    h
}

/// A rectangular table of floats with named columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::InternalConsistency(format!(
                "row has {} cells, header has {}",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Trajectory table in the fixed column order. The layout is taken from
    /// the first record; later records must match it.
    pub fn from_records(records: &[TrajectoryRecord]) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::InsufficientData("no records".into()))?;
        let two = first.bloch.len() > 1;
        let with_n = first.min_eig_n.is_some();
        let mut table = Self::new(trajectory_header(first.probs.len(), two, with_n));
        for r in records {
            let mut row = vec![r.t];
            for b in r.bloch.iter().take(if two { 2 } else { 1 }) {
                row.extend([b.x, b.y, b.z]);
            }
            row.push(r.entropy);
            row.extend(&r.probs);
            row.push(r.norm);
            row.push(r.min_eig_m);
            if with_n {
                row.push(r.min_eig_n.unwrap_or(f64::NAN));
            }
            table.push(row)?;
        }
        Ok(table)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_float(x)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::InsufficientData("empty csv".into()))?
            .split(',')
            .map(String::from)
            .collect();
        let mut table = Self::new(header);
        for (n, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|c| {
                    c.parse::<f64>()
                        .map_err(|e| Error::InvalidInput(format!("row {}: `{c}`: {e}", n + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            table.push(row)?;
        }
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, self.to_csv().as_bytes())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    let mut f =
        std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Measured value the check compares against its tolerance.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: value <= tolerance,
            value,
            tolerance,
            detail: detail.into(),
        }
    }

    /// Passes when `value >= tolerance`.
    pub fn at_least(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: value >= tolerance,
            value,
            tolerance,
            detail: detail.into(),
        }
    }

    pub fn flag(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            value: if pass { 1.0 } else { 0.0 },
            tolerance: 1.0,
            detail: detail.into(),
        }
    }
}

/// Record written next to every run's CSV.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub config: ScenarioConfig,
    pub version: String,
    pub wall_time_s: f64,
    pub registered_checks: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub failed: usize,
    /// Scenario-specific observations (final populations, fitted slopes).
    pub summary: serde_json::Map<String, serde_json::Value>,
    pub paths: Vec<PathBuf>,
}

impl RunManifest {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        write_file(path, text.as_bytes())
    }
}

/// Output directory: the explicit one, then the config's `output_path`, then
/// `$NAIMARK_OUTPUT_DIR`, then `./out`.
pub fn resolve_output_dir(explicit: Option<&Path>, config: &ScenarioConfig) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| config.output_path.clone())
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}
