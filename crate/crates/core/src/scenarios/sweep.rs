use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use super::config::{ScenarioConfig, ScenarioKind};
use super::output::{RunManifest, Table};
use super::run::{manifest_for, simulate};
use crate::error::{Error, Result};

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let bad = |m: String| Error::Config {
        field: "values".into(),
        message: m,
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| bad(format!("`{s}`: {e}")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [a, b, s] => {
            let (a, b, s) = (num(a)?, num(b)?, num(s)?);
            if !(s > 0.0) || !(b >= a) {
                return Err(bad(format!("need start <= stop and step > 0 in `{spec}`")));
            }
            let n = ((b - a) / s + 1e-9).floor() as usize;
            (0..=n).map(|k| a + k as f64 * s).collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => {
            return Err(bad(format!(
                "expected start:stop:step or a list, got `{spec}`"
            )))
        }
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad(format!("no finite values in `{spec}`")));
    }
    Ok(values)
}

/// One sweep point and its manifest.
#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub manifest: RunManifest,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub param: String,
    pub points: Vec<SweepPoint>,
    /// Merged per-point summary, in parameter order.
    pub summary_csv: PathBuf,
    pub wall_time_s: f64,
}

impl SweepReport {
    pub fn all_passed(&self) -> bool {
        self.points.iter().all(|p| p.manifest.all_passed())
    }
}

fn point_config(base: &ScenarioConfig, param: &str, value: f64) -> Result<ScenarioConfig> {
    let mut layer = Map::new();
    layer.insert(param.to_string(), json!(value));
    base.with_layer(layer)
}

/// Runs `base` once per value of `param`, in parallel, writing per-point files
/// and a merged summary. The speed sweep takes its coupling values directly
/// when `param` is `gamma`.
pub fn sweep(
    base: &ScenarioConfig,
    param: &str,
    values: &[f64],
    out_dir: &Path,
) -> Result<SweepReport> {
    let start = Instant::now();
    let name = base.scenario.name();
    if base.scenario == ScenarioKind::Fig4Sweep && param == "gamma" {
        let mut layer = Map::new();
        layer.insert("gammas".into(), json!(values));
        let cfg = base.with_layer(layer)?;
        let manifest = super::run::run(&cfg, out_dir)?;
        let summary_csv = manifest.paths[0].clone();
        return Ok(SweepReport {
            param: param.into(),
            points: vec![SweepPoint {
                value: f64::NAN,
                manifest,
            }],
            summary_csv,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }

    let configs = values
        .iter()
        .map(|&v| point_config(base, param, v))
        .collect::<Result<Vec<_>>>()?;
    let points = configs
        .par_iter()
        .zip(values)
        .map(|(cfg, &v)| {
            let t0 = Instant::now();
            let out = simulate(cfg)?;
            let stem = format!("{name}_{param}={}", fmt_value(v));
            let csv = out_dir.join(format!("{stem}.csv"));
            let mpath = out_dir.join(format!("{stem}.manifest.json"));
            out.table.write(&csv)?;
            let manifest = manifest_for(
                cfg,
                out,
                t0.elapsed().as_secs_f64(),
                vec![csv, mpath.clone()],
            );
            manifest.write(&mpath)?;
            Ok(SweepPoint { value: v, manifest })
        })
        .collect::<Result<Vec<_>>>()?;

    let keys: Vec<String> = points
        .first()
        .map(|p| {
            p.manifest
                .summary
                .iter()
                .filter(|(_, v)| v.is_number())
                .map(|(k, _)| k.clone())
                .collect()
        })
        .unwrap_or_default();
    let mut header = vec![param.to_string()];
    header.extend(keys.iter().cloned());
    header.push("checks_failed".into());
    let mut table = Table::new(header);
    for p in &points {
        let mut row = vec![p.value];
        row.extend(keys.iter().map(|k| {
            p.manifest
                .summary
                .get(k)
                .and_then(Value::as_f64)
                .unwrap_or(f64::NAN)
        }));
        row.push(p.manifest.failed as f64);
        table.push(row)?;
    }
    let summary_csv = out_dir.join(format!("{name}_{param}_sweep.csv"));
    table.write(&summary_csv)?;
    Ok(SweepReport {
        param: param.into(),
        points,
        summary_csv,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn fmt_value(v: f64) -> String {
    let s = format!("{v}");
    s.replace('-', "m")
}
