//! Suite reports: JSON serialization, atomic writes, and CSV curve export.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use conederiv::{DerivativeEstimate, EstimatorOptions, ScaleSchedule};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub name: String,
    pub kind: String,
    pub passed: bool,
    /// Self-describing payload: estimates, checks, chain levels, errors.
    pub detail: Value,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    /// The resolved configuration the run used.
    pub config: Value,
    pub schedule: ScaleSchedule,
    pub options: EstimatorOptions,
    pub experiments: Vec<ExperimentResult>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn new(config: Value, schedule: ScaleSchedule, options: EstimatorOptions) -> Self {
        Self { config, schedule, options, experiments: Vec::new(), passed: true }
    }

    pub fn push(&mut self, result: ExperimentResult) {
        self.passed &= result.passed;
        self.experiments.push(result);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Writes the report atomically: tmp file then rename.
pub fn write_report(report: &SuiteReport, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    let tmp = path.with_extension("json.tmp");
    {
        let mut file = std::fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        file.write_all(report.to_json()?.as_bytes())
            .with_context(|| format!("writing {}", tmp.display()))?;
        file.write_all(b"\n")?;
    }
    std::fs::rename(&tmp, path)
        .with_context(|| format!("renaming {} into place", tmp.display()))?;
    Ok(())
}

/// Serializes an estimate together with its per-level curve rows so CSV
/// emission can be reproduced from the report alone.
pub fn estimate_detail(est: &DerivativeEstimate) -> Value {
    let levels: Vec<[f64; 5]> = est
        .levels
        .iter()
        .map(|l| [l.level as f64, l.delta, l.theta, l.residual, l.growth])
        .collect();
    serde_json::json!({ "estimate": est, "levels": levels })
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
        .collect()
}

/// Writes one CSV per experiment whose detail carries residual/growth
/// curves; returns the paths written. An empty report writes nothing and
/// warns on stderr.
pub fn emit_curves(report: &SuiteReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if report.experiments.is_empty() {
        eprintln!("warning: report contains no experiments; no curves written");
        return Ok(written);
    }
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    for exp in &report.experiments {
        for (label, detail) in curve_sections(&exp.detail) {
            let Some(levels) = detail.get("levels").and_then(Value::as_array) else {
                continue;
            };
            let mut csv = String::from("level,delta,theta,residual,growth\n");
            for row in levels {
                let Some(cols) = row.as_array() else { continue };
                if cols.len() != 5 {
                    continue;
                }
                let level = cols[0].as_f64().unwrap_or(f64::NAN) as usize;
                csv.push_str(&format!(
                    "{level},{},{},{},{}\n",
                    cols[1], cols[2], cols[3], cols[4]
                ));
            }
            let file = out_dir.join(format!("{}{}.csv", sanitize(&exp.name), label));
            std::fs::write(&file, csv)
                .with_context(|| format!("writing {}", file.display()))?;
            written.push(file);
        }
    }
    Ok(written)
}

/// Finds estimate payloads inside an experiment detail value: either the
/// detail itself or named sub-estimates.
fn curve_sections(detail: &Value) -> Vec<(String, &Value)> {
    let mut out = Vec::new();
    if detail.get("levels").is_some() {
        out.push((String::new(), detail));
    }
    if let Some(map) = detail.as_object() {
        for (key, value) in map {
            if value.get("levels").is_some() {
                out.push((format!("-{}", sanitize(key)), value));
            }
        }
    }
    out
}
