use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::RealField;
use crate::io::config::RunConfig;
use crate::mpa::{RimConstants, SolutionRecord, TraceEntry};
use crate::problem::HypothesisReport;
use crate::spaces::NormReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormsRecord {
    pub l2: f64,
    pub alpha: f64,
    #[serde(rename = "X")]
    pub x: f64,
}

/// Contents of `solution.json`; field set and order are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionJson {
    pub critical_value: f64,
    pub grad_norm: f64,
    pub beta: f64,
    pub rho: f64,
    pub nehari_value: f64,
    pub iterations: usize,
    pub tail_max: f64,
    pub converged: bool,
    pub norms: NormsRecord,
}

pub fn solution_json(r: &SolutionRecord) -> SolutionJson {
    SolutionJson {
        critical_value: r.critical_value,
        grad_norm: r.grad_norm,
        beta: r.rim.beta,
        rho: r.rim.rho,
        nehari_value: r.nehari_value,
        iterations: r.iterations,
        tail_max: r.tail_max,
        converged: r.converged,
        norms: NormsRecord {
            l2: r.norms.l2,
            alpha: r.norms.norm_alpha,
            x: r.norms.norm_x,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outputs {
    pub solution: String,
    pub profile: String,
    pub diagnostics: String,
    pub trace: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            solution: "solution.json".into(),
            profile: "profile.csv".into(),
            diagnostics: "diagnostics.json".into(),
            trace: "trace.csv".into(),
        }
    }
}

/// `manifest.json`. It parses back as a run config, so a run can be
/// repeated from its own manifest.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub run: RunConfig,
    pub version: String,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Outputs,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ValleyRecord {
    pub sigma: f64,
    pub energy: f64,
    pub norm_x: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PathRecord {
    pub endpoints_fixed: bool,
    pub max_peak_increase: f64,
    pub max_step_increase: f64,
    pub peak_index: usize,
    pub path_energies_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NehariRecord {
    pub best_restart: usize,
    pub restart_values: Vec<Option<f64>>,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Everything about a solve that does not belong in `solution.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub rim: RimConstants,
    pub hypotheses: HypothesisReport,
    pub norms: NormReport,
    pub valley: ValleyRecord,
    pub mountain_pass: PathRecord,
    pub nehari: NehariRecord,
    pub relative_gap: f64,
    pub sup_norm: f64,
}

impl Diagnostics {
    pub fn new(r: &SolutionRecord, hypotheses: &HypothesisReport) -> Self {
        let mp = &r.mountain_pass;
        Self {
            rim: r.rim,
            hypotheses: hypotheses.clone(),
            norms: r.norms,
            valley: ValleyRecord {
                sigma: r.valley.sigma,
                energy: r.valley.energy,
                norm_x: r.valley.norm_x,
            },
            mountain_pass: PathRecord {
                endpoints_fixed: mp.endpoints_fixed,
                max_peak_increase: mp.max_peak_increase,
                max_step_increase: mp.max_step_increase,
                peak_index: mp.path.max_index,
                path_energies_max: mp.path.energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            },
            nehari: NehariRecord {
                best_restart: r.nehari.best_restart,
                restart_values: r.nehari.restart_values.clone(),
                grad_norm: r.nehari.best.grad_norm,
                iterations: r.nehari.best.iterations,
                converged: r.nehari.best.converged,
            },
            relative_gap: (r.critical_value - r.nehari_value).abs() / r.nehari_value,
            sup_norm: r.norms.sup_norm,
        }
    }
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub(crate) fn write_trace_csv(path: &Path, trace: &[TraceEntry]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for entry in trace {
        w.serialize(entry)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `t` followed by the given columns, one row per grid node.
pub fn write_field_csv<W: std::io::Write>(out: W, field: &RealField, names: &[String], extra: &[&[f64]]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for (j, t) in field.grid().nodes().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(field.node_value(j).iter().map(|v| v.to_string()));
        row.extend(extra.iter().map(|col| col[j].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `(t, columns)` from a CSV whose header must equal `expected`.
pub fn read_profile_csv(path: &Path, expected: &[&str]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header != expected {
        return Err(Error::Config(format!(
            "expected header `{}`, found `{}`",
            expected.join(","),
            header.join(",")
        )));
    }
    let mut t = Vec::new();
    let mut cols = vec![Vec::new(); expected.len() - 1];
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let parse = |i: usize| -> Result<f64> {
            let s = record.get(i).unwrap_or("").trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Config(format!("row {}: `{s}` is not a finite number", line + 2)))
        };
        t.push(parse(0)?);
        for (i, c) in cols.iter_mut().enumerate() {
            c.push(parse(i + 1)?);
        }
    }
    Ok((t, cols))
}
