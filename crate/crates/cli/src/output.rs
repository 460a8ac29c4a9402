use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use slhnet::lindblad::FidelityTrace;

use crate::config::RunConfig;

pub const CSV_HEADER: &str = "t,fidelity,trace_error,min_eig";

/// 17 significant digits, locale-free.
pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv(trace: &FidelityTrace) -> String {
    let mut out = String::with_capacity(80 * (trace.samples.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &trace.samples {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            number(s.t),
            number(s.fidelity),
            number(s.trace_error),
            number(s.min_eig)
        );
    }
    out
}

/// `run.csv` → `run.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub complete: bool,
    pub error: Option<String>,
    pub rows: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub positivity_violated: bool,
}

impl RunSummary {
    pub fn new(trace: &FidelityTrace, error: Option<String>) -> Self {
        Self {
            complete: error.is_none(),
            error,
            rows: trace.samples.len(),
            accepted_steps: trace.accepted_steps,
            rejected_steps: trace.rejected_steps,
            max_trace_error: trace.max_trace_error,
            max_hermiticity_error: trace.max_hermiticity_error,
            min_eigenvalue: trace.min_eigenvalue,
            positivity_violated: trace.positivity_violated,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Sidecar<'a> {
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub omega: f64,
    pub alpha: f64,
    pub run: RunSummary,
}

pub fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, &text)
}
