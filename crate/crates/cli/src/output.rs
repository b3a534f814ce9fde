//! Number formatting, CSV writers and run manifests.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ultraflow::{Figure1Row, FlowTrace};

use crate::CliResult;

/// 17 significant digits, scientific notation, independent of locale.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Aligned `key = value` lines for text output.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn line(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.lines.push((key.to_string(), value.into()));
        self
    }

    pub fn num(&mut self, key: &str, x: f64) -> &mut Self {
        self.line(key, num(x))
    }

    pub fn render(&self) -> String {
        let width = self.lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        self.lines
            .iter()
            .map(|(k, v)| format!("{k:<width$} = {v}\n"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub tool_version: String,
    pub seed: u64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            outputs: vec![],
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let value = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut file = File::create(path)?;
        serde_json::to_writer_pretty(&mut file, self)?;
        writeln!(file)?;
        Ok(())
    }
}

/// `trace.csv` → `trace.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

pub fn write_figure1<W: Write>(rows: &[Figure1Row], sink: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["p", "m_minus", "m_plus", "n_over_n_plus_2", "n_minus_2_over_n"])?;
    for r in rows {
        w.write_record([
            num(r.p),
            opt_num(r.m_minus),
            opt_num(r.m_plus),
            num(r.m_dotted),
            num(r.m_dashed),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace<W: Write>(trace: &FlowTrace, sink: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["t", "mass", "F", "fisher_beta", "u_min", "u_max", "grad_max"])?;
    for i in 0..trace.len() {
        w.write_record([
            num(trace.times[i]),
            num(trace.mass[i]),
            num(trace.f_values[i]),
            num(trace.fisher_beta[i]),
            num(trace.u_min[i]),
            num(trace.u_max[i]),
            num(trace.grad_max[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}
