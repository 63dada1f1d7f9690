//! CSV rows, the matching reader, and the JSON sidecar.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliResult;

/// One output line. Absent numbers serialise as empty fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: Option<u64>,
    pub m: Option<u64>,
    /// Approximant family or experiment the row belongs to.
    pub target: String,
    pub regime: String,
    pub metric: String,
    pub k: Option<i64>,
    pub value: f64,
    pub bound: Option<f64>,
    /// `explicit`, `order`, or empty when no bound applies.
    pub bound_kind: String,
    pub preconditions_met: bool,
    pub reasons: String,
    /// Filled only when timing is requested, so default output is
    /// byte-reproducible.
    pub runtime_ms: Option<f64>,
}

impl Row {
    pub fn new(n: Option<u64>, m: Option<u64>, target: &str, regime: &str, metric: &str, value: f64) -> Self {
        Self {
            n,
            m,
            target: target.to_string(),
            regime: regime.to_string(),
            metric: metric.to_string(),
            k: None,
            value,
            bound: None,
            bound_kind: String::new(),
            preconditions_met: true,
            reasons: String::new(),
            runtime_ms: None,
        }
    }

    pub fn at(mut self, k: i64) -> Self {
        self.k = Some(k);
        self
    }

    pub fn bounded(mut self, bound: f64, kind: &str, met: bool, reasons: &[String]) -> Self {
        self.bound = Some(bound);
        self.bound_kind = kind.to_string();
        self.preconditions_met = met;
        self.reasons = reasons.join("; ");
        self
    }
}

pub fn write_rows<W: Write>(sink: W, rows: &[Row]) -> CliResult<()> {
    let mut writer = csv::Writer::from_writer(sink);
    for row in rows {
        writer.serialize(row)?;
    }
    if rows.is_empty() {
        writer.write_record([
            "n",
            "m",
            "target",
            "regime",
            "metric",
            "k",
            "value",
            "bound",
            "bound_kind",
            "preconditions_met",
            "reasons",
            "runtime_ms",
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> CliResult<Vec<Row>> {
    let mut reader = csv::Reader::from_path(path)?;
    Ok(reader.deserialize().collect::<Result<Vec<Row>, _>>()?)
}

#[derive(Debug, Serialize)]
pub struct Sidecar<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a C,
    pub seed: Option<u64>,
    pub threads: usize,
    pub rows: usize,
    pub preconditions_violated: usize,
    pub runtime_ms: f64,
}

pub fn write_sidecar<C: Serialize>(path: &Path, sidecar: &Sidecar<'_, C>) -> CliResult<()> {
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, sidecar)?;
    file.write_all(b"\n")?;
    Ok(())
}
