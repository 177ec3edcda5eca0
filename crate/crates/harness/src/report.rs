//! Experiment rows and their CSV / JSON serialization.
//!
//! Both formats carry the same columns in the same order. Floats are written
//! with 17 significant digits so they parse back to the identical `f64`;
//! NaN becomes an empty CSV field and a JSON `null`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

pub const COLUMNS: [&str; 9] = [
    "graph",
    "approach",
    "batch_size",
    "batch_index",
    "runtime_ms",
    "iterations",
    "affected_vertex_iterations",
    "l1_error",
    "converged",
];

/// Graph name used on summary rows.
pub const SUMMARY_GRAPH: &str = "geomean";

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub graph: String,
    pub approach: String,
    /// Batch size as given on the command line, e.g. `1e-4`.
    pub batch_size: String,
    /// `None` on summary rows.
    pub batch_index: Option<usize>,
    pub runtime_millis: f64,
    pub iterations: u64,
    pub affected_vertex_iterations: u64,
    /// L1 distance to the reference ranks; NaN when unavailable.
    pub l1_error: f64,
    pub converged: bool,
}

impl ExperimentRow {
    pub fn is_summary(&self) -> bool {
        self.batch_index.is_none()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(format!("unknown report format `{s}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("refusing to write an empty report")]
    Empty,
    #[error("cannot write report: {0}")]
    Io(#[from] io::Error),
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// 17 significant digits, or `None` for NaN.
pub fn format_float(x: f64) -> Option<String> {
    if x.is_nan() {
        None
    } else {
        Some(format!("{x:.16e}"))
    }
}

fn fields(row: &ExperimentRow) -> [Option<String>; 9] {
    [
        Some(row.graph.clone()),
        Some(row.approach.clone()),
        Some(row.batch_size.clone()),
        row.batch_index.map(|i| i.to_string()),
        format_float(row.runtime_millis),
        Some(row.iterations.to_string()),
        Some(row.affected_vertex_iterations.to_string()),
        format_float(row.l1_error),
        Some(row.converged.to_string()),
    ]
}

pub fn write_csv(rows: &[ExperimentRow], out: impl Write) -> Result<(), ReportError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(COLUMNS)?;
    for row in rows {
        writer.write_record(fields(row).iter().map(|f| f.as_deref().unwrap_or("")))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_json(rows: &[ExperimentRow], mut out: impl Write) -> Result<(), ReportError> {
    writeln!(out, "[")?;
    for (i, row) in rows.iter().enumerate() {
        let values = fields(row);
        let mut members = Vec::with_capacity(COLUMNS.len());
        for (k, (name, value)) in COLUMNS.iter().zip(values).enumerate() {
            let text = match (k, value) {
                (_, None) => "null".to_string(),
                // Text columns are quoted; the rest are numbers or booleans.
                (0..=2, Some(v)) => serde_json::Value::String(v).to_string(),
                (_, Some(v)) => v,
            };
            members.push(format!("\"{name}\": {text}"));
        }
        let comma = if i + 1 < rows.len() { "," } else { "" };
        writeln!(out, "  {{{}}}{comma}", members.join(", "))?;
    }
    writeln!(out, "]")?;
    Ok(())
}

pub fn render(rows: &[ExperimentRow], format: ReportFormat) -> Result<Vec<u8>, ReportError> {
    if rows.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut buf = Vec::new();
    match format {
        ReportFormat::Csv => write_csv(rows, &mut buf)?,
        ReportFormat::Json => write_json(rows, &mut buf)?,
    }
    Ok(buf)
}

/// Writes `rows` to `path`.
pub fn emit_report(rows: &[ExperimentRow], format: ReportFormat, path: &Path) -> Result<(), ReportError> {
    let bytes = render(rows, format)?;
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&bytes)?;
    out.flush()?;
    Ok(())
}
