//! Tidy CSV tables with a commented provenance header, a JSON column schema beside each
//! table, and a JSON summary per plan. Nothing time- or host-dependent is written, so equal
//! inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::kernel::KernelFit;
use super::necessity::NecessityReport;
use super::report::RatioReport;
use super::sweep::SweepReport;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnType {
    Integer,
    Float,
    Text,
    Bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Column {
    pub name: &'static str,
    #[serde(rename = "type")]
    pub kind: ColumnType,
    pub description: &'static str,
}

const fn col(name: &'static str, kind: ColumnType, description: &'static str) -> Column {
    Column { name, kind, description }
}

/// Rows of pre-formatted cells under a declared schema.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-trip scientific form; empty for missing values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV text, each `header` line prefixed with `# `.
    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::new();
        for line in header.lines() {
            let _ = writeln!(out, "# {line}");
        }
        let names: Vec<&str> = self.columns.iter().map(|c| c.name).collect();
        let _ = writeln!(out, "{}", names.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| quote(c)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn schema_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({ "columns": self.columns })).expect("schema serializes")
    }
}

pub fn ratio_table(report: &RatioReport) -> Table {
    use ColumnType::*;
    let mut t = Table::new(vec![
        col("family", Text, "ratio family"),
        col("level", Integer, "grid level, 0 = coarsest"),
        col("points", Integer, "points per axis"),
        col("member", Integer, "ensemble member index; empty for fixed fields"),
        col("kind", Text, "member class"),
        col("param", Float, "family parameter such as t or T"),
        col("numerator", Float, "left-hand norm"),
        col("denominator", Float, "right-hand norm"),
        col("ratio", Float, "numerator / denominator; empty when excluded"),
        col("status", Text, "ok, excluded_trivial, excluded_small or error"),
        col("note", Text, "reason for exclusion or error"),
    ]);
    for c in &report.cases {
        t.push(vec![
            c.family.clone(),
            c.level.to_string(),
            c.points.to_string(),
            c.member.map(|m| m.to_string()).unwrap_or_default(),
            c.kind.clone(),
            opt(c.param),
            fmt_f64(c.numerator),
            fmt_f64(c.denominator),
            opt(c.ratio),
            c.status.name().into(),
            c.note.clone(),
        ]);
    }
    t
}

pub fn kernel_table(fits: &[KernelFit]) -> Table {
    use ColumnType::*;
    let mut t = Table::new(vec![
        col("theta", Float, "order of the fractional Laplacian"),
        col("horizon", Float, "T"),
        col("window_start", Float, "inner radius of the tail window"),
        col("window_end", Float, "outer radius of the tail window"),
        col("slope", Float, "fitted log-log tail exponent"),
        col("fit_residual", Float, "RMS log-log residual"),
        col("fit_points", Integer, "samples used by the fit"),
        col("target", Float, "-(N + min(1, theta))"),
        col("super_polynomial", Bool, "tail below every tested power"),
        col("l1", Float, "L^1 norm of the kernel"),
        col("l1_refined", Float, "L^1 norm at doubled resolution"),
        col("l1_change", Float, "relative change of the L^1 norm"),
        col("pass", Bool, "decay and stability criteria met"),
    ]);
    for k in fits {
        t.push(vec![
            fmt_f64(k.theta),
            fmt_f64(k.horizon),
            fmt_f64(k.window[0]),
            fmt_f64(k.window[1]),
            opt(k.fit.map(|f| f.slope)),
            opt(k.fit.map(|f| f.residual)),
            k.fit.map(|f| f.points.to_string()).unwrap_or_default(),
            fmt_f64(k.target),
            k.super_polynomial.to_string(),
            fmt_f64(k.l1),
            fmt_f64(k.l1_refined),
            fmt_f64(k.l1_change),
            k.pass.to_string(),
        ]);
    }
    t
}

/// Samples `(x, K(x))` of one kernel.
pub fn kernel_samples_table(profile: &[(f64, f64)]) -> Table {
    let mut t = Table::new(vec![
        col("x", ColumnType::Float, "distance from the origin along the first axis"),
        col("abs_kernel", ColumnType::Float, "|K(x)|"),
    ]);
    for &(x, v) in profile {
        t.push(vec![fmt_f64(x), fmt_f64(v)]);
    }
    t
}

pub fn sweep_table(report: &SweepReport) -> Table {
    use ColumnType::*;
    let mut t = Table::new(vec![
        col("index", Integer, "cell index"),
        col("theta", Float, "order of the fractional Laplacian"),
        col("gamma", Float, "power of the nonlinearity"),
        col("kind", Text, "forcing class"),
        col("amplitude", Float, "forcing amplitude"),
        col("verdict", Text, "converged, diverged, max_iters; empty on error"),
        col("iterations", Integer, "Picard iterations performed"),
        col("contraction", Float, "last increment ratio"),
        col("xt_norm", Float, "sup_t weak-L^p_ul norm of the last iterate"),
        col("residual", Float, "fixed-point residual of the returned iterate"),
        col("error", Text, "error message when the cell could not run"),
    ]);
    for c in &report.cells {
        t.push(vec![
            c.index.to_string(),
            fmt_f64(c.theta),
            fmt_f64(c.gamma),
            c.kind.clone(),
            fmt_f64(c.amplitude),
            c.verdict.map(|v| verdict_name(v).to_string()).unwrap_or_default(),
            c.iterations.to_string(),
            opt(c.contraction),
            fmt_f64(c.xt_norm),
            fmt_f64(c.residual),
            c.error.clone().unwrap_or_default(),
        ]);
    }
    t
}

fn verdict_name(v: crate::solver::Verdict) -> &'static str {
    match v {
        crate::solver::Verdict::Converged => "converged",
        crate::solver::Verdict::Diverged => "diverged",
        crate::solver::Verdict::MaxIters => "max_iters",
    }
}

pub fn necessity_table(report: &NecessityReport) -> Table {
    use ColumnType::*;
    let mut t = Table::new(vec![
        col("member", Integer, "ensemble member index"),
        col("kind", Text, "forcing class"),
        col("amplitude", Float, "forcing amplitude"),
        col("verdict", Text, "Picard verdict"),
        col("direct", Float, "B^{-theta}_{(p,inf),inf} norm of the known forcing"),
        col("recovered", Float, "same norm of the reconstructed forcing"),
        col("relative_error", Float, "|recovered / direct - 1|"),
        col("defect", Float, "relative least-squares defect of the reconstruction"),
        col("consistent", Bool, "defect within tolerance"),
        col("ratio", Float, "recovered norm over sup_t ||u - J[u]||"),
    ]);
    for r in &report.rows {
        t.push(vec![
            r.member.to_string(),
            r.kind.clone(),
            fmt_f64(r.amplitude),
            verdict_name(r.verdict).into(),
            fmt_f64(r.direct),
            opt(r.recovered),
            opt(r.relative_error),
            opt(r.defect),
            r.consistent.to_string(),
            opt(r.ratio),
        ]);
    }
    t
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Writes `<stem>.csv` and `<stem>.schema.json` into `dir`; returns the CSV path.
pub fn write_table(dir: &Path, stem: &str, table: &Table, header: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let csv = dir.join(format!("{stem}.csv"));
    fs::write(&csv, table.to_csv(header)).map_err(|e| io_error(&csv, e))?;
    let schema = dir.join(format!("{stem}.schema.json"));
    fs::write(&schema, table.schema_json()).map_err(|e| io_error(&schema, e))?;
    Ok(csv)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}
