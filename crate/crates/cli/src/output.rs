//! CSV tables, JSON artifacts and run manifests.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use fbmdiff::densities::DensityField;
use fbmdiff::fbm::{MsdEstimate, PathEnsemble};
use fbmdiff::ResidualReport;
use serde::Serialize;

use crate::config::RunConfig;

/// One CSV cell. Reals are written with 17 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format_real(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

/// `{:.16e}`, i.e. 17 significant digits, which round-trips every finite f64.
pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// A rectangular table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub fn write_csv(table: &Table, path: &Path) -> anyhow::Result<()> {
    if let Some(bad) = table
        .rows
        .iter()
        .position(|r| r.len() != table.header.len())
    {
        anyhow::bail!("row {bad} has a different width from the header");
    }
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> anyhow::Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn ensemble_table(e: &PathEnsemble) -> Table {
    let mut t = Table::new(vec!["path_id", "t", "value"]);
    let times: Vec<f64> = e.grid().times().collect();
    for (p, path) in e.paths().enumerate() {
        for (ti, v) in times.iter().zip(path) {
            t.push(vec![p.into(), (*ti).into(), (*v).into()]);
        }
    }
    t
}

pub fn density_table(f: &DensityField) -> Table {
    let mut t = Table::new(vec!["t", "x", "rho"]);
    for (it, time) in f.tgrid().times().enumerate() {
        for (x, rho) in f.xgrid().points().zip(f.slice(it)) {
            t.push(vec![time.into(), x.into(), (*rho).into()]);
        }
    }
    t
}

pub fn msd_table(m: &MsdEstimate) -> Table {
    let mut t = Table::new(vec!["t", "msd", "std_err"]);
    for ((time, v), se) in m.msd.iter().zip(&m.std_err) {
        t.push(vec![time.into(), v.into(), (*se).into()]);
    }
    t
}

pub fn report_table(r: &ResidualReport) -> Table {
    let mut t = Table::new(vec![
        "t0",
        "dt",
        "n",
        "residual_l2",
        "residual_linf",
        "relative_linf",
        "excluded_prefix",
        "convergence_slope",
        "exact_channel_rel",
    ]);
    t.push(vec![
        r.grid.t0().into(),
        r.grid.dt().into(),
        r.grid.len().into(),
        r.residual_l2.into(),
        r.residual_linf.into(),
        r.relative_linf.into(),
        r.excluded_prefix.into(),
        r.convergence_slope.into(),
        r.exact_channel_rel.into(),
    ]);
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    /// `value <= threshold`
    #[serde(rename = "<=")]
    AtMost,
    /// `value > threshold`
    #[serde(rename = ">")]
    Above,
    /// Reported only; never fails a run.
    #[serde(rename = "info")]
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check: String,
    pub value: f64,
    pub threshold: Option<f64>,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            check: name.into(),
            value,
            threshold: Some(threshold),
            relation: Relation::AtMost,
            pass: value <= threshold,
        }
    }

    pub fn above(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            check: name.into(),
            value,
            threshold: Some(threshold),
            relation: Relation::Above,
            pass: value > threshold,
        }
    }

    pub fn info(name: &str, value: f64) -> Self {
        Self {
            check: name.into(),
            value,
            threshold: None,
            relation: Relation::Info,
            pass: true,
        }
    }
}

pub fn checks_table(checks: &[Check]) -> Table {
    let mut t = Table::new(vec!["check", "value", "threshold", "pass"]);
    for c in checks {
        t.push(vec![
            Cell::Text(c.check.clone()),
            c.value.into(),
            c.threshold.into(),
            Cell::Bool(c.pass),
        ]);
    }
    t
}

/// Run metadata written next to each data artifact. Timing lives only here.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub library_version: &'static str,
    pub config: &'a RunConfig,
    pub seed: u64,
    pub artifact: String,
    pub checks: &'a [Check],
    pub exit_code: i32,
    pub started_unix_seconds: f64,
    pub wall_time_seconds: f64,
}
