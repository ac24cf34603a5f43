//! Result tables, their CSV schemas and the metadata sidecar.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::Command;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::spec::ExperimentSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    Fig1,
    Fig2,
    Fig3,
    Table3,
    Fig4,
    Fig5,
    Fig5Tradeoff,
    Fig5Thresholds,
    Fig5Operating,
}

impl Schema {
    pub const ALL: [Schema; 9] = [
        Self::Fig1,
        Self::Fig2,
        Self::Fig3,
        Self::Table3,
        Self::Fig4,
        Self::Fig5,
        Self::Fig5Tradeoff,
        Self::Fig5Thresholds,
        Self::Fig5Operating,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Self::Fig1 => "fig1",
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Table3 => "table3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
            Self::Fig5Tradeoff => "fig5_tradeoff",
            Self::Fig5Thresholds => "fig5_thresholds",
            Self::Fig5Operating => "fig5_operating",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Self::Fig1 => &["alpha", "estimator", "correlation", "p_value", "cdf"],
            Self::Fig2 => &[
                "estimator",
                "correlation",
                "init",
                "T",
                "se_mean",
                "se_stderr",
                "se_rzf_ref",
            ],
            Self::Fig3 => &["loading", "estimator", "correlation", "T", "gap_percent"],
            Self::Table3 => &[
                "loading",
                "estimator",
                "correlation",
                "tolerance_percent",
                "t_bar",
                "reached",
                "last_gap",
            ],
            Self::Fig4 => &["panel", "r", "sigma_db", "T", "gap_percent"],
            Self::Fig5 => &["loading", "M", "K", "t_upper_rzf", "t_upper_zf"],
            Self::Fig5Tradeoff => &[
                "correlation",
                "M",
                "K",
                "loading",
                "t_upper_zf",
                "t_upper_rzf",
                "T_target_10",
                "T_target_1",
            ],
            Self::Fig5Thresholds => &[
                "loading",
                "correlation",
                "tolerance_percent",
                "T_target",
                "M_threshold",
            ],
            Self::Fig5Operating => &[
                "M",
                "K",
                "correlation",
                "tolerance_percent",
                "t_upper_rzf",
                "T_target",
                "saving_ratio",
            ],
        }
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Self::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Self::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Self::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Self::Text(x.to_string())
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Self::Bool(x)
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Self::Int(i) => Some(i as f64),
            Self::Float(x) => Some(x),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Int(i) => write!(f, "{i}"),
            Self::Float(x) => f.write_str(&format_float(*x)),
            Self::Text(s) => f.write_str(s),
            Self::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Nine significant digits; scientific notation outside `[1e-4, 1e15)`.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..15).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.8e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent marker");
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Provenance written next to every CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub schema: Schema,
    pub columns: Vec<String>,
    pub rows: usize,
    pub seed: u64,
    pub spec_digest: String,
    pub git_hash: String,
    pub spec: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub schema: Schema,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(schema: Schema) -> Self {
        Self {
            schema,
            rows: Vec::new(),
        }
    }

    pub fn columns(&self) -> &'static [&'static str] {
        self.schema.columns()
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns().len(),
            "row width does not match schema {}",
            self.schema
        );
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns().iter().position(|c| *c == name)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns())?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    /// Writes `<schema>.csv` and `<schema>.meta.json` into `dir`.
    pub fn write(&self, dir: &Path, spec: &ExperimentSpec) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(format!("{}.csv", self.schema.id()));
        std::fs::write(&path, self.to_csv()?)
            .with_context(|| format!("writing {}", path.display()))?;
        let meta = Metadata {
            schema: self.schema,
            columns: self.columns().iter().map(|c| c.to_string()).collect(),
            rows: self.rows.len(),
            seed: spec.seed()?,
            spec_digest: spec.digest()?,
            git_hash: git_hash(),
            spec: spec.to_toml()?,
        };
        let meta_path = dir.join(format!("{}.meta.json", self.schema.id()));
        std::fs::write(&meta_path, serde_json::to_string_pretty(&meta)?)?;
        Ok(path)
    }
}

/// Reads a CSV written by [`ResultTable::write`] and checks its header.
pub fn read_csv(path: &Path, schema: Schema) -> Result<Vec<csv::StringRecord>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != schema.columns() {
        bail!(
            "{} does not match schema {schema}: {header:?}",
            path.display()
        );
    }
    Ok(r.records().collect::<std::result::Result<_, _>>()?)
}

fn git_hash() -> String {
    Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}
