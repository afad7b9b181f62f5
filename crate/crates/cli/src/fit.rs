//! `fit`: scaling fits over CSV produced by `sweep` or over explicit points.
//!
//! Accepted inputs:
//!
//! - power law: a `delta,t_r` points file, or a sweep CSV with a `j_even`
//!   axis. `Δ = |J_e - J_o|` with `J_o` from a `j_odd` column or `--j-o`.
//! - gaussian: a `t_r,value` points file, or a sweep CSV with an `eof`
//!   column. Grid points whose EoF vanishes at `T_r` have no logarithm and
//!   are skipped.
//!
//! For sweep CSVs `T_r` is the first local minimum of `abs_F14` per grid point.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use compass_core::analysis::{find_relaxation_time, fit_gaussian_decay, fit_power_law, FitResult, RelaxationPoint};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::csv_error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    /// `ln T_r` vs `ln Δ`; reports `τ = -1/slope`.
    PowerLaw,
    /// `ln EoF(T_r)` vs `T_r²`; reports `δ = -slope`.
    Gaussian,
}

impl FromStr for FitKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "power-law" => Ok(Self::PowerLaw),
            "gaussian" => Ok(Self::Gaussian),
            other => Err(format!("unknown fit kind `{other}` (expected power-law or gaussian)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub kind: FitKind,
    /// Range of `Δ` (power law) or `T_r` (Gaussian) to keep.
    pub window: Option<(f64, f64)>,
    pub j_odd: f64,
    pub smoothing: usize,
}

impl FitOptions {
    pub fn new(kind: FitKind) -> Self {
        Self {
            kind,
            window: None,
            j_odd: 1.0,
            smoothing: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub kind: FitKind,
    pub slope: f64,
    pub intercept: f64,
    pub tau_or_delta: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub n_points: usize,
    /// Grid points dropped because the fitted quantity was not positive.
    #[serde(skip)]
    pub skipped: usize,
}

impl FitReport {
    fn new(kind: FitKind, fit: FitResult, skipped: usize) -> Self {
        let tau_or_delta = match kind {
            FitKind::PowerLaw => fit.tau(),
            FitKind::Gaussian => fit.delta(),
        };
        Self {
            kind,
            slope: fit.slope,
            intercept: fit.intercept,
            tau_or_delta,
            r_squared: fit.r_squared,
            window: fit.window,
            n_points: fit.n_points,
            skipped,
        }
    }
}

/// A numeric CSV held column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| csv_error(path, e))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| csv_error(path, e))?;
            let row = record
                .iter()
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|_| CliError::Csv {
                        path: path.to_path_buf(),
                        message: format!("data row {}: `{cell}` is not a number", line + 1),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn require(&self, name: &str, path: &Path) -> Result<usize> {
        self.column(name).ok_or_else(|| CliError::Csv {
            path: path.to_path_buf(),
            message: format!("missing column `{name}` (have {})", self.header.join(",")),
        })
    }
}

/// Rows of a sweep CSV grouped by the axis columns before `t`, in first
/// appearance order.
struct Group {
    key: Vec<f64>,
    times: Vec<f64>,
    rows: Vec<usize>,
}

fn group_series(table: &Table, t_col: usize) -> Vec<Group> {
    let mut order: Vec<Group> = Vec::new();
    let mut index: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    for (i, row) in table.rows.iter().enumerate() {
        let key: Vec<f64> = row[..t_col].to_vec();
        let bits: Vec<u64> = key.iter().map(|v| v.to_bits()).collect();
        let slot = *index.entry(bits).or_insert_with(|| {
            order.push(Group {
                key: key.clone(),
                times: Vec::new(),
                rows: Vec::new(),
            });
            order.len() - 1
        });
        order[slot].times.push(row[t_col]);
        order[slot].rows.push(i);
    }
    order
}

/// Axis columns other than `allowed` must hold a single value, otherwise the
/// fit would mix unrelated parameter points.
fn check_fixed_axes(table: &Table, groups: &[Group], allowed: &[&str], path: &Path) -> Result<()> {
    let Some(first) = groups.first() else {
        return Err(CliError::Csv {
            path: path.to_path_buf(),
            message: "no data rows".into(),
        });
    };
    for (c, name) in table.header.iter().enumerate().take(first.key.len()) {
        if allowed.contains(&name.as_str()) {
            continue;
        }
        if groups.iter().any(|g| g.key[c].to_bits() != first.key[c].to_bits()) {
            return Err(CliError::Csv {
                path: path.to_path_buf(),
                message: format!("axis `{name}` takes several values; fit one slice at a time"),
            });
        }
    }
    Ok(())
}

pub fn fit_file(path: &Path, options: &FitOptions) -> Result<FitReport> {
    let table = Table::read(path)?;
    fit_table(&table, path, options)
}

pub fn fit_table(table: &Table, path: &Path, options: &FitOptions) -> Result<FitReport> {
    match options.kind {
        FitKind::PowerLaw => {
            let points = if let (Some(d), Some(t)) = (table.column("delta"), table.column("t_r")) {
                table
                    .rows
                    .iter()
                    .map(|r| RelaxationPoint {
                        delta: r[d],
                        t_r: r[t],
                        value_at_tr: f64::NAN,
                    })
                    .collect()
            } else {
                relaxation_points(table, path, options)?
            };
            Ok(FitReport::new(options.kind, fit_power_law(&points, options.window)?, 0))
        }
        FitKind::Gaussian => {
            let points: Vec<(f64, f64)> = if let (Some(t), Some(v)) = (table.column("t_r"), table.column("value")) {
                table.rows.iter().map(|r| (r[t], r[v])).collect()
            } else {
                minima_points(table, path, options)?
            };
            let total = points.len();
            let positive: Vec<(f64, f64)> = points.into_iter().filter(|p| p.1 > 0.0).collect();
            let skipped = total - positive.len();
            Ok(FitReport::new(options.kind, fit_gaussian_decay(&positive, options.window)?, skipped))
        }
    }
}

fn relaxation_points(table: &Table, path: &Path, options: &FitOptions) -> Result<Vec<RelaxationPoint>> {
    let t_col = table.require("t", path)?;
    let f_col = table.require("abs_F14", path)?;
    let je_col = table.require("j_even", path)?;
    let jo_col = table.column("j_odd");
    let groups = group_series(table, t_col);
    check_fixed_axes(table, &groups, &["j_even", "j_odd"], path)?;
    groups
        .iter()
        .map(|g| {
            let values: Vec<f64> = g.rows.iter().map(|&i| table.rows[i][f_col]).collect();
            let tr = find_relaxation_time(&g.times, &values, options.smoothing)?;
            let j_odd = jo_col.map_or(options.j_odd, |c| table.rows[g.rows[0]][c]);
            let j_even = table.rows[g.rows[0]][je_col];
            Ok(RelaxationPoint::new((j_even - j_odd).abs(), &tr))
        })
        .collect()
}

fn minima_points(table: &Table, path: &Path, options: &FitOptions) -> Result<Vec<(f64, f64)>> {
    let t_col = table.require("t", path)?;
    let f_col = table.require("abs_F14", path)?;
    let e_col = table.require("eof", path)?;
    let groups = group_series(table, t_col);
    check_fixed_axes(table, &groups, &["j_even", "j_odd"], path)?;
    groups
        .iter()
        .map(|g| {
            let values: Vec<f64> = g.rows.iter().map(|&i| table.rows[i][f_col]).collect();
            let tr = find_relaxation_time(&g.times, &values, options.smoothing)?;
            Ok((tr.t_r, table.rows[g.rows[tr.index]][e_col]))
        })
        .collect()
}

pub const FIT_JSON: &str = "fit.json";

/// Writes `fit.json` and a manifest recording the input and options.
pub fn write_fit(report: &FitReport, dir: &Path, input: &Path, options: &FitOptions) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir).map_err(crate::error::io_error(dir))?;
    let path = dir.join(FIT_JSON);
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(crate::error::io_error(&path))?;
    let echo = serde_json::json!({
        "input": input.display().to_string(),
        "kind": options.kind,
        "window": options.window,
        "j_odd": options.j_odd,
        "smoothing": options.smoothing,
    });
    crate::output::Manifest::build_with(dir, "fit", echo, false, &[FIT_JSON])?.write(dir)?;
    Ok(path)
}
