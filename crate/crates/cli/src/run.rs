//! `echo` and `sweep`: engine runs written as CSV plus manifest.

use std::fs;
use std::path::{Path, PathBuf};

use compass_core::{decoherence_factor_with, CompassParams, CouplingSpec, QcRecord};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{io_error, CliError, Result};
use crate::output::{write_csv, Manifest};

pub const ECHO_CSV: &str = "echo.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const MEASURE_COLUMNS: [&str; 6] = ["t", "abs_F14", "eof", "discord", "concurrence", "negativity"];

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub files: Vec<String>,
    pub manifest: PathBuf,
    /// Zero-mode notes from the engine, one per affected grid point.
    pub warnings: Vec<String>,
}

impl RunOutcome {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

fn prepare_dir(config: &RunConfig, out: Option<&Path>) -> Result<PathBuf> {
    let dir = out.map_or_else(|| config.output.dir.clone(), Path::to_path_buf);
    fs::create_dir_all(&dir).map_err(io_error(&dir))?;
    Ok(dir)
}

fn finish(dir: PathBuf, command: &str, config: &RunConfig, files: Vec<String>, warnings: Vec<String>) -> Result<RunOutcome> {
    let names: Vec<&str> = files.iter().map(String::as_str).collect();
    let manifest = Manifest::build(&dir, command, config, &names)?.write(&dir)?;
    Ok(RunOutcome {
        dir,
        files,
        manifest,
        warnings,
    })
}

/// Single parameter point: `t, abs_F14`.
pub fn run_echo(config: &RunConfig, out: Option<&Path>, gnuplot: bool) -> Result<RunOutcome> {
    config.validate()?;
    if !config.sweep.is_empty() {
        return Err(CliError::Usage("`echo` takes a single parameter point; use `sweep` for [[sweep]] axes".into()));
    }
    let params = config.params()?;
    let times = config.times()?;
    let series = decoherence_factor_with(&params, &config.coupling()?, &times, &config.engine_options())?;
    let rows: Vec<Vec<f64>> = series.times.iter().zip(&series.values).map(|(&t, &f)| vec![t, f]).collect();

    let dir = prepare_dir(config, out)?;
    write_csv(&dir.join(ECHO_CSV), &["t", "abs_F14"], &rows)?;
    let mut files = vec![ECHO_CSV.to_string()];
    if gnuplot {
        let name = "echo.gp";
        let script = format!(
            "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\nset ylabel '|F_14|'\nplot '{ECHO_CSV}' using 1:2 with lines\n"
        );
        fs::write(dir.join(name), script).map_err(io_error(dir.join(name)))?;
        files.push(name.to_string());
    }
    let warnings = series.warnings.iter().map(ToString::to_string).collect();
    finish(dir, "echo", config, files, warnings)
}

/// Echo and correlation measures at one grid point, one row per time.
fn point_rows(
    config: &RunConfig,
    params: &CompassParams,
    coupling: &CouplingSpec,
    times: &[f64],
    coordinates: &[f64],
) -> Result<(Vec<Vec<f64>>, Vec<String>)> {
    let initial = config.initial()?;
    let series = decoherence_factor_with(params, coupling, times, &config.engine_options())?;
    let mut rows = Vec::with_capacity(times.len());
    for (&t, &f) in series.times.iter().zip(&series.values) {
        let r = QcRecord::from_echo(&initial, t, f)?;
        let mut row = coordinates.to_vec();
        row.extend([t, f, r.eof, r.discord, r.concurrence, r.negativity]);
        rows.push(row);
    }
    let warnings = series
        .warnings
        .iter()
        .map(|w| format!("at {coordinates:?}: {w}"))
        .collect();
    Ok((rows, warnings))
}

/// Long-format grid over one or two `[[sweep]]` axes. Grid points run in
/// parallel and are merged in grid order.
pub fn run_sweep(config: &RunConfig, out: Option<&Path>, gnuplot: bool) -> Result<RunOutcome> {
    config.validate()?;
    if !(1..=2).contains(&config.sweep.len()) {
        return Err(CliError::Usage(format!(
            "`sweep` needs one or two [[sweep]] axes, config has {}",
            config.sweep.len()
        )));
    }
    let times = config.times()?;
    let grid = config.grid()?;
    let blocks: Vec<Result<(Vec<Vec<f64>>, Vec<String>)>> = grid
        .par_iter()
        .map(|p| point_rows(config, &p.params, &p.coupling, &times, &p.coordinates))
        .collect();
    let mut rows = Vec::with_capacity(grid.len() * times.len());
    let mut warnings = Vec::new();
    for block in blocks {
        let (r, w) = block?;
        rows.extend(r);
        warnings.extend(w);
    }

    let mut header: Vec<&str> = config.sweep.iter().map(|a| a.parameter.name()).collect();
    header.extend(MEASURE_COLUMNS);
    let dir = prepare_dir(config, out)?;
    write_csv(&dir.join(SWEEP_CSV), &header, &rows)?;
    let mut files = vec![SWEEP_CSV.to_string()];
    if gnuplot {
        let name = "sweep.gp";
        let script = sweep_script(config);
        fs::write(dir.join(name), script).map_err(io_error(dir.join(name)))?;
        files.push(name.to_string());
    }
    finish(dir, "sweep", config, files, warnings)
}

/// One-axis sweeps plot `|F_14|` against `t` per axis value; two-axis sweeps
/// do the same for the first value of the outer axis.
fn sweep_script(config: &RunConfig) -> String {
    let axes = config.sweep.len();
    let inner = &config.sweep[axes - 1];
    let values: Vec<String> = inner.points().iter().map(|v| format!("{v}")).collect();
    let t_col = axes + 1;
    let f_col = axes + 2;
    let mut filter = format!("abs(column({axes}) - v) < 1e-9");
    if axes == 2 {
        let outer = config.sweep[0].points()[0];
        filter = format!("abs(column(1) - {outer}) < 1e-9 && {filter}");
    }
    format!(
        "set datafile separator ','\nset xlabel 't'\nset ylabel '|F_14|'\n\
         values = '{}'\n\
         plot for [s in values] '{SWEEP_CSV}' every ::1 using {t_col}:(v = real(s), {filter} ? column({f_col}) : NaN) \
         with lines title sprintf('{} = %s', s)\n",
        values.join(" "),
        inner.parameter
    )
}
