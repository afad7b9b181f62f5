//! Run configuration files.
//!
//! A config is TOML with the sections `[model]`, `[coupling]`, `[initial]`,
//! `[time]`, `[engine]`, `[output]` and zero or more `[[sweep]]` axes. Every
//! section is optional and defaults to the `J_o = 1, J_e = 4, θ = π/2, h = 0,
//! N = 400, g = 0.1` Bell-state run. Unknown keys are errors.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::{Path, PathBuf};

use compass_core::analysis::time_grid;
use compass_core::{Boundary, CompassParams, CouplingSpec, EngineOptions, InitialXState, Route};
use serde::{Deserialize, Serialize};

use crate::error::{field_error, io_error, CliError, Result};

/// Comment block written at the top of generated configs.
pub const UNITS_HEADER: &str = "\
# Units: j_odd, j_even, field and g in units of J_o (energy);
# t_min, t_max and dt in units of 1/J_o (hbar = 1); theta in radians.
";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub j_odd: f64,
    pub j_even: f64,
    pub theta: f64,
    pub field: f64,
    pub sites: usize,
    pub boundary: Boundary,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            j_odd: 1.0,
            j_even: 4.0,
            theta: FRAC_PI_2,
            field: 0.0,
            sites: 400,
            boundary: Boundary::PeriodicEvenSector,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingConfig {
    pub g: f64,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self { g: 0.1 }
    }
}

/// `ρ_AB(0) = ¼ (I + Σ c_α σ^α ⊗ σ^α)`; the default is the Bell state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub c_x: f64,
    pub c_y: f64,
    pub c_z: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        let bell = InitialXState::bell();
        Self {
            c_x: bell.c_x,
            c_y: bell.c_y,
            c_z: bell.c_z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub dt: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            t_min: 0.0,
            t_max: 40.0,
            dt: 0.02,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub route: Route,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Leave the wall-clock timestamp out of the manifest so that the whole
    /// output directory is reproducible byte for byte.
    pub deterministic: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            deterministic: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    JOdd,
    JEven,
    Theta,
    Field,
    Sites,
    G,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::JOdd => "j_odd",
            Self::JEven => "j_even",
            Self::Theta => "theta",
            Self::Field => "field",
            Self::Sites => "sites",
            Self::G => "g",
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<LinearRange>,
}

impl SweepAxis {
    pub fn list(parameter: SweepParameter, values: Vec<f64>) -> Self {
        Self {
            parameter,
            values: Some(values),
            range: None,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        match (&self.values, &self.range) {
            (Some(v), _) => v.clone(),
            (None, Some(r)) if r.count == 1 => vec![r.start],
            (None, Some(r)) => (0..r.count)
                .map(|i| r.start + (r.stop - r.start) * i as f64 / (r.count - 1) as f64)
                .collect(),
            (None, None) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub coupling: CouplingConfig,
    pub initial: InitialConfig,
    pub time: TimeConfig,
    pub engine: EngineConfig,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepAxis>,
    pub output: OutputConfig,
}

/// One grid point of a sweep: the axis values in axis order and the
/// resulting model.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub coordinates: Vec<f64>,
    pub params: CompassParams,
    pub coupling: CouplingSpec,
}

fn core_field(name: &str) -> &str {
    match name {
        "J_o" => "model.j_odd",
        "J_e" => "model.j_even",
        "theta" => "model.theta",
        "h" => "model.field",
        "N" => "model.sites",
        "g" => "coupling.g",
        "c_x" => "initial.c_x",
        "c_y" => "initial.c_y",
        "c_z" => "initial.c_z",
        "initial" => "initial",
        _ => "time",
    }
}

fn locate(err: compass_core::Error) -> CliError {
    match err {
        compass_core::Error::InvalidParameter { name, reason } => field_error(core_field(name), reason),
        other => CliError::Core(other),
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::ConfigSyntax {
            origin: origin.to_string(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// TOML with the units header.
    pub fn to_toml(&self) -> String {
        let body = toml::to_string(self).expect("config serializes");
        format!("{UNITS_HEADER}\n{body}")
    }

    pub fn params(&self) -> Result<CompassParams> {
        let m = &self.model;
        CompassParams::new(m.j_odd, m.j_even, m.theta, m.field, m.sites, m.boundary).map_err(locate)
    }

    pub fn coupling(&self) -> Result<CouplingSpec> {
        CouplingSpec::new(self.coupling.g).map_err(locate)
    }

    pub fn initial(&self) -> Result<InitialXState> {
        let i = &self.initial;
        InitialXState::new(i.c_x, i.c_y, i.c_z).map_err(locate)
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        let t = &self.time;
        time_grid(t.t_min, t.t_max, t.dt).map_err(|e| match e {
            compass_core::Error::InvalidParameter { reason, .. } => field_error("time", reason),
            other => CliError::Core(other),
        })
    }

    pub fn engine_options(&self) -> EngineOptions {
        EngineOptions {
            route: self.engine.route,
            ..EngineOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.coupling()?;
        self.initial()?;
        self.times()?;
        if self.engine.route == Route::Momentum && self.model.boundary != Boundary::PeriodicEvenSector {
            return Err(field_error("engine.route", "momentum route needs a periodic chain"));
        }
        let mut seen = Vec::new();
        for (i, axis) in self.sweep.iter().enumerate() {
            let field = format!("sweep[{i}]");
            if seen.contains(&axis.parameter) {
                return Err(field_error(field, format!("parameter `{}` swept twice", axis.parameter)));
            }
            seen.push(axis.parameter);
            match (&axis.values, &axis.range) {
                (Some(_), Some(_)) => return Err(field_error(field, "give either `values` or `range`, not both")),
                (None, None) => return Err(field_error(field, "needs `values` or `range`")),
                (None, Some(r)) if r.count == 0 => return Err(field_error(format!("{field}.range.count"), "must be positive")),
                _ => {}
            }
            let points = axis.points();
            if points.is_empty() {
                return Err(field_error(format!("{field}.values"), "must not be empty"));
            }
            for v in points {
                self.assign(&[(axis.parameter, v)])
                    .map_err(|e| field_error(format!("{field} ({} = {v})", axis.parameter), e))?;
            }
        }
        Ok(())
    }

    /// The model and coupling with the given parameters overridden.
    pub fn assign(&self, values: &[(SweepParameter, f64)]) -> Result<(CompassParams, CouplingSpec)> {
        let mut model = self.model.clone();
        let mut g = self.coupling.g;
        for &(parameter, v) in values {
            match parameter {
                SweepParameter::JOdd => model.j_odd = v,
                SweepParameter::JEven => model.j_even = v,
                SweepParameter::Theta => model.theta = v,
                SweepParameter::Field => model.field = v,
                SweepParameter::G => g = v,
                SweepParameter::Sites => {
                    if !(v.fract() == 0.0 && v >= 0.0) {
                        return Err(field_error("model.sites", format!("must be a whole number, got {v}")));
                    }
                    model.sites = v as usize;
                }
            }
        }
        let params = CompassParams::new(model.j_odd, model.j_even, model.theta, model.field, model.sites, model.boundary)
            .map_err(locate)?;
        let coupling = CouplingSpec::new(g).map_err(locate)?;
        Ok((params, coupling))
    }

    /// Sweep grid in row-major order: the first axis is the outer loop.
    pub fn grid(&self) -> Result<Vec<GridPoint>> {
        let axes: Vec<(SweepParameter, Vec<f64>)> = self.sweep.iter().map(|a| (a.parameter, a.points())).collect();
        let mut coordinates: Vec<Vec<f64>> = vec![Vec::new()];
        for (_, values) in &axes {
            coordinates = coordinates
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |&v| {
                        let mut c = prefix.clone();
                        c.push(v);
                        c
                    })
                })
                .collect();
        }
        coordinates
            .into_iter()
            .map(|c| {
                let assignment: Vec<(SweepParameter, f64)> = axes.iter().map(|a| a.0).zip(c.iter().copied()).collect();
                let (params, coupling) = self.assign(&assignment)?;
                Ok(GridPoint {
                    coordinates: c,
                    params,
                    coupling,
                })
            })
            .collect()
    }
}
