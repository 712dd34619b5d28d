//! Experiment configuration files (TOML).
//!
//! ```toml
//! [mesh]
//! geometry = "semidisk"      # "unit_square" or a Triangle file stem
//! h = 0.05
//!
//! [time]
//! T = 2
//! dt = "1/50"
//!
//! [physics]
//! nu = "1/500"
//! problem = "cavity"         # or "manufactured"
//!
//! [solver]
//! policy = "quartic"
//! schedule = "1/500, 1/1000"
//!
//! [output]
//! dir = "out"
//! snapshots = [1.0, 2.0]
//! ```
//!
//! Numbers may be written as TOML numbers or as strings holding a decimal
//! or a fraction `p/q`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::newton::{validate_schedule, StepPolicy, Variant};
use crate::time::TimeGrid;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("malformed configuration: {0}")]
    Syntax(String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
    #[error("time.dt = {dt} does not divide time.T = {t_final}")]
    StepDoesNotDivide { dt: f64, t_final: f64 },
}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        message: message.into(),
    }
}

/// Parses `"0.002"`, `"2e-3"` or `"1/500"`.
pub fn parse_number(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("`{text}` is not a number"));
    match text.split_once('/') {
        Some((p, q)) => {
            let (p, q) = (parse(p)?, parse(q)?);
            if q == 0.0 {
                return Err(format!("`{text}` divides by zero"));
            }
            Ok(p / q)
        }
        None => parse(text),
    }
}

/// Comma-separated list of numbers, e.g. `"1/500, 1/1000"`.
pub fn parse_number_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',').map(parse_number).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    Semidisk,
    UnitSquare,
    /// Stem of a Triangle `.node` / `.ele` pair.
    External(PathBuf),
}

impl FromStr for Geometry {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "semidisk" => Geometry::Semidisk,
            "unit_square" => Geometry::UnitSquare,
            "" => return Err("empty geometry".into()),
            path => Geometry::External(PathBuf::from(path.strip_suffix(".node").unwrap_or(path))),
        })
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Semidisk => f.write_str("semidisk"),
            Geometry::UnitSquare => f.write_str("unit_square"),
            Geometry::External(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ProblemKind {
    /// Lid-driven cavity, `f = 0`, `u0` the steady Stokes flow.
    #[default]
    Cavity,
    /// Unit square with a known exact solution.
    Manufactured,
}

impl FromStr for ProblemKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cavity" => Ok(ProblemKind::Cavity),
            "manufactured" => Ok(ProblemKind::Manufactured),
            other => Err(format!("unknown problem `{other}` (expected cavity or manufactured)")),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Cavity => "cavity",
            ProblemKind::Manufactured => "manufactured",
        })
    }
}

fn display<T: fmt::Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(serialize_with = "display")]
    pub geometry: Geometry,
    pub h: f64,
    pub t_final: f64,
    pub dt: f64,
    /// Target viscosity (the last schedule entry when a schedule is given).
    pub nu: f64,
    #[serde(serialize_with = "display")]
    pub problem: ProblemKind,
    pub m: f64,
    pub tol: f64,
    pub max_iter: usize,
    #[serde(serialize_with = "display")]
    pub policy: StepPolicy,
    #[serde(serialize_with = "display")]
    pub variant: Variant,
    pub schedule: Option<Vec<f64>>,
    pub output: PathBuf,
    pub snapshots: Vec<f64>,
    /// Number of meshes in the manufactured convergence study.
    pub refinements: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    Float(f64),
    Int(i64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumList {
    Text(String),
    List(Vec<Num>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    mesh: Option<RawMesh>,
    time: Option<RawTime>,
    physics: Option<RawPhysics>,
    solver: Option<RawSolver>,
    output: Option<RawOutput>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    geometry: Option<String>,
    h: Option<Num>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTime {
    #[serde(rename = "T")]
    t_final: Option<Num>,
    dt: Option<Num>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    nu: Option<Num>,
    problem: Option<String>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    m: Option<Num>,
    tol: Option<Num>,
    max_iter: Option<Num>,
    policy: Option<String>,
    variant: Option<String>,
    schedule: Option<NumList>,
    refinements: Option<Num>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    snapshots: Option<NumList>,
}

fn number(key: &'static str, v: Option<Num>, default: Option<f64>) -> Result<f64, ConfigError> {
    let x = match v {
        None => return default.ok_or(ConfigError::Missing(key)),
        Some(Num::Float(x)) => x,
        Some(Num::Int(i)) => i as f64,
        Some(Num::Text(s)) => parse_number(&s).map_err(|m| invalid(key, m))?,
    };
    if !x.is_finite() {
        return Err(invalid(key, format!("{x} is not finite")));
    }
    Ok(x)
}

fn positive(key: &'static str, v: Option<Num>, default: Option<f64>) -> Result<f64, ConfigError> {
    let x = number(key, v, default)?;
    if x <= 0.0 {
        return Err(invalid(key, format!("must be positive, got {x}")));
    }
    Ok(x)
}

fn count(key: &'static str, v: Option<Num>, default: usize) -> Result<usize, ConfigError> {
    let x = number(key, v, Some(default as f64))?;
    if x < 1.0 || x.fract() != 0.0 {
        return Err(invalid(key, format!("must be a positive integer, got {x}")));
    }
    Ok(x as usize)
}

fn list(key: &'static str, v: NumList) -> Result<Vec<f64>, ConfigError> {
    match v {
        NumList::Text(s) => parse_number_list(&s).map_err(|m| invalid(key, m)),
        NumList::List(items) => items.into_iter().map(|n| number(key, Some(n), None)).collect(),
    }
}

fn choice<T: FromStr<Err = String>>(key: &'static str, v: Option<String>) -> Result<Option<T>, ConfigError> {
    v.map(|s| s.parse().map_err(|m| invalid(key, m))).transpose()
}

/// Cells per side of the unit-square mesh with spacing at most `h`.
pub fn unit_square_cells(h: f64) -> usize {
    (1.0 / h - 1e-9).ceil().max(1.0) as usize
}

impl ExperimentConfig {
    /// Defaults for everything except the geometry and the viscosity.
    pub fn new(geometry: Geometry, nu: f64) -> Self {
        Self {
            geometry,
            h: 0.05,
            t_final: 2.0,
            dt: 0.02,
            nu,
            problem: ProblemKind::Cavity,
            m: 2.0,
            tol: 1e-8,
            max_iter: 100,
            policy: StepPolicy::Quartic,
            variant: Variant::E,
            schedule: None,
            output: PathBuf::from("output"),
            snapshots: Vec::new(),
            refinements: 3,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: Raw = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let mesh = raw.mesh.unwrap_or_default();
        let time = raw.time.unwrap_or_default();
        let physics = raw.physics.unwrap_or_default();
        let solver = raw.solver.unwrap_or_default();
        let output = raw.output.unwrap_or_default();

        let geometry: Geometry = choice("mesh.geometry", mesh.geometry)?.ok_or(ConfigError::Missing("mesh.geometry"))?;
        let schedule = solver.schedule.map(|s| list("solver.schedule", s)).transpose()?;
        let nu = match (&schedule, physics.nu) {
            (Some(s), None) => *s.last().ok_or_else(|| invalid("solver.schedule", "empty schedule"))?,
            (_, nu) => positive("physics.nu", nu, None)?,
        };
        let defaults = Self::new(geometry, nu);
        let c = Self {
            h: positive("mesh.h", mesh.h, Some(defaults.h))?,
            t_final: positive("time.T", time.t_final, Some(defaults.t_final))?,
            dt: positive("time.dt", time.dt, Some(defaults.dt))?,
            problem: choice("physics.problem", physics.problem)?.unwrap_or_default(),
            m: number("solver.m", solver.m, Some(defaults.m))?,
            tol: positive("solver.tol", solver.tol, Some(defaults.tol))?,
            max_iter: count("solver.max_iter", solver.max_iter, defaults.max_iter)?,
            policy: choice("solver.policy", solver.policy)?.unwrap_or_default(),
            variant: choice("solver.variant", solver.variant)?.unwrap_or_default(),
            refinements: count("solver.refinements", solver.refinements, defaults.refinements)?,
            schedule,
            output: output.dir.map(PathBuf::from).unwrap_or(defaults.output.clone()),
            snapshots: output.snapshots.map(|s| list("output.snapshots", s)).transpose()?.unwrap_or_default(),
            ..defaults
        };
        c.validate()?;
        Ok(c)
    }

    pub fn grid(&self) -> Result<TimeGrid, ConfigError> {
        TimeGrid::from_step(self.t_final, self.dt).map_err(|_| ConfigError::StepDoesNotDivide {
            dt: self.dt,
            t_final: self.t_final,
        })
    }

    /// Checks every invariant; call again after editing fields.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, v) in [("mesh.h", self.h), ("time.T", self.t_final), ("time.dt", self.dt), ("physics.nu", self.nu)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(key, format!("must be positive, got {v}")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(invalid("solver.tol", format!("must be positive, got {}", self.tol)));
        }
        if !(self.m >= 1.0 && self.m.is_finite()) {
            return Err(invalid("solver.m", format!("must be at least 1, got {}", self.m)));
        }
        if self.max_iter == 0 || self.refinements == 0 {
            return Err(invalid("solver.max_iter", "must be positive"));
        }
        let grid = self.grid()?;
        if let Some(s) = &self.schedule {
            validate_schedule(s).map_err(|e| invalid("solver.schedule", e.to_string()))?;
            if s.last() != Some(&self.nu) {
                return Err(invalid(
                    "physics.nu",
                    format!("{} differs from the last schedule entry {:?}", self.nu, s.last()),
                ));
            }
        }
        if let Some(t) = self.snapshots.iter().find(|t| !(**t >= 0.0 && **t <= self.t_final)) {
            return Err(invalid("output.snapshots", format!("{t} lies outside [0, {}]", self.t_final)));
        }
        if self.problem == ProblemKind::Manufactured {
            if self.geometry != Geometry::UnitSquare {
                return Err(invalid("physics.problem", "the manufactured case needs geometry = \"unit_square\""));
            }
            if self.schedule.is_some() {
                return Err(invalid("solver.schedule", "not available for the manufactured case"));
            }
            let coarsening = 1usize << (self.refinements - 1);
            if !unit_square_cells(self.h).is_multiple_of(coarsening) || !grid.n_steps().is_multiple_of(coarsening * coarsening) {
                return Err(invalid(
                    "solver.refinements",
                    format!(
                        "{} levels need cells per side divisible by {coarsening} and steps by {}",
                        self.refinements,
                        coarsening * coarsening
                    ),
                ));
            }
        }
        Ok(())
    }
}
