//! Batch experiments: build the discretization named by a configuration,
//! run the solver and write the history, report and snapshots.

mod config;
pub mod manufactured;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

pub use config::{parse_number, parse_number_list, unit_square_cells, ConfigError, ExperimentConfig, Geometry, ProblemKind};
pub use manufactured::{ConvergenceStudy, StudyLevel};

use crate::fem::{DiscreteField, FemError, FemSpace, FieldKind};
use crate::mesh::{read_triangle_format, BoundaryTagMap, Mesh, MeshError};
use crate::newton::{
    continuation_in_nu, damped_newton_solve, IterationRecord, NavierStokesProblem, NewtonError, NewtonOptions,
    SolveOutcome, SolveStatus,
};
use crate::post::{stream_function, write_vtk, PostError};
use crate::time::{Discretization, TimeGrid};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Newton(#[from] NewtonError),
    #[error(transparent)]
    Post(#[from] PostError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Builds the mesh of a geometry at target spacing `h`.
pub fn build_mesh(geometry: &Geometry, h: f64) -> Result<Mesh, ExperimentError> {
    Ok(match geometry {
        Geometry::Semidisk => Mesh::semidisk(h)?,
        Geometry::UnitSquare => Mesh::unit_square(unit_square_cells(h))?,
        Geometry::External(stem) => {
            let read = |ext: &str| {
                let path = stem.with_extension(ext);
                std::fs::read_to_string(&path).map_err(io_err(&path))
            };
            read_triangle_format(&read("node")?, &read("ele")?, &BoundaryTagMap::default())?
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counts {
    pub triangles: usize,
    pub vertices: usize,
    pub velocity_dofs: usize,
    pub pressure_dofs: usize,
    pub time_levels: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageReport {
    pub nu: f64,
    #[serde(serialize_with = "display")]
    pub status: SolveStatus,
    pub iterations: usize,
    pub final_sqrt2e: f64,
    pub history: Vec<IterationRecord>,
}

fn display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl StageReport {
    fn new(nu: f64, out: &SolveOutcome) -> Self {
        Self {
            nu,
            status: out.status,
            iterations: out.iterations(),
            final_sqrt2e: out.final_sqrt2e(),
            history: out.history.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub counts: Counts,
    /// One entry per viscosity solved, in order.
    pub stages: Vec<StageReport>,
    #[serde(serialize_with = "display")]
    pub status: SolveStatus,
    pub converged: bool,
    pub final_sqrt2e: f64,
    pub wall_time: f64,
    pub snapshots: Vec<PathBuf>,
    pub convergence_study: Option<ConvergenceStudy>,
}

impl RunReport {
    /// Records of the last stage.
    pub fn history(&self) -> &[IterationRecord] {
        &self.stages.last().expect("at least one stage").history
    }
}

/// `k,rel_increment,sqrt2E,lambda`, absent values left empty; floats in
/// shortest round-trip form.
pub fn history_csv(records: &[IterationRecord]) -> String {
    let mut s = String::from("k,rel_increment,sqrt2E,lambda\n");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for r in records {
        let _ = writeln!(s, "{},{},{:e},{}", r.k, opt(r.rel_increment), r.sqrt2e, opt(r.lambda));
    }
    s
}

struct Solved {
    disc: Arc<Discretization>,
    stages: Vec<(f64, SolveOutcome)>,
}

fn solve(config: &ExperimentConfig, mesh: Arc<Mesh>, grid: TimeGrid) -> Result<Solved, ExperimentError> {
    let space = Arc::new(FemSpace::new(mesh)?);
    let disc = Arc::new(Discretization::new(space, grid));
    let options = NewtonOptions {
        tol: config.tol,
        m: config.m,
        max_iter: config.max_iter,
        policy: config.policy,
        variant: config.variant,
        ..NewtonOptions::default()
    };
    let problem = match config.problem {
        ProblemKind::Cavity => NavierStokesProblem::cavity(disc.clone(), config.nu)?,
        ProblemKind::Manufactured => manufactured::problem(disc.clone(), config.nu)?,
    };
    let stages = match &config.schedule {
        Some(schedule) => continuation_in_nu(&problem, schedule, &options)?.stages,
        None => {
            let y0 = problem.initial_guess()?;
            vec![(config.nu, damped_newton_solve(&problem, y0, &options, &mut |_| {})?)]
        }
    };
    Ok(Solved { disc, stages })
}

fn write(path: &Path, text: &str) -> Result<(), ExperimentError> {
    std::fs::write(path, text).map_err(io_err(path))
}

/// Runs one experiment and writes `history.csv`, `report.txt` and the
/// requested `snapshot_t*.vtk` files into the output directory. With a
/// viscosity schedule every stage also gets `history_stage<i>.csv`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport, ExperimentError> {
    config.validate()?;
    let start = Instant::now();
    let out_dir = &config.output;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mesh = Arc::new(build_mesh(&config.geometry, config.h)?);
    let grid = config.grid()?;
    let solved = solve(config, mesh.clone(), grid.clone())?;
    let stages: Vec<StageReport> = solved.stages.iter().map(|(nu, o)| StageReport::new(*nu, o)).collect();
    let last = &solved.stages.last().expect("non-empty").1;

    write(&out_dir.join("history.csv"), &history_csv(&last.history))?;
    if solved.stages.len() > 1 {
        for (i, s) in stages.iter().enumerate() {
            write(&out_dir.join(format!("history_stage{i}.csv")), &history_csv(&s.history))?;
        }
    }

    let layout = solved.disc.space().layout();
    let mut snapshots = Vec::new();
    for &t in &config.snapshots {
        let n = grid.nearest_level(t);
        let u = DiscreteField::new(layout, FieldKind::VelocityP2, last.y.level(n).to_vec())?;
        let psi = stream_function(layout, &u)?;
        let path = out_dir.join(format!("snapshot_t{:.6}.vtk", grid.time(n)));
        write_vtk(layout, &[("velocity", &u), ("stream_function", &psi)], &path)?;
        snapshots.push(path);
    }

    let convergence_study = match config.problem {
        ProblemKind::Manufactured => {
            let level = |disc: &Discretization, out: &SolveOutcome, cells: usize| StudyLevel {
                cells_per_side: cells,
                h: 1.0 / cells as f64,
                dt: disc.grid().dt(),
                error: manufactured::l2v_error(disc, &out.y),
                iterations: out.iterations(),
                converged: out.status == SolveStatus::Converged,
            };
            let cells = unit_square_cells(config.h);
            let mut levels = vec![level(&solved.disc, last, cells)];
            for j in 1..config.refinements {
                let coarse_cells = cells >> j;
                let coarse_grid = TimeGrid::new(config.t_final, grid.n_steps() >> (2 * j)).map_err(NewtonError::from)?;
                let coarse = solve(config, Arc::new(Mesh::unit_square(coarse_cells)?), coarse_grid)?;
                levels.push(level(&coarse.disc, &coarse.stages[0].1, coarse_cells));
            }
            Some(ConvergenceStudy::new(levels))
        }
        ProblemKind::Cavity => None,
    };

    let report = RunReport {
        config: config.clone(),
        counts: Counts {
            triangles: mesh.n_triangles(),
            vertices: mesh.n_vertices(),
            velocity_dofs: layout.n_velocity_dofs(),
            pressure_dofs: layout.n_pressure_dofs(),
            time_levels: grid.n_levels(),
        },
        status: last.status,
        converged: last.status == SolveStatus::Converged,
        final_sqrt2e: last.final_sqrt2e(),
        stages,
        wall_time: start.elapsed().as_secs_f64(),
        snapshots,
        convergence_study,
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    write(&out_dir.join("report.txt"), &(text + "\n"))?;
    Ok(report)
}
