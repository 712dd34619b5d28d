//! Space-time least-squares solver for the unsteady incompressible
//! Navier-Stokes equations in two dimensions.
//!
//! A candidate trajectory `y` on a backward-Euler time grid is measured by
//! the energy `E(y)` of its corrector, and driven to zero by damped Newton
//! steps `y ← y − λ Y1` with an exact quartic line search in `λ`.

pub mod experiment;
pub mod fem;
pub mod mesh;
pub mod newton;
pub mod post;
pub mod sparse;
pub mod time;

pub use experiment::{ExperimentConfig, ExperimentError, RunReport};
pub use fem::{BoundaryData, DiscreteField, FemError, FemSpace, FieldKind, SpaceLayout};
pub use mesh::{BoundaryTag, Mesh, MeshError, Point2};
pub use newton::{
    IterationRecord, NavierStokesProblem, NewtonError, NewtonOptions, SolveOutcome, SolveStatus, StepPolicy, Variant,
};
pub use sparse::{SaddleFactorization, SolveError, SparseMatrix};
pub use time::{Discretization, FieldTrajectory, Forcing, TimeError, TimeGrid};
