//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use nsls_core::mesh::Mesh;
use nsls_core::newton::NavierStokesProblem;
use nsls_core::time::{Discretization, TimeGrid};
use nsls_core::FemSpace;

pub fn semidisk_space(h: f64) -> Arc<FemSpace> {
    Arc::new(FemSpace::new(Arc::new(Mesh::semidisk(h).expect("mesh"))).expect("space"))
}

/// Cavity at `ν = 1/500` on `[0, steps·dt]`.
pub fn cavity(h: f64, steps: usize, dt: f64) -> NavierStokesProblem {
    let grid = TimeGrid::new(steps as f64 * dt, steps).expect("grid");
    let disc = Arc::new(Discretization::new(semidisk_space(h), grid));
    NavierStokesProblem::cavity(disc, 1.0 / 500.0).expect("problem")
}
