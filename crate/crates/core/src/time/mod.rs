//! Backward-Euler time stepping of Stokes-type problems.

mod trajectory;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

pub use trajectory::{FieldTrajectory, TimeGrid};

use crate::fem::{FemError, FemSpace};
use crate::sparse::{SaddleFactorization, SolveError, SparseMatrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TimeError {
    #[error("invalid time grid: {0}")]
    Grid(String),
    #[error("trajectory has {found} levels, expected {expected}")]
    Levels { expected: usize, found: usize },
    #[error("solve failed at time level {level}: {source}")]
    Solve {
        level: usize,
        #[source]
        source: SolveError,
    },
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error("viscosity must be positive and finite, got {0}")]
    Viscosity(f64),
}

impl TimeError {
    pub(crate) fn at(level: usize) -> impl FnOnce(SolveError) -> TimeError {
        move |source| TimeError::Solve { level, source }
    }
}

/// Source term as assembled load vectors `F^n = ∫ f^n·φ`, one per step
/// `n = 0..N−1`.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum Forcing {
    #[default]
    Zero,
    Loads(Vec<Vec<f64>>),
}

impl Forcing {
    /// Loads `∫ f(t_{n+1}, x)·φ` for every step.
    pub fn sampled(space: &FemSpace, grid: &TimeGrid, f: impl Fn(f64, crate::mesh::Point2) -> [f64; 2]) -> Self {
        Forcing::Loads(
            (0..grid.n_steps())
                .map(|n| {
                    let t = grid.time(n + 1);
                    space.load(|p| f(t, p))
                })
                .collect(),
        )
    }

    /// `out += alpha F^n`
    pub fn add_to(&self, n: usize, alpha: f64, out: &mut [f64]) {
        if let Forcing::Loads(l) = self {
            out.iter_mut().zip(&l[n]).for_each(|(o, f)| *o += alpha * f);
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        match self {
            Forcing::Zero => Forcing::Zero,
            Forcing::Loads(l) => Forcing::Loads(
                l.iter()
                    .map(|v| v.iter().map(|x| alpha * x).collect())
                    .collect(),
            ),
        }
    }
}

/// A space discretization paired with a time grid. Owns the
/// constant-operator factorizations, built on first use and reused by every
/// later solve.
#[derive(Debug)]
pub struct Discretization {
    space: Arc<FemSpace>,
    grid: TimeGrid,
    heat: OnceLock<SaddleFactorization>,
    stokes: OnceLock<SaddleFactorization>,
    factorizations: AtomicUsize,
}

impl Discretization {
    pub fn new(space: Arc<FemSpace>, grid: TimeGrid) -> Self {
        Self {
            space,
            grid,
            heat: OnceLock::new(),
            stokes: OnceLock::new(),
            factorizations: AtomicUsize::new(0),
        }
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        &self.space
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n_velocity_dofs(&self) -> usize {
        self.space.n_velocity_dofs()
    }

    /// Number of numeric factorizations performed through this object.
    pub fn factorization_count(&self) -> usize {
        self.factorizations.load(Ordering::Relaxed)
    }

    /// Factorizes `(velocity block, B)` on the shared saddle layout.
    pub fn factorize(&self, a: SparseMatrix) -> Result<SaddleFactorization, SolveError> {
        self.factorizations.fetch_add(1, Ordering::Relaxed);
        self.space.saddle().factorize(a)
    }

    fn cached<'a>(
        &self,
        cell: &'a OnceLock<SaddleFactorization>,
        build: impl FnOnce() -> SparseMatrix,
    ) -> Result<&'a SaddleFactorization, SolveError> {
        if let Some(f) = cell.get() {
            return Ok(f);
        }
        let f = self.factorize(build())?;
        Ok(cell.get_or_init(|| f))
    }

    /// `M/δt + νK` for an arbitrary viscosity (not cached).
    pub fn evolution_operator(&self, nu: f64) -> SparseMatrix {
        let dt = self.grid.dt();
        SparseMatrix::combine(&[(1.0 / dt, self.space.mass()), (nu, self.space.stiffness())])
    }

    /// Factorization of `M/δt + K`.
    pub fn heat(&self) -> Result<&SaddleFactorization, SolveError> {
        self.cached(&self.heat, || self.evolution_operator(1.0))
    }

    /// Factorization of the steady operator `K`.
    pub fn stokes(&self) -> Result<&SaddleFactorization, SolveError> {
        self.cached(&self.stokes, || self.space.stiffness().clone())
    }

    /// Homogeneous backward-Euler trajectory of the heat-type operator:
    /// `(M/δt + K) u^{n+1} = M u^n/δt + load(n)`, `u^0 = 0`.
    pub fn heat_trajectory(
        &self,
        mut load: impl FnMut(usize, &mut [f64]),
    ) -> Result<FieldTrajectory, TimeError> {
        let heat = self.heat().map_err(TimeError::at(0))?;
        let nv = self.n_velocity_dofs();
        let zero = vec![0.0; nv];
        let mut levels = Vec::with_capacity(self.grid.n_levels());
        levels.push(zero.clone());
        let mut rhs = vec![0.0; nv];
        for n in 0..self.grid.n_steps() {
            rhs.fill(0.0);
            load(n, &mut rhs);
            let (u, _) = implicit_step(heat, self.space.mass(), self.grid.dt(), &levels[n], &rhs, &zero)
                .map_err(TimeError::at(n + 1))?;
            levels.push(u);
        }
        Ok(FieldTrajectory::new(self.grid.clone(), levels).expect("level count fixed by the loop"))
    }
}

/// One backward-Euler step `(M/δt + A) u^{n+1} + Bᵀp = M u^n/δt + load`,
/// `B u^{n+1} = 0`, with `u^{n+1} = dirichlet` on constrained dofs.
/// `step` must be a factorization of `M/δt + A`.
pub fn implicit_step(
    step: &SaddleFactorization,
    mass: &SparseMatrix,
    dt: f64,
    previous: &[f64],
    load: &[f64],
    dirichlet: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), SolveError> {
    let mut rhs = load.to_vec();
    mass.mul_vec_add(1.0 / dt, previous, &mut rhs);
    step.solve(&rhs, dirichlet)
}

/// Steady Stokes velocity `−Δu + ∇p = 0`, `∇·u = 0`, `u = g` on the
/// boundary. Unit viscosity; with zero forcing the velocity does not depend
/// on it.
pub fn steady_stokes_initial(disc: &Discretization, dirichlet: &[f64]) -> Result<Vec<f64>, TimeError> {
    let zero = vec![0.0; disc.n_velocity_dofs()];
    let f = disc.stokes().map_err(TimeError::at(0))?;
    Ok(f.solve(&zero, dirichlet).map_err(TimeError::at(0))?.0)
}

/// Backward-Euler unsteady Stokes trajectory from `u0` with viscosity `nu_bar`,
/// forcing `forcing` and time-constant boundary data.
pub fn unsteady_stokes_initial_guess(
    disc: &Discretization,
    u0: &[f64],
    nu_bar: f64,
    forcing: &Forcing,
    dirichlet: &[f64],
) -> Result<FieldTrajectory, TimeError> {
    if !(nu_bar > 0.0 && nu_bar.is_finite()) {
        return Err(TimeError::Viscosity(nu_bar));
    }
    let owned;
    let step = if nu_bar == 1.0 {
        disc.heat().map_err(TimeError::at(1))?
    } else {
        owned = disc
            .factorize(disc.evolution_operator(nu_bar))
            .map_err(TimeError::at(1))?;
        &owned
    };
    let grid = disc.grid();
    let mut levels = Vec::with_capacity(grid.n_levels());
    levels.push(u0.to_vec());
    let mut load = vec![0.0; disc.n_velocity_dofs()];
    for n in 0..grid.n_steps() {
        load.fill(0.0);
        forcing.add_to(n, 1.0, &mut load);
        let (u, _) = implicit_step(step, disc.space().mass(), grid.dt(), &levels[n], &load, dirichlet)
            .map_err(TimeError::at(n + 1))?;
        levels.push(u);
    }
    Ok(FieldTrajectory::new(grid.clone(), levels).expect("level count fixed by the loop"))
}
