//! The least-squares functional and the linear problems behind one Newton
//! step: corrector, Riesz lifts, direction and auxiliary corrector.

use std::sync::Arc;

use super::NewtonError;
use crate::fem::BoundaryData;
use crate::sparse::SparseMatrix;
use crate::time::{
    implicit_step, steady_stokes_initial, unsteady_stokes_initial_guess, Discretization, FieldTrajectory, Forcing,
    TimeError,
};

/// Problem data for one viscosity on one discretization.
#[derive(Clone, Debug)]
pub struct NavierStokesProblem {
    disc: Arc<Discretization>,
    nu: f64,
    forcing: Forcing,
    u0: Vec<f64>,
    dirichlet: Vec<f64>,
}

impl NavierStokesProblem {
    pub fn new(
        disc: Arc<Discretization>,
        nu: f64,
        forcing: Forcing,
        u0: Vec<f64>,
        dirichlet: Vec<f64>,
    ) -> Result<Self, NewtonError> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(NewtonError::Config(format!("viscosity must be positive, got {nu}")));
        }
        let n = disc.n_velocity_dofs();
        for (what, len) in [("initial condition", u0.len()), ("boundary data", dirichlet.len())] {
            if len != n {
                return Err(NewtonError::Config(format!("{what} has length {len}, expected {n}")));
            }
        }
        if let Forcing::Loads(l) = &forcing {
            if l.len() != disc.grid().n_steps() || l.iter().any(|f| f.len() != n) {
                return Err(NewtonError::Config("forcing does not match the discretization".into()));
            }
        }
        Ok(Self {
            disc,
            nu,
            forcing,
            u0,
            dirichlet,
        })
    }

    /// Driven cavity: lid data `(g, 0)`, no-slip walls, zero forcing and the
    /// steady Stokes velocity as initial condition.
    pub fn cavity(disc: Arc<Discretization>, nu: f64) -> Result<Self, NewtonError> {
        let g = disc
            .space()
            .layout()
            .interpolate_dirichlet(&BoundaryData::cavity())
            .map_err(TimeError::from)?;
        let u0 = steady_stokes_initial(&disc, &g)?;
        Self::new(disc, nu, Forcing::Zero, u0, g)
    }

    pub fn with_nu(&self, nu: f64) -> Result<Self, NewtonError> {
        Self::new(self.disc.clone(), nu, self.forcing.clone(), self.u0.clone(), self.dirichlet.clone())
    }

    pub fn disc(&self) -> &Arc<Discretization> {
        &self.disc
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn u0(&self) -> &[f64] {
        &self.u0
    }

    pub fn dirichlet(&self) -> &[f64] {
        &self.dirichlet
    }

    /// Unsteady Stokes trajectory with unit viscosity and no forcing.
    pub fn initial_guess(&self) -> Result<FieldTrajectory, NewtonError> {
        Ok(unsteady_stokes_initial_guess(
            &self.disc,
            &self.u0,
            1.0,
            &Forcing::Zero,
            &self.dirichlet,
        )?)
    }

    fn check(&self, y: &FieldTrajectory) -> Result<(), NewtonError> {
        if y.grid() != self.disc.grid() {
            return Err(NewtonError::Config("trajectory lives on a different time grid".into()));
        }
        if y.level(0).len() != self.disc.n_velocity_dofs() {
            return Err(NewtonError::Config("trajectory has the wrong number of dofs".into()));
        }
        Ok(())
    }

    /// Discrete residuals `R^n = M(y^{n+1} − y^n)/δt + νK y^{n+1} +
    /// C(y^{n+1}) y^{n+1} − F^n`, `n = 0..N−1`.
    pub fn residual(&self, y: &FieldTrajectory) -> Result<Vec<Vec<f64>>, NewtonError> {
        self.check(y)?;
        let space = self.disc.space();
        let dt = self.disc.grid().dt();
        Ok((0..self.disc.grid().n_steps())
            .map(|n| {
                let (prev, next) = (y.level(n), y.level(n + 1));
                let mut r = space.convection_action(next, next);
                let diff: Vec<f64> = next.iter().zip(prev).map(|(a, b)| a - b).collect();
                space.mass().mul_vec_add(1.0 / dt, &diff, &mut r);
                space.stiffness().mul_vec_add(self.nu, next, &mut r);
                self.forcing.add_to(n, -1.0, &mut r);
                r
            })
            .collect())
    }
}

/// Corrector `v`: `(M/δt + K) v^{n+1} + Bᵀp = M v^n/δt − R^n`, `v^0 = 0`,
/// homogeneous boundary data.
pub fn compute_corrector(problem: &NavierStokesProblem, y: &FieldTrajectory) -> Result<FieldTrajectory, NewtonError> {
    let r = problem.residual(y)?;
    Ok(problem.disc().heat_trajectory(|n, rhs| {
        rhs.iter_mut().zip(&r[n]).for_each(|(o, x)| *o = -x);
    })?)
}

/// Lifts of the functionals `loads[n]`: `K w^n + Bᵀq = loads[n]`,
/// homogeneous boundary data.
pub fn riesz_lift_loads(disc: &Discretization, loads: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, NewtonError> {
    let stokes = disc.stokes().map_err(TimeError::at(0))?;
    loads
        .iter()
        .enumerate()
        .map(|(n, l)| Ok(stokes.solve_homogeneous(l).map_err(TimeError::at(n))?))
        .collect()
}

/// Riesz lift of the discrete time derivative: `K w^n + Bᵀq = −M(u^{n+1} −
/// u^n)/δt`, `n = 0..N−1`, so that `Σ δt ‖∇w^n‖²` is the squared
/// `L²(V′)` norm of `∂t u`.
pub fn riesz_lift(disc: &Discretization, u: &FieldTrajectory) -> Result<Vec<Vec<f64>>, NewtonError> {
    let dt = disc.grid().dt();
    let mass = disc.space().mass();
    let loads: Vec<Vec<f64>> = (0..disc.grid().n_steps())
        .map(|n| {
            let diff: Vec<f64> = u.level(n + 1).iter().zip(u.level(n)).map(|(a, b)| a - b).collect();
            let mut out = vec![0.0; diff.len()];
            mass.mul_vec_add(-1.0 / dt, &diff, &mut out);
            out
        })
        .collect();
    riesz_lift_loads(disc, &loads)
}

/// `Σ_n δt (∫∇u1^{n+1}·∇u2^{n+1} + ∫∇w1^n·∇w2^n)`.
pub fn a0_inner(
    disc: &Discretization,
    u1: &FieldTrajectory,
    w1: &[Vec<f64>],
    u2: &FieldTrajectory,
    w2: &[Vec<f64>],
) -> f64 {
    let k = disc.space().stiffness();
    let dt = disc.grid().dt();
    (0..disc.grid().n_steps())
        .map(|n| dt * (k.bilinear(u1.level(n + 1), u2.level(n + 1)) + k.bilinear(&w1[n], &w2[n])))
        .sum()
}

/// `Σ_n δt ∫∇h1^n·∇h2^n` for interval-indexed lifts.
pub fn lift_inner(disc: &Discretization, h1: &[Vec<f64>], h2: &[Vec<f64>]) -> f64 {
    let k = disc.space().stiffness();
    let dt = disc.grid().dt();
    h1.iter().zip(h2).map(|(a, b)| dt * k.bilinear(a, b)).sum()
}

/// `E = ½ ‖v‖²_{A0}`.
pub fn energy(disc: &Discretization, v: &FieldTrajectory, w: &[Vec<f64>]) -> f64 {
    0.5 * a0_inner(disc, v, w, v, w)
}

/// `E(y)` from scratch.
pub fn evaluate_energy(problem: &NavierStokesProblem, y: &FieldTrajectory) -> Result<f64, NewtonError> {
    let v = compute_corrector(problem, y)?;
    let w = riesz_lift(problem.disc(), &v)?;
    Ok(energy(problem.disc(), &v, &w))
}

/// `Ẽ(y) = ½ Σ δt ‖∇h^n‖²` with `h` the lift of the residual.
pub fn evaluate_residual_energy(problem: &NavierStokesProblem, y: &FieldTrajectory) -> Result<f64, NewtonError> {
    let h = riesz_lift_loads(problem.disc(), &problem.residual(y)?)?;
    Ok(0.5 * lift_inner(problem.disc(), &h, &h))
}

/// `Σ_{n=1..N} δt ‖∇u^n‖²`.
pub fn l2v_norm_sq(disc: &Discretization, u: &FieldTrajectory) -> f64 {
    let k = disc.space().stiffness();
    let dt = disc.grid().dt();
    (1..disc.grid().n_levels()).map(|n| dt * k.bilinear(u.level(n), u.level(n))).sum()
}

/// Linearized backward-Euler solve `(M/δt + νK + L(y^{n+1})) Y^{n+1} + Bᵀπ =
/// M Y^n/δt + loads[n]`, `Y^0 = 0`, homogeneous boundary data. The operator
/// is refactorized at every level on the shared symbolic pattern.
pub fn linearized_trajectory(
    problem: &NavierStokesProblem,
    y: &FieldTrajectory,
    loads: &[Vec<f64>],
) -> Result<FieldTrajectory, NewtonError> {
    let disc = problem.disc();
    let space = disc.space();
    let base = disc.evolution_operator(problem.nu());
    let dt = disc.grid().dt();
    let zero = vec![0.0; disc.n_velocity_dofs()];
    let mut levels = Vec::with_capacity(disc.grid().n_levels());
    levels.push(zero.clone());
    for n in 0..disc.grid().n_steps() {
        let l = space.linearized_convection_raw(y.level(n + 1));
        let op = SparseMatrix::combine(&[(1.0, &base), (1.0, &l)]);
        let step = disc.factorize(op).map_err(TimeError::at(n + 1))?;
        let (u, _) = implicit_step(&step, space.mass(), dt, &levels[n], &loads[n], &zero).map_err(TimeError::at(n + 1))?;
        levels.push(u);
    }
    Ok(FieldTrajectory::new(disc.grid().clone(), levels)?)
}

/// Direction `Y1` with load `−[M(v^{n+1} − v^n)/δt + K v^{n+1}]`.
pub fn compute_direction(
    problem: &NavierStokesProblem,
    y: &FieldTrajectory,
    v: &FieldTrajectory,
) -> Result<FieldTrajectory, NewtonError> {
    let disc = problem.disc();
    let space = disc.space();
    let dt = disc.grid().dt();
    let loads: Vec<Vec<f64>> = (0..disc.grid().n_steps())
        .map(|n| {
            let diff: Vec<f64> = v.level(n + 1).iter().zip(v.level(n)).map(|(a, b)| a - b).collect();
            let mut out = vec![0.0; diff.len()];
            space.mass().mul_vec_add(-1.0 / dt, &diff, &mut out);
            space.stiffness().mul_vec_add(-1.0, v.level(n + 1), &mut out);
            out
        })
        .collect();
    linearized_trajectory(problem, y, &loads)
}

/// `C(Y^{n+1}) Y^{n+1}` for `n = 0..N−1`.
fn quadratic_loads(disc: &Discretization, y1: &FieldTrajectory) -> Vec<Vec<f64>> {
    (1..disc.grid().n_levels())
        .map(|n| disc.space().convection_action(y1.level(n), y1.level(n)))
        .collect()
}

/// Auxiliary corrector `v̄̄` (load `−C(Y1^{n+1}) Y1^{n+1}`) and its lift `w̄̄`.
pub fn compute_nonlinear_corrector(
    disc: &Discretization,
    y1: &FieldTrajectory,
) -> Result<(FieldTrajectory, Vec<Vec<f64>>), NewtonError> {
    let loads = quadratic_loads(disc, y1);
    let vbb = disc.heat_trajectory(|n, rhs| {
        rhs.iter_mut().zip(&loads[n]).for_each(|(o, x)| *o = -x);
    })?;
    let wbb = riesz_lift(disc, &vbb)?;
    Ok((vbb, wbb))
}

/// Everything computed at one iterate of the E-functional iteration.
#[derive(Clone, Debug)]
pub struct CorrectorBundle {
    pub v: FieldTrajectory,
    pub w: Vec<Vec<f64>>,
    pub y1: FieldTrajectory,
    /// Absent when the step policy does not need it.
    pub vbb: Option<FieldTrajectory>,
    pub wbb: Option<Vec<Vec<f64>>>,
    /// `‖v‖²_{A0}`
    pub a: f64,
    /// `⟨v, v̄̄⟩_{A0}`
    pub b: Option<f64>,
    /// `‖v̄̄‖²_{A0}`
    pub c: Option<f64>,
}

impl CorrectorBundle {
    pub fn energy(&self) -> f64 {
        0.5 * self.a
    }
}

/// Residual lift `h`, direction and auxiliary lift `h̄̄` of the Ẽ iteration.
#[derive(Clone, Debug)]
pub struct ResidualBundle {
    pub h: Vec<Vec<f64>>,
    pub y1: FieldTrajectory,
    pub hbb: Option<Vec<Vec<f64>>>,
    pub a: f64,
    pub b: Option<f64>,
    pub c: Option<f64>,
}

/// Direction for `Ẽ`: `DR(y) Y = R(y)`.
pub fn compute_residual_direction(
    problem: &NavierStokesProblem,
    y: &FieldTrajectory,
    residual: &[Vec<f64>],
) -> Result<FieldTrajectory, NewtonError> {
    linearized_trajectory(problem, y, residual)
}

/// Lift of `C(Y1^{n+1}) Y1^{n+1}`.
pub fn compute_quadratic_lift(disc: &Discretization, y1: &FieldTrajectory) -> Result<Vec<Vec<f64>>, NewtonError> {
    riesz_lift_loads(disc, &quadratic_loads(disc, y1))
}
