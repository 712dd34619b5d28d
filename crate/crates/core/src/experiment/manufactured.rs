//! Exact solution `u = (∂₂ψ, −∂₁ψ)`, `ψ = sin²(πx) sin²(πy) e^{−t}` on the
//! unit square, `p = 0`, with the matching forcing.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::fem::gradient_error_sq;
use crate::mesh::Point2;
use crate::newton::{NavierStokesProblem, NewtonError};
use crate::time::{Discretization, FieldTrajectory, Forcing, TimeError};

fn s0(x: f64) -> f64 {
    (PI * x).sin().powi(2)
}
fn s1(x: f64) -> f64 {
    PI * (2.0 * PI * x).sin()
}
fn s2(x: f64) -> f64 {
    2.0 * PI * PI * (2.0 * PI * x).cos()
}
fn s3(x: f64) -> f64 {
    -4.0 * PI.powi(3) * (2.0 * PI * x).sin()
}

pub fn velocity(t: f64, p: Point2) -> [f64; 2] {
    let d = (-t).exp();
    [s0(p.x) * s1(p.y) * d, -s1(p.x) * s0(p.y) * d]
}

/// `[c][d] = ∂_d u_c`
pub fn gradient(t: f64, p: Point2) -> [[f64; 2]; 2] {
    let d = (-t).exp();
    [
        [s1(p.x) * s1(p.y) * d, s0(p.x) * s2(p.y) * d],
        [-s2(p.x) * s0(p.y) * d, -s1(p.x) * s1(p.y) * d],
    ]
}

pub fn laplacian(t: f64, p: Point2) -> [f64; 2] {
    let d = (-t).exp();
    [
        (s2(p.x) * s1(p.y) + s0(p.x) * s3(p.y)) * d,
        -(s3(p.x) * s0(p.y) + s1(p.x) * s2(p.y)) * d,
    ]
}

/// `f = ∂ₜu − νΔu + (u·∇)u`.
pub fn forcing(nu: f64, t: f64, p: Point2) -> [f64; 2] {
    let u = velocity(t, p);
    let g = gradient(t, p);
    let l = laplacian(t, p);
    [0, 1].map(|c| -u[c] - nu * l[c] + u[0] * g[c][0] + u[1] * g[c][1])
}

/// Manufactured problem with homogeneous boundary data and the Stokes
/// projection of the exact initial velocity.
pub fn problem(disc: Arc<Discretization>, nu: f64) -> Result<NavierStokesProblem, NewtonError> {
    let space = disc.space().clone();
    let load = space.load(|p| laplacian(0.0, p).map(|v| -v));
    let u0 = disc.stokes().map_err(TimeError::at(0))?.solve_homogeneous(&load).map_err(TimeError::at(0))?;
    let f = Forcing::sampled(&space, disc.grid(), |t, p| forcing(nu, t, p));
    let zero = vec![0.0; space.n_velocity_dofs()];
    NavierStokesProblem::new(disc, nu, f, u0, zero)
}

/// `(Σ_{n=1}^{N} δt ‖∇(yⁿ − u(tₙ))‖²)^{1/2}`.
pub fn l2v_error(disc: &Discretization, y: &FieldTrajectory) -> f64 {
    let grid = disc.grid();
    let layout = disc.space().layout();
    (1..grid.n_levels())
        .map(|n| grid.dt() * gradient_error_sq(layout, y.level(n), |p| gradient(grid.time(n), p)))
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyLevel {
    pub cells_per_side: usize,
    pub h: f64,
    pub dt: f64,
    pub error: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Errors on a sequence of meshes with `δt ∝ h²`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub levels: Vec<StudyLevel>,
    /// Rate in `h` between consecutive levels.
    pub rates: Vec<f64>,
    /// Least-squares slope of `log error` against `log h`.
    pub fitted_rate: Option<f64>,
}

impl ConvergenceStudy {
    pub fn new(mut levels: Vec<StudyLevel>) -> Self {
        levels.sort_by(|a, b| b.h.total_cmp(&a.h));
        let rates = levels
            .windows(2)
            .map(|w| (w[0].error / w[1].error).ln() / (w[0].h / w[1].h).ln())
            .collect();
        let fitted_rate = (levels.len() >= 2).then(|| {
            let pts: Vec<(f64, f64)> = levels.iter().map(|l| (l.h.ln(), l.error.ln())).collect();
            let n = pts.len() as f64;
            let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            sxy / sxx
        });
        Self {
            levels,
            rates,
            fitted_rate,
        }
    }
}
