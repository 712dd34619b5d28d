//! Damped Newton iteration on the space-time least-squares functional.
//!
//! For a trajectory `y` with `y^0 = u0` the corrector `v` solves a heat-type
//! problem driven by the Navier-Stokes residual of `y`, and
//! `E(y) = ½‖v‖²_{A0}`. Along the direction `Y1` the corrector of
//! `y − λY1` is exactly `(1 − λ)v + λ²v̄̄`, so `E(y − λY1)` is a quartic in
//! `λ` that is minimized in closed form.

mod functional;
mod line_search;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

pub use functional::{
    a0_inner, compute_corrector, compute_direction, compute_nonlinear_corrector, compute_quadratic_lift,
    compute_residual_direction, energy, evaluate_energy, evaluate_residual_energy, l2v_norm_sq, lift_inner,
    linearized_trajectory, riesz_lift, riesz_lift_loads, CorrectorBundle, NavierStokesProblem, ResidualBundle,
};
pub use line_search::{cheap_step_rule, line_search_quartic, quartic_value, LineSearchError};

use crate::time::{FieldTrajectory, TimeError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NewtonError {
    #[error(transparent)]
    Time(#[from] TimeError),
    #[error(transparent)]
    LineSearch(#[from] LineSearchError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// How `λ_k` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StepPolicy {
    /// Exact minimization of the quartic on `(0, m]`.
    #[default]
    Quartic,
    /// `λ̂ = min(1, √E / (√2 ‖v̄̄‖))`.
    Cheap,
    /// `λ = 1`: plain Newton.
    FixedOne,
}

/// Which functional drives the iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Variant {
    /// `E`, the corrector energy.
    #[default]
    E,
    /// `Ẽ`, the `L²(V′)` norm of the residual.
    Etilde,
}

impl fmt::Display for StepPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepPolicy::Quartic => "quartic",
            StepPolicy::Cheap => "cheap",
            StepPolicy::FixedOne => "fixed1",
        })
    }
}

impl FromStr for StepPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quartic" => Ok(StepPolicy::Quartic),
            "cheap" => Ok(StepPolicy::Cheap),
            "fixed1" | "fixed-1" => Ok(StepPolicy::FixedOne),
            other => Err(format!("unknown step policy `{other}` (expected quartic, cheap or fixed1)")),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::E => "E",
            Variant::Etilde => "Etilde",
        })
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "E" => Ok(Variant::E),
            "Etilde" => Ok(Variant::Etilde),
            other => Err(format!("unknown functional variant `{other}` (expected E or Etilde)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonOptions {
    /// Stop once `√(2E) ≤ tol`.
    pub tol: f64,
    /// Upper bound of the step search interval.
    pub m: f64,
    pub max_iter: usize,
    pub policy: StepPolicy,
    pub variant: Variant,
    /// Declare divergence once `√(2E)` exceeds this multiple of its initial value.
    pub divergence_factor: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            m: 2.0,
            max_iter: 100,
            policy: StepPolicy::Quartic,
            variant: Variant::E,
            divergence_factor: 1e6,
        }
    }
}

/// One row of the convergence history.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct IterationRecord {
    pub k: usize,
    /// `‖y_k − y_{k−1}‖_{L²(V)} / ‖y_{k−1}‖_{L²(V)}`, absent for `k = 0`.
    pub rel_increment: Option<f64>,
    /// `√(2E(y_k))` (or `√(2Ẽ)` for the residual variant).
    pub sqrt2e: f64,
    /// Step taken from `y_k`; absent on the last row.
    pub lambda: Option<f64>,
    /// Seconds since the start of the solve.
    pub wall_time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    Diverged,
    IterationCap,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Converged => "converged",
            SolveStatus::Diverged => "diverged",
            SolveStatus::IterationCap => "iteration-cap",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub y: FieldTrajectory,
    pub history: Vec<IterationRecord>,
    pub status: SolveStatus,
}

impl SolveOutcome {
    pub fn iterations(&self) -> usize {
        self.history.len() - 1
    }

    pub fn final_sqrt2e(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.sqrt2e)
    }
}

/// State handed to the observer just before the update `y ← y − λY1`.
pub struct Iterate<'a> {
    pub k: usize,
    pub y: &'a FieldTrajectory,
    pub direction: &'a FieldTrajectory,
    /// Value of the driving functional at `y`.
    pub energy: f64,
    pub a: f64,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub lambda: f64,
}

struct Step {
    a: f64,
    b: Option<f64>,
    c: Option<f64>,
    direction: FieldTrajectory,
}

fn prepare_e(problem: &NavierStokesProblem, y: &FieldTrajectory) -> Result<(f64, CorrectorBundleSeed), NewtonError> {
    let v = compute_corrector(problem, y)?;
    let w = riesz_lift(problem.disc(), &v)?;
    let a = a0_inner(problem.disc(), &v, &w, &v, &w);
    Ok((a, CorrectorBundleSeed::E { v, w }))
}

fn prepare_etilde(problem: &NavierStokesProblem, y: &FieldTrajectory) -> Result<(f64, CorrectorBundleSeed), NewtonError> {
    let r = problem.residual(y)?;
    let h = riesz_lift_loads(problem.disc(), &r)?;
    let a = lift_inner(problem.disc(), &h, &h);
    Ok((a, CorrectorBundleSeed::Etilde { r, h }))
}

enum CorrectorBundleSeed {
    E { v: FieldTrajectory, w: Vec<Vec<f64>> },
    Etilde { r: Vec<Vec<f64>>, h: Vec<Vec<f64>> },
}

fn direction_and_coefficients(
    problem: &NavierStokesProblem,
    y: &FieldTrajectory,
    a: f64,
    seed: CorrectorBundleSeed,
    need_quadratic: bool,
) -> Result<Step, NewtonError> {
    let disc = problem.disc();
    match seed {
        CorrectorBundleSeed::E { v, w } => {
            let direction = compute_direction(problem, y, &v)?;
            let (b, c) = if need_quadratic {
                let (vbb, wbb) = compute_nonlinear_corrector(disc, &direction)?;
                (
                    Some(a0_inner(disc, &v, &w, &vbb, &wbb)),
                    Some(a0_inner(disc, &vbb, &wbb, &vbb, &wbb)),
                )
            } else {
                (None, None)
            };
            Ok(Step { a, b, c, direction })
        }
        CorrectorBundleSeed::Etilde { r, h } => {
            let direction = compute_residual_direction(problem, y, &r)?;
            let (b, c) = if need_quadratic {
                let hbb = compute_quadratic_lift(disc, &direction)?;
                (Some(lift_inner(disc, &h, &hbb)), Some(lift_inner(disc, &hbb, &hbb)))
            } else {
                (None, None)
            };
            Ok(Step { a, b, c, direction })
        }
    }
}

/// Full E-functional bundle at `y` (always including `v̄̄`, `w̄̄`).
pub fn corrector_bundle(problem: &NavierStokesProblem, y: &FieldTrajectory) -> Result<CorrectorBundle, NewtonError> {
    let disc = problem.disc();
    let v = compute_corrector(problem, y)?;
    let w = riesz_lift(disc, &v)?;
    let a = a0_inner(disc, &v, &w, &v, &w);
    let y1 = compute_direction(problem, y, &v)?;
    let (vbb, wbb) = compute_nonlinear_corrector(disc, &y1)?;
    let b = a0_inner(disc, &v, &w, &vbb, &wbb);
    let c = a0_inner(disc, &vbb, &wbb, &vbb, &wbb);
    Ok(CorrectorBundle {
        v,
        w,
        y1,
        vbb: Some(vbb),
        wbb: Some(wbb),
        a,
        b: Some(b),
        c: Some(c),
    })
}

fn choose_step(step: &Step, options: &NewtonOptions) -> Result<f64, NewtonError> {
    match options.policy {
        StepPolicy::FixedOne => Ok(1.0),
        StepPolicy::Quartic => {
            let (b, c) = (step.b.unwrap_or(0.0), step.c.unwrap_or(0.0));
            Ok(line_search_quartic(step.a, b, c, options.m)?.0)
        }
        StepPolicy::Cheap => Ok(cheap_step_rule(
            0.5 * step.a,
            step.c.unwrap_or(0.0).sqrt(),
            options.m,
        )),
    }
}

/// Damped Newton iteration `y_{k+1} = y_k − λ_k Y1_k` from `y0` until
/// `√(2E) ≤ tol`, divergence or the iteration cap.
pub fn damped_newton_solve(
    problem: &NavierStokesProblem,
    y0: FieldTrajectory,
    options: &NewtonOptions,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<SolveOutcome, NewtonError> {
    if !(options.tol > 0.0) {
        return Err(NewtonError::Config(format!("tolerance must be positive, got {}", options.tol)));
    }
    if !(options.m >= 1.0) {
        return Err(LineSearchError::Bound(options.m).into());
    }
    if y0.level(0) != problem.u0() {
        return Err(NewtonError::Config("initial trajectory does not start at u0".into()));
    }
    let start = Instant::now();
    let disc = problem.disc().clone();
    let mut y = y0;
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut initial = None;
    let mut rel_increment = None;
    let need_quadratic = options.policy != StepPolicy::FixedOne;
    let status = loop {
        let k = history.len();
        let (a, seed) = match options.variant {
            Variant::E => prepare_e(problem, &y)?,
            Variant::Etilde => prepare_etilde(problem, &y)?,
        };
        let sqrt2e = a.sqrt();
        history.push(IterationRecord {
            k,
            rel_increment,
            sqrt2e,
            lambda: None,
            wall_time: start.elapsed().as_secs_f64(),
        });
        log::info!("k = {k}: sqrt(2E) = {sqrt2e:.4e}");
        let reference = *initial.get_or_insert(sqrt2e);
        if !sqrt2e.is_finite() || sqrt2e > options.divergence_factor * reference {
            break SolveStatus::Diverged;
        }
        if sqrt2e <= options.tol {
            break SolveStatus::Converged;
        }
        if k >= options.max_iter {
            break SolveStatus::IterationCap;
        }
        let step = direction_and_coefficients(problem, &y, a, seed, need_quadratic)?;
        let lambda = choose_step(&step, options)?;
        observer(&Iterate {
            k,
            y: &y,
            direction: &step.direction,
            energy: 0.5 * a,
            a: step.a,
            b: step.b,
            c: step.c,
            lambda,
        });
        history[k].lambda = Some(lambda);
        let norm_y = l2v_norm_sq(&disc, &y).sqrt();
        let norm_step = lambda * l2v_norm_sq(&disc, &step.direction).sqrt();
        rel_increment = Some(if norm_y > 0.0 { norm_step / norm_y } else { f64::INFINITY });
        y = y.add_scaled(-lambda, &step.direction);
    };
    Ok(SolveOutcome { y, history, status })
}

/// Damped Newton on `Ẽ` instead of `E`.
pub fn residual_variant_solve(
    problem: &NavierStokesProblem,
    y0: FieldTrajectory,
    options: &NewtonOptions,
) -> Result<SolveOutcome, NewtonError> {
    let options = NewtonOptions {
        variant: Variant::Etilde,
        ..options.clone()
    };
    damped_newton_solve(problem, y0, &options, &mut |_| {})
}

#[derive(Clone, Debug)]
pub struct ContinuationOutcome {
    /// One outcome per viscosity, in schedule order; stops early at the
    /// first stage that does not converge.
    pub stages: Vec<(f64, SolveOutcome)>,
}

impl ContinuationOutcome {
    pub fn last(&self) -> &SolveOutcome {
        &self.stages.last().expect("non-empty schedule").1
    }
}

pub fn validate_schedule(schedule: &[f64]) -> Result<(), NewtonError> {
    if schedule.is_empty() {
        return Err(NewtonError::Config("viscosity schedule is empty".into()));
    }
    if schedule.iter().any(|nu| !(*nu > 0.0 && nu.is_finite())) {
        return Err(NewtonError::Config("viscosities must be positive".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(NewtonError::Config(format!(
            "viscosity schedule must be strictly decreasing, got {schedule:?}"
        )));
    }
    Ok(())
}

/// Solves for each viscosity of a strictly decreasing schedule, starting the
/// first from the Stokes initial guess and every later one from the previous
/// converged trajectory.
pub fn continuation_in_nu(
    problem: &NavierStokesProblem,
    schedule: &[f64],
    options: &NewtonOptions,
) -> Result<ContinuationOutcome, NewtonError> {
    validate_schedule(schedule)?;
    let mut stages: Vec<(f64, SolveOutcome)> = Vec::new();
    for &nu in schedule {
        let p = problem.with_nu(nu)?;
        let y0 = match stages.last() {
            Some((_, prev)) => prev.y.clone(),
            None => p.initial_guess()?,
        };
        let out = damped_newton_solve(&p, y0, options, &mut |_| {})?;
        let done = out.status != SolveStatus::Converged;
        stages.push((nu, out));
        if done {
            break;
        }
    }
    Ok(ContinuationOutcome { stages })
}

#[cfg(test)]
mod tests;
