use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::fem::FemSpace;
use crate::mesh::Mesh;
use crate::time::{Discretization, Forcing, TimeGrid};

fn small_disc(h: f64, t_final: f64, n: usize) -> Arc<Discretization> {
    let space = Arc::new(FemSpace::new(Arc::new(Mesh::semidisk(h).unwrap())).unwrap());
    Arc::new(Discretization::new(space, TimeGrid::new(t_final, n).unwrap()))
}

fn cavity(nu: f64) -> NavierStokesProblem {
    NavierStokesProblem::cavity(small_disc(0.2, 0.5, 8), nu).unwrap()
}

fn a0_norm(p: &NavierStokesProblem, u: &FieldTrajectory) -> f64 {
    let w = riesz_lift(p.disc(), u).unwrap();
    a0_inner(p.disc(), u, &w, u, &w).sqrt()
}

fn random_trajectory(p: &NavierStokesProblem, rng: &mut ChaCha8Rng) -> FieldTrajectory {
    let disc = p.disc();
    p.disc()
        .heat_trajectory(|_, rhs| rhs.iter_mut().for_each(|r| *r = rng.gen_range(-1.0..1.0)))
        .inspect(|t| {
            let mask = disc.space().layout().dirichlet_mask();
            assert!(t.levels().iter().all(|l| l.iter().zip(&mask).all(|(v, c)| !c || *v == 0.0)));
        })
        .unwrap()
}

#[test]
fn corrector_carries_the_convection_residual() {
    let p = cavity(1.0);
    let y = p.initial_guess().unwrap();
    let v = compute_corrector(&p, &y).unwrap();
    let disc = p.disc();
    let space = disc.space();
    let dt = disc.grid().dt();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let probes: Vec<Vec<f64>> = (0..3)
        .map(|_| {
            let load: Vec<f64> = (0..disc.n_velocity_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            disc.stokes().unwrap().solve_homogeneous(&load).unwrap()
        })
        .collect();
    for n in 0..disc.grid().n_steps() {
        let mut r = space.convection_action(y.level(n + 1), y.level(n + 1));
        disc.evolution_operator(1.0).mul_vec_add(1.0, v.level(n + 1), &mut r);
        space.mass().mul_vec_add(-1.0 / dt, v.level(n), &mut r);
        let scale = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for z in &probes {
            let zn = z.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let dot: f64 = z.iter().zip(&r).map(|(a, b)| a * b).sum();
            assert!(dot.abs() <= 1e-8 * (1.0 + scale) * zn * z.len() as f64, "level {n}: {dot}");
        }
    }
    assert!(a0_norm(&p, &v) > 0.0);
}

#[test]
fn corrector_is_linear_in_the_defect() {
    let disc = small_disc(0.25, 0.4, 4);
    let zero = vec![0.0; disc.n_velocity_dofs()];
    let grid = disc.grid().clone();
    let forcing = Forcing::sampled(disc.space(), &grid, |t, p| [p.y * (1.0 + t), p.x * p.x]);
    let p1 = NavierStokesProblem::new(disc.clone(), 0.1, forcing.clone(), zero.clone(), zero.clone()).unwrap();
    let p2 = NavierStokesProblem::new(disc.clone(), 0.1, forcing.scaled(2.0), zero.clone(), zero).unwrap();
    let y = FieldTrajectory::zeros(grid, disc.n_velocity_dofs());
    let v1 = compute_corrector(&p1, &y).unwrap();
    let v2 = compute_corrector(&p2, &y).unwrap();
    for (a, b) in v1.levels().iter().flatten().zip(v2.levels().iter().flatten()) {
        assert!((2.0 * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }
}

#[test]
fn lift_properties() {
    let p = cavity(0.1);
    let disc = p.disc();
    let u0 = p.u0().to_vec();
    let constant = FieldTrajectory::new(disc.grid().clone(), vec![u0; disc.grid().n_levels()]).unwrap();
    assert!(riesz_lift(disc, &constant).unwrap().iter().flatten().all(|v| *v == 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = random_trajectory(&p, &mut rng);
    let w = riesz_lift(disc, &u).unwrap();
    let w3 = riesz_lift(disc, &u.scaled(3.0)).unwrap();
    for (a, b) in w.iter().flatten().zip(w3.iter().flatten()) {
        assert!((3.0 * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }
}

#[test]
fn inner_product_laws() {
    let p = cavity(0.1);
    let disc = p.disc();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u1 = random_trajectory(&p, &mut rng);
    let u2 = random_trajectory(&p, &mut rng);
    let (w1, w2) = (riesz_lift(disc, &u1).unwrap(), riesz_lift(disc, &u2).unwrap());
    let e = energy(disc, &u1, &w1);
    assert!((a0_inner(disc, &u1, &w1, &u1, &w1) - 2.0 * e).abs() <= 1e-12 * e);
    let (x, y) = (a0_inner(disc, &u1, &w1, &u2, &w2), a0_inner(disc, &u2, &w2, &u1, &w1));
    assert!((x - y).abs() <= 1e-13 * x.abs().max(e));
    let (a, b, c) = (
        a0_inner(disc, &u1, &w1, &u1, &w1),
        a0_inner(disc, &u1, &w1, &u2, &w2),
        a0_inner(disc, &u2, &w2, &u2, &w2),
    );
    assert!(b * b <= a * c);
    let scaled = u1.scaled(-2.5);
    let ws = riesz_lift(disc, &scaled).unwrap();
    assert!((energy(disc, &scaled, &ws) - 6.25 * e).abs() <= 1e-12 * e);
    let zero = FieldTrajectory::zeros(disc.grid().clone(), disc.n_velocity_dofs());
    let wz = riesz_lift(disc, &zero).unwrap();
    assert_eq!(energy(disc, &zero, &wz), 0.0);
}

#[test]
fn zero_corrector_gives_zero_direction() {
    let p = cavity(0.05);
    let y = p.initial_guess().unwrap();
    let zero = FieldTrajectory::zeros(y.grid().clone(), p.disc().n_velocity_dofs());
    let y1 = compute_direction(&p, &y, &zero).unwrap();
    assert!(y1.levels().iter().flatten().all(|v| *v == 0.0));
    let (vbb, wbb) = compute_nonlinear_corrector(p.disc(), &zero).unwrap();
    assert!(vbb.levels().iter().flatten().chain(wbb.iter().flatten()).all(|v| *v == 0.0));
}

#[test]
fn nonlinear_corrector_is_quadratic() {
    let p = cavity(0.05);
    let b = corrector_bundle(&p, &p.initial_guess().unwrap()).unwrap();
    let (vbb, _) = compute_nonlinear_corrector(p.disc(), &b.y1).unwrap();
    let (v3, _) = compute_nonlinear_corrector(p.disc(), &b.y1.scaled(3.0)).unwrap();
    let scale = vbb.levels().iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    for (a, c) in vbb.levels().iter().flatten().zip(v3.levels().iter().flatten()) {
        assert!((9.0 * a - c).abs() <= 1e-10 * 9.0 * scale);
    }
}

#[test]
fn descent_identity_and_exact_expansion() {
    let p = cavity(0.02);
    let y = p.initial_guess().unwrap();
    let b = corrector_bundle(&p, &y).unwrap();
    let e = b.energy();
    let eps = 1e-4 * l2v_norm_sq(p.disc(), &y).sqrt() / l2v_norm_sq(p.disc(), &b.y1).sqrt();
    let ep = evaluate_energy(&p, &y.add_scaled(eps, &b.y1)).unwrap();
    let em = evaluate_energy(&p, &y.add_scaled(-eps, &b.y1)).unwrap();
    let slope = (ep - em) / (2.0 * eps);
    assert!((slope / (2.0 * e) - 1.0).abs() <= 0.02, "{slope} vs {}", 2.0 * e);

    let (bb, cc) = (b.b.unwrap(), b.c.unwrap());
    for lambda in [0.3, 0.7, 1.0] {
        let scratch = evaluate_energy(&p, &y.add_scaled(-lambda, &b.y1)).unwrap();
        let q = quartic_value(b.a, bb, cc, lambda);
        assert!((scratch - q).abs() <= 1e-6 * scratch, "λ = {lambda}: {scratch} vs {q}");
        let v_scratch = compute_corrector(&p, &y.add_scaled(-lambda, &b.y1)).unwrap();
        let v_pred = b.v.scaled(1.0 - lambda).add_scaled(lambda * lambda, b.vbb.as_ref().unwrap());
        let gap = a0_norm(&p, &v_scratch.add_scaled(-1.0, &v_pred));
        assert!(gap <= 1e-6 * a0_norm(&p, &v_scratch));
    }
}

#[test]
fn linearized_corrector_of_the_direction_is_v() {
    let p = cavity(0.02);
    let y = p.initial_guess().unwrap();
    let b = corrector_bundle(&p, &y).unwrap();
    let disc = p.disc();
    let space = disc.space();
    let dt = disc.grid().dt();
    // V1: heat-type solve with load −DR(y)·Y1
    let v1 = disc
        .heat_trajectory(|n, rhs| {
            let (prev, next) = (b.y1.level(n), b.y1.level(n + 1));
            let diff: Vec<f64> = next.iter().zip(prev).map(|(a, c)| a - c).collect();
            let mut dr = space.linearized_convection_raw(y.level(n + 1)).mul_vec(next);
            space.mass().mul_vec_add(1.0 / dt, &diff, &mut dr);
            space.stiffness().mul_vec_add(p.nu(), next, &mut dr);
            rhs.iter_mut().zip(&dr).for_each(|(o, x)| *o = -x);
        })
        .unwrap();
    let gap = a0_norm(&p, &v1.add_scaled(-1.0, &b.v));
    assert!(gap <= 1e-6 * a0_norm(&p, &b.v), "{gap}");
}

#[test]
fn damped_newton_converges_monotonically() {
    let p = cavity(0.02);
    let out = damped_newton_solve(&p, p.initial_guess().unwrap(), &NewtonOptions::default(), &mut |_| {}).unwrap();
    assert_eq!(out.status, SolveStatus::Converged);
    assert!(out.final_sqrt2e() <= 1e-8);
    assert!(out.history.windows(2).all(|w| w[1].sqrt2e <= w[0].sqrt2e));
    assert!(out.history[..out.iterations()].iter().all(|r| r.lambda.unwrap() > 0.0 && r.lambda.unwrap() <= 2.0));
    assert!(out.history.last().unwrap().lambda.is_none());
    assert!(out.history[0].rel_increment.is_none());
    assert_eq!(out.y.level(0), p.u0());

    // restarting from the solution exits immediately
    let again = damped_newton_solve(&p, out.y.clone(), &NewtonOptions::default(), &mut |_| {}).unwrap();
    assert_eq!(again.iterations(), 0);
    assert_eq!(again.status, SolveStatus::Converged);
    assert_eq!(again.y, out.y);
}

#[test]
fn other_policies_and_variants_reach_the_same_solution() {
    let p = cavity(0.02);
    let reference = damped_newton_solve(&p, p.initial_guess().unwrap(), &NewtonOptions::default(), &mut |_| {}).unwrap();
    let norm = l2v_norm_sq(p.disc(), &reference.y).sqrt();
    for options in [
        NewtonOptions { policy: StepPolicy::Cheap, ..Default::default() },
        NewtonOptions { policy: StepPolicy::FixedOne, ..Default::default() },
        NewtonOptions { variant: Variant::Etilde, ..Default::default() },
    ] {
        let out = damped_newton_solve(&p, p.initial_guess().unwrap(), &options, &mut |_| {}).unwrap();
        assert_eq!(out.status, SolveStatus::Converged, "{options:?}");
        let gap = l2v_norm_sq(p.disc(), &out.y.add_scaled(-1.0, &reference.y)).sqrt();
        assert!(gap <= 1e-5 * norm, "{options:?}: {gap}");
    }
}

#[test]
fn zero_problem_needs_no_iteration() {
    let disc = small_disc(0.25, 0.4, 4);
    let zero = vec![0.0; disc.n_velocity_dofs()];
    let p = NavierStokesProblem::new(disc, 0.01, Forcing::Zero, zero.clone(), zero).unwrap();
    let y0 = p.initial_guess().unwrap();
    assert!(y0.levels().iter().flatten().all(|v| *v == 0.0));
    assert_eq!(evaluate_residual_energy(&p, &y0).unwrap(), 0.0);
    let out = damped_newton_solve(&p, y0, &NewtonOptions::default(), &mut |_| {}).unwrap();
    assert_eq!(out.iterations(), 0);
    assert_eq!(out.final_sqrt2e(), 0.0);
    let r = residual_variant_solve(&p, out.y.clone(), &NewtonOptions::default()).unwrap();
    assert_eq!(r.iterations(), 0);
    let y1 = compute_residual_direction(&p, &out.y, &p.residual(&out.y).unwrap()).unwrap();
    assert!(y1.levels().iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn continuation_schedules() {
    let p = cavity(0.02);
    assert!(continuation_in_nu(&p, &[0.02, 0.05], &NewtonOptions::default()).is_err());
    assert!(continuation_in_nu(&p, &[0.02, 0.02], &NewtonOptions::default()).is_err());
    assert!(continuation_in_nu(&p, &[], &NewtonOptions::default()).is_err());
    let single = continuation_in_nu(&p, &[0.02], &NewtonOptions::default()).unwrap();
    let direct = damped_newton_solve(&p, p.initial_guess().unwrap(), &NewtonOptions::default(), &mut |_| {}).unwrap();
    assert_eq!(single.stages.len(), 1);
    assert_eq!(single.last().y, direct.y);
    assert_eq!(
        single.last().history.iter().map(|r| r.sqrt2e).collect::<Vec<_>>(),
        direct.history.iter().map(|r| r.sqrt2e).collect::<Vec<_>>()
    );
}

#[test]
fn observer_sees_every_step() {
    let p = cavity(0.02);
    let mut seen = Vec::new();
    let out = damped_newton_solve(&p, p.initial_guess().unwrap(), &NewtonOptions::default(), &mut |it| {
        seen.push((it.k, it.lambda));
        assert!((it.energy - 0.5 * it.a).abs() <= 1e-15 * it.a);
    })
    .unwrap();
    assert_eq!(seen.len(), out.iterations());
    for (k, lambda) in seen {
        assert_eq!(out.history[k].lambda, Some(lambda));
    }
}
