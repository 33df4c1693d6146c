//! Trajectories: the Compton bounce, exact straight lines for a single null
//! component, RK4 convergence order, determinism, θ-independence, sampling
//! statistics and the global-existence diagnostics.

mod common;

use std::sync::{Arc, OnceLock};

use common::{data_with_theta, default_solver, free_solver};
use multitime::current::{density_flux, velocity};
use multitime::initdata::{GaussianProductField, InitialData, KillingVector};
use multitime::solver::{Solver, SolverConfig};
use multitime::trajectories::{
    integrate_trajectory, interpolate_cdf, ks_statistic, run_ensemble, sample_initial, slice_masses, tt_diagnostics,
    DiagnosticGrid, MarginalGrid, Trajectory, TrajectoryOptions, TrajectoryStatus,
};
use multitime::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn solver() -> &'static Solver {
    static S: OnceLock<Solver> = OnceLock::new();
    S.get_or_init(default_solver)
}

fn opts(t_max: f64) -> TrajectoryOptions {
    TrajectoryOptions { t_max, ..TrajectoryOptions::default() }
}

fn check_invariants(tr: &Trajectory) {
    for w in tr.samples.windows(2) {
        let (a, b) = (w[0], w[1]);
        let dt = b.t - a.t;
        assert!(dt > 0.0, "time must increase");
        assert!((b.q_ph - a.q_ph).abs() <= dt * (1.0 + 1e-9) + 1e-15, "photon faster than light");
        assert!((b.q_el - a.q_el).abs() <= dt * (1.0 + 1e-9) + 1e-15, "electron faster than light");
    }
    assert!(tr.samples.iter().all(|s| s.q_ph < s.q_el), "left the configuration space");
}

#[test]
fn compton_bounce_reflects_while_free_particles_cross() {
    let o = opts(1.0);
    let a = integrate_trajectory(solver(), (0.02, 0.98), &o).unwrap();
    assert_eq!(a.status, TrajectoryStatus::ReachedTmax);
    assert!(a.min_separation() > 0.0);
    check_invariants(&a);
    // The photon first moves right, then is turned around near closest approach.
    let eps = 0.0;
    let closest = a.samples.iter().min_by(|x, y| (x.q_el - x.q_ph).total_cmp(&(y.q_el - y.q_ph))).unwrap();
    let before = a.samples.iter().find(|s| s.t >= closest.t - 0.1).unwrap();
    let after = a.samples.iter().find(|s| s.t >= closest.t + 0.1).unwrap();
    assert!(velocity(solver(), before.t, before.q_ph, before.q_el, eps).unwrap().v_ph > 0.0);
    assert!(velocity(solver(), after.t, after.q_ph, after.q_el, eps).unwrap().v_ph < 0.0);

    let b = integrate_trajectory(&free_solver(), (0.02, 0.98), &o).unwrap();
    assert!(b.samples.iter().any(|s| s.q_ph > s.q_el));
}

#[test]
fn single_null_component_moves_on_straight_lines() {
    // Only ψ₋₋: both particles move to the right at the speed of light. A tiny
    // mass keeps the other components negligible; X is fixed explicitly since
    // the π-vector of such data is null.
    let field = GaussianProductField::new(
        0.1,
        1.0,
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        None,
    );
    let data = InitialData::with_frame(Arc::new(field), 0.0, KillingVector::REST, "minus-minus only").unwrap();
    let cfg = SolverConfig { omega: 1e-6, ..SolverConfig::default() };
    let s = Solver::new(data, cfg).unwrap();
    let o = TrajectoryOptions { dt: 0.01, t_max: 0.5, ..TrajectoryOptions::default() };
    let tr = integrate_trajectory(&s, (0.05, 0.9), &o).unwrap();
    assert_eq!(tr.status, TrajectoryStatus::ReachedTmax);
    for p in &tr.samples {
        assert!((p.q_ph - (0.05 + p.t)).abs() < 1e-9 && (p.q_el - (0.9 + p.t)).abs() < 1e-9, "{p:?}");
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    let q0 = (0.03, 1.02);
    let end = |dt: f64| {
        let o = TrajectoryOptions { dt, t_max: 0.32, ..TrajectoryOptions::default() };
        integrate_trajectory(solver(), q0, &o).unwrap().last()
    };
    let reference = end(0.00125);
    let err = |dt: f64| {
        let p = end(dt);
        (p.q_ph - reference.q_ph).abs().max((p.q_el - reference.q_el).abs())
    };
    let (e1, e2) = (err(0.02), err(0.01));
    let ratio = e1 / e2;
    assert!(ratio > 10.0, "error ratio {ratio} (errors {e1:e}, {e2:e})");
}

#[test]
fn integration_is_deterministic() {
    let o = opts(0.4);
    let a = integrate_trajectory(solver(), (0.1, 0.9), &o).unwrap();
    let b = integrate_trajectory(solver(), (0.1, 0.9), &o).unwrap();
    assert_eq!(a, b);
    assert_eq!(sample_initial(solver().data(), 50, 9).unwrap(), sample_initial(solver().data(), 50, 9).unwrap());
    assert_ne!(sample_initial(solver().data(), 50, 9).unwrap(), sample_initial(solver().data(), 50, 10).unwrap());
}

#[test]
fn theta_does_not_change_trajectories_of_separated_data() {
    let data = data_with_theta(0.0);
    let a = Solver::new(data.clone(), SolverConfig::default()).unwrap();
    let b = Solver::new(data.with_theta(std::f64::consts::FRAC_PI_2), SolverConfig::default()).unwrap();
    let o = opts(1.0);
    for q0 in [(0.02, 0.98), (-0.1, 1.05), (0.12, 0.9)] {
        let (ta, tb) = (integrate_trajectory(&a, q0, &o).unwrap(), integrate_trajectory(&b, q0, &o).unwrap());
        assert_eq!(ta.samples.len(), tb.samples.len());
        let sup = ta
            .samples
            .iter()
            .zip(&tb.samples)
            .map(|(x, y)| (x.q_ph - y.q_ph).abs().max((x.q_el - y.q_el).abs()))
            .fold(0.0, f64::max);
        assert!(sup < 1e-4, "{q0:?}: sup difference {sup:e}");
    }
}

#[test]
fn preconditions_are_enforced() {
    let o = opts(0.1);
    assert!(matches!(integrate_trajectory(solver(), (0.9, 0.1), &o), Err(Error::Precondition(_))));
    assert!(matches!(integrate_trajectory(solver(), (-3.0, 4.0), &o), Err(Error::Precondition(_))));
    let bad = TrajectoryOptions { dt: -1.0, ..TrajectoryOptions::default() };
    assert!(matches!(integrate_trajectory(solver(), (0.0, 1.0), &bad), Err(Error::Precondition(_))));
    // A moving frame is rejected: the guidance law is written in the rest frame.
    let moving = solver().data().with_killing(KillingVector { x0: 1.25, x1: 0.75 }).unwrap();
    let s = Solver::new(moving, SolverConfig::default()).unwrap();
    assert!(matches!(integrate_trajectory(&s, (0.0, 1.0), &o), Err(Error::Precondition(_))));
}

#[test]
fn sampled_marginal_means_match_quadrature() {
    let data = solver().data();
    let n = 10_000;
    let pts = sample_initial(data, n, 3).unwrap();
    // Quadrature means and standard deviations of the two marginals.
    let r = data.support();
    let m = 401;
    let (hx, hy) = ((r.ph_hi - r.ph_lo) / (m - 1) as f64, (r.el_hi - r.el_lo) / (m - 1) as f64);
    let (mut z, mut mx, mut my, mut vx, mut vy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..m {
        for k in 0..m {
            let (x, y) = (r.ph_lo + hx * i as f64, r.el_lo + hy * k as f64);
            let rho: f64 = data.eval(x, y).iter().map(|c| c.norm_sqr()).sum();
            z += rho;
            mx += rho * x;
            my += rho * y;
            vx += rho * x * x;
            vy += rho * y * y;
        }
    }
    let (mx, my) = (mx / z, my / z);
    let (sx, sy) = ((vx / z - mx * mx).sqrt(), (vy / z - my * my).sqrt());
    assert!(mx.abs() < 1e-9 && (my - 1.0).abs() < 1e-9);
    let ex = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let ey = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let bound = |s: f64| 3.0 * s / (n as f64).sqrt();
    assert!((ex - mx).abs() < bound(sx), "photon mean {ex} vs {mx}");
    assert!((ey - my).abs() < bound(sy), "electron mean {ey} vs {my}");
    let one = sample_initial(data, 1, 77).unwrap()[0];
    assert!(r.contains(one.0, one.1) && density_flux(solver(), 0.0, one.0, one.1).unwrap().rho > 0.0);
}

#[test]
fn sampler_matches_initial_marginals() {
    let n = 2000;
    let pts = sample_initial(solver().data(), n, 5).unwrap();
    let masses = slice_masses(solver(), 0.0, 200, 2).unwrap();
    for axis in 0..2 {
        let cdf = masses.marginal_cdf(axis);
        let xs: Vec<f64> = pts.iter().map(|p| if axis == 0 { p.0 } else { p.1 }).collect();
        let d = ks_statistic(&xs, |x| interpolate_cdf(&masses.edges, &cdf, x));
        assert!(d < 1.36 / (n as f64).sqrt(), "axis {axis}: KS {d}");
    }
}

#[test]
fn small_ensemble_is_reproducible() {
    let o = opts(0.3);
    let grid = MarginalGrid { cells: 120, order: 2 };
    let a = run_ensemble(solver(), 20, 4, &[0.15, 0.3], &o, grid).unwrap();
    let b = run_ensemble(solver(), 20, 4, &[0.15, 0.3], &o, grid).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.checkpoints.len(), 2);
    assert!((0.0..=1.0).contains(&a.graveyard_fraction));
    for tr in &a.trajectories {
        check_invariants(tr);
        assert!(tr.at(0.15).is_some() && tr.at(0.3).is_some());
    }
}

#[test]
fn global_existence_diagnostics() {
    let grid = DiagnosticGrid { times: vec![0.0, 0.5, 1.0], n: 30, n_boundary: 20, ..DiagnosticGrid::default() };
    let rep = tt_diagnostics(solver(), &grid).unwrap();
    assert!(rep.max_flux_ratio <= 2f64.sqrt() + 1e-9);
    assert!(rep.max_boundary_flux < 1e-6);
    assert!(rep.max_critical_integrand.is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sampled_trajectories_respect_the_light_cone(seed in 0u64..1000) {
        let q0 = sample_initial(solver().data(), 1, seed).unwrap()[0];
        let tr = integrate_trajectory(solver(), q0, &opts(0.3)).unwrap();
        check_invariants(&tr);
    }
}
