//! An ensemble of typical trajectories compared with the quantum marginals
//! (Kolmogorov–Smirnov distances at two checkpoints).

use multitime::initdata::{build_gaussian_product, GaussianProductSpec, DEFAULT_AMPLITUDE_SEED};
use multitime::solver::{Solver, SolverConfig};
use multitime::trajectories::{run_ensemble, MarginalGrid, TrajectoryOptions};

fn main() -> multitime::Result<()> {
    let spec = GaussianProductSpec {
        amplitudes: GaussianProductSpec::random_amplitudes(DEFAULT_AMPLITUDE_SEED, 0.0),
        ..GaussianProductSpec::default()
    };
    let solver = Solver::new(build_gaussian_product(&spec)?, SolverConfig::default())?;
    let opts = TrajectoryOptions { t_max: 0.5, ..TrajectoryOptions::default() };
    let n = 100;
    let res = run_ensemble(&solver, n, 1, &[0.25, 0.5], &opts, MarginalGrid::default())?;
    println!("n = {n}, graveyard fraction = {}", res.graveyard_fraction);
    for c in &res.checkpoints {
        println!(
            "t = {:.2}: KS photon {:.4}, KS electron {:.4} (99% critical {:.4}), grid mass {:.8}",
            c.t, c.ks_ph, c.ks_el, c.ks_critical_99, c.grid_mass
        );
    }
    Ok(())
}
