//! A single pair of Bohmian trajectories: with the contact interaction the
//! photon bounces off the electron; without it the two pass through each
//! other.

use multitime::initdata::{build_gaussian_product, GaussianProductSpec, DEFAULT_AMPLITUDE_SEED};
use multitime::solver::{Solver, SolverConfig};
use multitime::trajectories::{integrate_trajectory, TrajectoryOptions};

fn main() -> multitime::Result<()> {
    let spec = GaussianProductSpec {
        amplitudes: GaussianProductSpec::random_amplitudes(DEFAULT_AMPLITUDE_SEED, 0.0),
        ..GaussianProductSpec::default()
    };
    let data = build_gaussian_product(&spec)?;
    let interacting = Solver::new(data.clone(), SolverConfig::default())?;
    let free = Solver::new(data, SolverConfig::default().free())?;

    let opts =
        TrajectoryOptions { checkpoints: (1..10).map(|k| 0.1 * k as f64).collect(), ..TrajectoryOptions::default() };
    let q0 = (0.02, 0.98);
    let a = integrate_trajectory(&interacting, q0, &opts)?;
    let b = integrate_trajectory(&free, q0, &opts)?;

    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "t", "q_ph", "q_el", "free q_ph", "free q_el");
    for k in 0..=10 {
        let t = if k == 10 { 1.0 } else { 0.1 * k as f64 };
        if let (Some(x), Some(y)) = (a.at(t), b.at(t)) {
            println!("{t:>5.1} {:>10.5} {:>10.5} {:>10.5} {:>10.5}", x.q_ph, x.q_el, y.q_ph, y.q_el);
        }
    }
    println!("interacting: {}, min separation {:.4}", a.status.label(), a.min_separation());
    println!("free:        {}, min separation {:.4}", b.status.label(), b.min_separation());
    Ok(())
}
