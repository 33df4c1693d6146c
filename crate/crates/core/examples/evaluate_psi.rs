//! Pointwise evaluation of the two-time wave function, with the region each
//! configuration falls into, for the interacting and the free dynamics.

use multitime::initdata::{build_gaussian_product, GaussianProductSpec, DEFAULT_AMPLITUDE_SEED};
use multitime::solver::{Configuration, Solver, SolverConfig};

fn main() -> multitime::Result<()> {
    let spec = GaussianProductSpec {
        amplitudes: GaussianProductSpec::random_amplitudes(DEFAULT_AMPLITUDE_SEED, 0.0),
        ..GaussianProductSpec::default()
    };
    let data = build_gaussian_product(&spec)?;
    let solver = Solver::new(data.clone(), SolverConfig::default())?;
    let free = Solver::new(data, SolverConfig::default().free())?;

    let points = [
        Configuration::equal_time(0.0, 0.0, 1.0),
        Configuration::equal_time(0.3, 0.1, 0.9),
        Configuration::equal_time(0.6, 0.45, 0.55),
        Configuration::new(0.2, 0.3, 0.4, 0.7),
        Configuration::new(0.5, 0.5, 0.5, 0.5),
    ];
    for q in points {
        let (tag, psi) = solver.evaluate_tagged(&q)?;
        let psi_free = free.evaluate(&q)?;
        println!("{q}  [{tag}]");
        println!("    interacting |psi|^2 = {:.6e}", psi.norm_sqr());
        println!("    free        |psi|^2 = {:.6e}", psi_free.norm_sqr());
        if tag.label() == "C" {
            let c = solver.boundary_coefficient();
            println!("    boundary residual |psi_-+ - c psi_+-| = {:.2e}", (psi.mp - c * psi.pm).norm());
        }
    }
    // Time-like separated configurations are not in the domain.
    if let Err(e) = solver.evaluate(&Configuration::new(0.2, 0.3, 0.7, 0.5)) {
        println!("(0.2, 0.3, 0.7, 0.5): {e}");
    }
    Ok(())
}
