//! Density, flux and Bohmian velocity on an equal-time slice, and the
//! separated peaks of the density after the collision.

use multitime::current::{default_eps_node, density_flux, density_grid, density_peaks, velocity};
use multitime::initdata::{build_gaussian_product, GaussianProductSpec, DEFAULT_AMPLITUDE_SEED};
use multitime::solver::{Solver, SolverConfig};

fn main() -> multitime::Result<()> {
    let spec = GaussianProductSpec {
        amplitudes: GaussianProductSpec::random_amplitudes(DEFAULT_AMPLITUDE_SEED, 0.0),
        ..GaussianProductSpec::default()
    };
    let data = build_gaussian_product(&spec)?;
    let eps = default_eps_node(&data);
    let solver = Solver::new(data, SolverConfig::default())?;

    let t = 0.4;
    for (s_ph, s_el) in [(0.2, 0.8), (0.35, 0.62), (-0.3, 1.3)] {
        let df = density_flux(&solver, t, s_ph, s_el)?;
        let v = velocity(&solver, t, s_ph, s_el, eps)?;
        println!(
            "t = {t}: rho({s_ph}, {s_el}) = {:.4e}, J = ({:.4e}, {:.4e}), v = ({:+.4}, {:+.4})",
            df.rho, df.j[0], df.j[1], v.v_ph, v.v_el
        );
    }

    let grid = density_grid(&solver, 0.8, 121)?;
    println!("t = 0.8: grid probability {:.4}", grid.riemann_total());
    for p in density_peaks(&grid, 0.05) {
        println!("  peak at ({:+.3}, {:+.3}) rho = {:.3}, prominence = {:.3}", p.s_ph, p.s_el, p.rho, p.prominence);
    }
    Ok(())
}
