//! Gaussian-product initial data: normalisation, the distinguished frame X
//! and the compatibility condition on the coincidence set.

use multitime::initdata::{build_gaussian_product, compute_pi, GaussianProductSpec, DEFAULT_AMPLITUDE_SEED};

fn main() -> multitime::Result<()> {
    let theta = 0.0;
    let spec = GaussianProductSpec {
        amplitudes: GaussianProductSpec::random_amplitudes(DEFAULT_AMPLITUDE_SEED, theta),
        ..GaussianProductSpec::default()
    };
    let data = build_gaussian_product(&spec)?;
    let (pi0, pi1) = compute_pi(&data, 1e-12)?;
    let x = data.killing();
    println!("{}", data.description());
    println!("pi = ({pi0:.12}, {pi1:.3e}), X = ({}, {})", x.x0, x.x1);
    println!("boundary coefficient = {:.6}", data.boundary_coefficient());
    let (worst, at) = data.compatibility_residual(401);
    println!("compatibility residual on the diagonal: {worst:.2e} at s = {at:.3}");
    for (s_ph, s_el) in [(0.0, 1.0), (0.1, 0.9), (0.5, 0.5)] {
        let psi = data.eval(s_ph, s_el);
        println!("psi0({s_ph}, {s_el}) = [{:.4}, {:.4}, {:.4}, {:.4}]", psi[0], psi[1], psi[2], psi[3]);
    }
    Ok(())
}
