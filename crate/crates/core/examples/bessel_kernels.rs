//! Bessel functions and the closed-form kernels of the Klein–Gordon equation.
//!
//! Run with `cargo run --example bessel_kernels`.

use multitime::solver::{goursat_eval, kg_cauchy_eval_mass};
use multitime::specfun::{bessel_j0, bessel_j1};
use num_complex::Complex64;

fn main() -> multitime::Result<()> {
    println!("{:>6} {:>22} {:>22}", "x", "J0(x)", "J1(x)");
    for x in [0.0, 0.5, 2.404825557695773, 8.0, 20.0, 32.0] {
        println!("{x:>6.3} {:>22.15e} {:>22.15e}", bessel_j0(x)?, bessel_j1(x)?);
    }

    // A plane wave e^{i(ks - Et)} with E² = k² + ω² is reproduced from its
    // Cauchy data.
    let (k, omega): (f64, f64) = (1.0, 1.0);
    let e = (k * k + omega * omega).sqrt();
    let f = |s: f64| Complex64::new(0.0, k * s).exp();
    let g = |s: f64| Complex64::new(0.0, -e) * Complex64::new(0.0, k * s).exp();
    let (t, s) = (1.3, 0.4);
    let u = kg_cauchy_eval_mass(f, g, t, s, omega, 1e-12)?;
    let exact = Complex64::new(0.0, k * s - e * t).exp();
    println!("plane wave at (t, s) = ({t}, {s}): |u - exact| = {:.2e}", (u - exact).norm());

    // Constant characteristic data give J0(ω√(t² − s²)).
    let one = |_: f64| Complex64::new(1.0, 0.0);
    let (t, s, omega) = (0.9, 0.3, 2.0);
    let v = goursat_eval(one, one, t, s, omega, 1e-12)?;
    let j0 = bessel_j0(omega * (t * t - s * s).sqrt())?;
    println!("Goursat with unit data: {:.15} vs J0 = {:.15}", v.re, j0);
    Ok(())
}
