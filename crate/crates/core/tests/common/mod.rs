//! Shared fixtures for the integration tests.
#![allow(dead_code)]

pub mod bessel;

use multitime::initdata::{build_gaussian_product, GaussianProductSpec, InitialData, DEFAULT_AMPLITUDE_SEED};
use multitime::solver::{Solver, SolverConfig};

/// σ = 0.1, d = 1, θ = 0 with the seeded random amplitudes.
pub fn default_data() -> InitialData {
    data_with_theta(0.0)
}

pub fn data_with_theta(theta: f64) -> InitialData {
    let spec = GaussianProductSpec {
        amplitudes: GaussianProductSpec::random_amplitudes(DEFAULT_AMPLITUDE_SEED, theta),
        theta,
        ..GaussianProductSpec::default()
    };
    build_gaussian_product(&spec).expect("default data build")
}

pub fn default_solver() -> Solver {
    Solver::new(default_data(), SolverConfig::default()).expect("default solver")
}

pub fn free_solver() -> Solver {
    Solver::new(default_data(), SolverConfig::default().free()).expect("free solver")
}
