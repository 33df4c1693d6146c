//! Exact-formula simulator for a two-time electron–photon wave function in
//! one space dimension with a contact interaction.
//!
//! The wave function Ψ(x₁, x₂) has four components ψ_{ς₁ς₂} (photon index
//! first, ς = ± the direction of propagation) and lives on the set of
//! space-like or coincident configurations with the photon to the left of the
//! electron. Given smooth data on the initial surface t_ph = t_el = 0 it is
//! evaluated pointwise from closed-form Riemann-kernel formulas.
//!
//! Modules, in data-flow order:
//!
//! * [`specfun`] – Bessel kernels.
//! * [`quadrature`] – Gauss–Legendre rules and adaptive integration.
//! * [`initdata`] – initial data, compatibility and frame normalisation.
//! * [`solver`] – Ψ at arbitrary configurations.
//! * [`current`] – the conserved tensor current and Bohmian velocities.
//! * [`trajectories`] – trajectory integration, ensembles and statistics.
//! * [`verify`] – residual checks of the equations, boundary condition,
//!   conservation and frame covariance.
//! * [`config`] and [`cli`] – run configuration and the command-line front end.

// Input checks are written as `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod current;
pub mod error;
pub mod initdata;
pub mod quadrature;
pub mod solver;
pub mod specfun;
pub mod trajectories;
pub mod verify;

pub use error::{Error, Result};
