//! Error type shared by every module of the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building data, evaluating the wave
/// function, or integrating trajectories.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain on which an operation is defined
    /// (non-finite input, negative time, a configuration outside the wedge).
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge on [{a}, {b}] (estimated error {estimate:e}, tolerance {tol:e})")]
    Tolerance { a: f64, b: f64, estimate: f64, tol: f64 },

    /// Initial data or a spec is malformed (zero state, bad width, ...).
    #[error("invalid initial data: {0}")]
    InvalidData(String),

    /// The boundary condition and the data disagree on the coincidence set.
    #[error("compatibility violated: residual {residual:e} at s = {s}")]
    Compatibility { residual: f64, s: f64 },

    /// A vector that must be time-like and future-directed is not.
    #[error("causality error: ({x0}, {x1}) is not time-like and future-directed")]
    Causality { x0: f64, x1: f64 },

    /// One photon-spin block vanishes, so the blocks cannot be balanced.
    #[error("cannot balance the photon-spin blocks: the {0} block is identically zero")]
    Balance(&'static str),

    /// The density is at or below the node threshold.
    #[error("node: density {rho:e} is not above eps_node = {eps_node:e}")]
    Node { rho: f64, eps_node: f64 },

    /// A precondition of a trajectory/ensemble operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Rejection sampling is too inefficient to be trusted.
    #[error("rejection sampling acceptance rate {rate:e} is below 1e-4")]
    SamplingEfficiency { rate: f64 },
}
