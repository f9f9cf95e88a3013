//! Numerical laboratory for spherical needlets on Poisson random fields.
//!
//! The crate builds needlet frames on the sphere, simulates spherical Poisson
//! point processes, computes normalized needlet coefficients and their exact
//! covariances, evaluates Berry–Esseen type bounds for the normal
//! approximation of those coefficients, and estimates distances to
//! Gaussianity from Monte Carlo samples.

pub mod bounds;
pub mod coefficients;
pub mod distance;
mod error;
pub mod field;
pub mod needlet;
pub mod rng;
pub mod sphere;

pub use error::{Error, Result};
