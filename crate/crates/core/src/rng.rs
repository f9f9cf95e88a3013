//! Seeded random number generation shared by every stochastic routine.

use crate::sphere::SpherePoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub type SimRng = ChaCha8Rng;

/// Generator for a single replicate; replicate `r` of a run uses `base + r`.
pub fn rng_for(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly distributed point on the sphere (Archimedes' projection).
#[inline]
pub fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R) -> SpherePoint {
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let phi: f64 = 2.0 * PI * rng.random::<f64>();
    SpherePoint::from_cos_theta(z, phi)
}
