//! Sphere geometry, Legendre machinery and exact spherical quadrature.

mod harmonic;
pub mod legendre;
mod point;
pub mod quadrature;

pub use harmonic::{HarmonicExpansion, HarmonicTerm};
pub use legendre::{legendre_all, projection_kernel, real_harmonic};
pub use point::{spherical_distance, SpherePoint};
pub use quadrature::{gauss_legendre, QuadratureGrid, DEFAULT_NODE_BUDGET};

/// Full product rule exact to degree `l` (see [`QuadratureGrid::product`]).
pub fn build_quadrature(l: usize) -> crate::Result<QuadratureGrid> {
    QuadratureGrid::product(l)
}
