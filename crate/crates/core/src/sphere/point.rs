use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A point on the unit sphere, stored as a unit vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpherePoint {
    pub const NORTH: SpherePoint = SpherePoint { x: 0.0, y: 0.0, z: 1.0 };

    /// Normalizes an arbitrary non-zero vector onto the sphere.
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        let n = (x * x + y * y + z * z).sqrt();
        debug_assert!(n > 0.0, "cannot normalize the zero vector");
        Self { x: x / n, y: y / n, z: z / n }
    }

    /// Builds a point from colatitude `theta` in [0, π] and longitude `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self { x: st * cp, y: st * sp, z: ct }
    }

    /// Builds a point from `cos θ` and longitude, avoiding an extra `acos`.
    pub fn from_cos_theta(cos_theta: f64, phi: f64) -> Self {
        let st = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
        let (sp, cp) = phi.sin_cos();
        Self { x: st * cp, y: st * sp, z: cos_theta }
    }

    pub fn theta(&self) -> f64 {
        self.x.hypot(self.y).atan2(self.z)
    }

    /// Longitude in [0, 2π).
    pub fn phi(&self) -> f64 {
        let p = self.y.atan2(self.x);
        if p < 0.0 {
            p + 2.0 * PI
        } else {
            p
        }
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn antipode(&self) -> Self {
        Self { x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// Maps a point expressed in the local frame whose north pole is `self`
    /// (colatitude `theta`, azimuth `phi` around `self`) back to global
    /// coordinates.
    pub fn local_to_global(&self, theta: f64, phi: f64) -> SpherePoint {
        let (e1, e2) = self.tangent_basis();
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        SpherePoint {
            x: ct * self.x + st * (cp * e1.0 + sp * e2.0),
            y: ct * self.y + st * (cp * e1.1 + sp * e2.1),
            z: ct * self.z + st * (cp * e1.2 + sp * e2.2),
        }
    }

    /// Orthonormal basis of the tangent plane at this point.
    fn tangent_basis(&self) -> ((f64, f64, f64), (f64, f64, f64)) {
        // pick the axis least aligned with self
        let a = if self.x.abs() < 0.9 { (1.0, 0.0, 0.0) } else { (0.0, 1.0, 0.0) };
        let d = a.0 * self.x + a.1 * self.y + a.2 * self.z;
        let u = (a.0 - d * self.x, a.1 - d * self.y, a.2 - d * self.z);
        let n = (u.0 * u.0 + u.1 * u.1 + u.2 * u.2).sqrt();
        let e1 = (u.0 / n, u.1 / n, u.2 / n);
        let e2 = (
            self.y * e1.2 - self.z * e1.1,
            self.z * e1.0 - self.x * e1.2,
            self.x * e1.1 - self.y * e1.0,
        );
        (e1, e2)
    }
}

/// Great-circle distance in [0, π]. The inner product is clamped before `acos`.
pub fn spherical_distance(a: &SpherePoint, b: &SpherePoint) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos()
}
