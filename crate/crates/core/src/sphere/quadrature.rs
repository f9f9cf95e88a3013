//! Exact product quadrature on the sphere.
//!
//! Nodes are Gauss–Legendre in `cos θ` crossed with equispaced longitudes.
//! [`QuadratureGrid::product`] uses `L + 1` longitudes on every ring and is
//! exact for all spherical polynomials of degree `≤ L`.
//! [`QuadratureGrid::reduced`] trims the longitude count on rings close to the
//! poles to the smallest count whose aliased harmonics are below a fixed
//! threshold; weights then scale uniformly like `L^{-2}`, which is what the
//! needlet centers need.

use super::legendre::normalized_assoc_legendre;
use super::SpherePoint;
use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// Largest node count a grid may have unless a larger budget is passed.
pub const DEFAULT_NODE_BUDGET: usize = 4_000_000;

/// Aliasing threshold for reduced rings, on orthonormal harmonics.
const REDUCED_ALIAS_TOL: f64 = 1e-15;

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

/// Gauss–Legendre nodes (descending) and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < NEWTON_TOL {
                dp = legendre_and_derivative(n, x).1;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// One ring of constant colatitude.
#[derive(Debug, Clone, Serialize)]
pub struct Ring {
    pub cos_theta: f64,
    /// Gauss–Legendre weight in `cos θ`.
    pub gl_weight: f64,
    pub n_phi: usize,
    /// Index of the first node of this ring in the flattened node list.
    pub offset: usize,
}

#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    degree_exact: usize,
    rings: Vec<Ring>,
    nodes: Vec<SpherePoint>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    /// Full product rule of degree `l`, within the default node budget.
    pub fn product(l: usize) -> Result<Self> {
        Self::product_with_budget(l, DEFAULT_NODE_BUDGET)
    }

    pub fn product_with_budget(l: usize, budget: usize) -> Result<Self> {
        let n_theta = (l + 1).div_ceil(2);
        let n_phi = l + 1;
        check_budget(n_theta * n_phi, budget)?;
        Ok(Self::assemble(l, n_theta, |_| n_phi))
    }

    /// Reduced product rule: rings near the poles carry fewer longitudes.
    pub fn reduced(l: usize) -> Result<Self> {
        Self::reduced_with_budget(l, DEFAULT_NODE_BUDGET)
    }

    pub fn reduced_with_budget(l: usize, budget: usize) -> Result<Self> {
        let n_theta = (l + 1).div_ceil(2);
        check_budget(n_theta * (l + 1), budget)?;
        let (nodes, _) = gauss_legendre(n_theta);
        let counts: Vec<usize> = nodes.iter().map(|&x| reduced_ring_size(l, x)).collect();
        Ok(Self::assemble(l, n_theta, |i| counts[i]))
    }

    fn assemble(l: usize, n_theta: usize, n_phi_of: impl Fn(usize) -> usize) -> Self {
        let (ct, wt) = gauss_legendre(n_theta);
        let mut rings = Vec::with_capacity(n_theta);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (i, (&c, &w)) in ct.iter().zip(&wt).enumerate() {
            let n_phi = n_phi_of(i);
            rings.push(Ring { cos_theta: c, gl_weight: w, n_phi, offset: nodes.len() });
            let dphi = 2.0 * PI / n_phi as f64;
            for k in 0..n_phi {
                nodes.push(SpherePoint::from_cos_theta(c, k as f64 * dphi));
                weights.push(w * dphi);
            }
        }
        Self { degree_exact: l, rings, nodes, weights }
    }

    pub fn degree_exact(&self) -> usize {
        self.degree_exact
    }

    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(&SpherePoint) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

fn check_budget(nodes: usize, budget: usize) -> Result<()> {
    if nodes > budget {
        return Err(Error::Resource(format!("{nodes} quadrature nodes exceed budget {budget}")));
    }
    Ok(())
}

/// Smallest longitude count `n` such that every orthonormal harmonic of
/// degree `≤ l` and order `≥ n` is below the aliasing threshold on this ring.
fn reduced_ring_size(l: usize, cos_theta: f64) -> usize {
    let mut buf = Vec::with_capacity(l + 1);
    for m in (1..=l).rev() {
        normalized_assoc_legendre(m, l, cos_theta, &mut buf);
        if buf.iter().any(|v| v.abs() > REDUCED_ALIAS_TOL) {
            return m + 1;
        }
    }
    1
}
