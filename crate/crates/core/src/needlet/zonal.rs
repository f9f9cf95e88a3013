//! Zonal profiles of needlets and one-dimensional integrals against them.
//!
//! A needlet is `ψ_jk(x) = √λ_jk · g_j(⟨x, ξ_jk⟩)` with the zonal profile
//! `g_j(u) = Σ_l b(l/B^j) (2l+1)/(4π) P_l(u)`, so most integrals over the
//! sphere reduce to integrals in the colatitude around the center.

use crate::error::{Error, Result};
use crate::sphere::gauss_legendre;
use crate::sphere::legendre::{legendre_series, legendre_series_with_derivative};
use std::f64::consts::PI;

/// Legendre-series coefficients of the zonal profile at one scale.
#[derive(Debug, Clone)]
pub struct ScaleProfile {
    /// `coeffs[l] = b(l/B^j)(2l+1)/(4π)`, zero below `l_min`.
    coeffs: Vec<f64>,
    /// `b(l/B^j)` for every `l ≤ l_max`.
    window: Vec<f64>,
    l_min: usize,
}

impl ScaleProfile {
    pub(crate) fn new(window: Vec<f64>) -> Self {
        let l_min = window.iter().position(|&b| b != 0.0).unwrap_or(window.len());
        let mut last = window.len();
        while last > 0 && window[last - 1] == 0.0 {
            last -= 1;
        }
        let window = window[..last].to_vec();
        let coeffs = window
            .iter()
            .enumerate()
            .map(|(l, b)| b * (2 * l + 1) as f64 / (4.0 * PI))
            .collect();
        Self { coeffs, window, l_min }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `b(l/B^j)` values indexed by `l`.
    pub fn window_values(&self) -> &[f64] {
        &self.window
    }

    pub fn l_min(&self) -> usize {
        self.l_min
    }

    /// Highest multipole with a non-zero window value.
    pub fn l_max(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        legendre_series(&self.coeffs, u)
    }

    /// `Σ_l b²(l/B^j)(2l+1)/(4π)`, which is `‖ψ_jk‖²₂ / λ_jk`.
    pub fn l2_norm_sq_unit_weight(&self) -> f64 {
        self.window
            .iter()
            .enumerate()
            .map(|(l, b)| b * b * (2 * l + 1) as f64 / (4.0 * PI))
            .sum()
    }

    /// Coefficients of `G_j(u) = Σ_l b²(2l+1)/(4π) P_l(u)`; `λ₁^{1/2} λ₂^{1/2} G_j(⟨ξ₁,ξ₂⟩)`
    /// is the L² inner product of two needlets at the same scale.
    pub fn gram_coeffs(&self) -> Vec<f64> {
        self.window
            .iter()
            .enumerate()
            .map(|(l, b)| b * b * (2 * l + 1) as f64 / (4.0 * PI))
            .collect()
    }
}

/// Cubic Hermite lookup table for a zonal profile, for Monte Carlo loops.
///
/// The profile is tabulated in `s = sin(θ/2)` on the northern half and in
/// `cos(θ/2)` on the southern half, which keeps the node spacing uniform in
/// angle near both poles.
#[derive(Debug, Clone)]
pub struct ZonalTable {
    n: usize,
    north: Vec<(f64, f64)>,
    south: Vec<(f64, f64)>,
}

impl ZonalTable {
    pub fn new(coeffs: &[f64]) -> Self {
        let l = coeffs.len().max(1);
        let n = 160 * l + 64;
        let tab = |sign: f64| -> Vec<(f64, f64)> {
            (0..=n)
                .map(|i| {
                    let s = i as f64 / n as f64;
                    // north: u = 1 - 2s², south: u = -1 + 2s²
                    let u = sign * (1.0 - 2.0 * s * s);
                    let (v, dv) = legendre_series_with_derivative(coeffs, u);
                    (v, dv * sign * (-4.0 * s))
                })
                .collect()
        };
        Self { n, north: tab(1.0), south: tab(-1.0) }
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        let (table, s) = if u >= 0.0 {
            (&self.north, ((1.0 - u) * 0.5).max(0.0).sqrt())
        } else {
            (&self.south, ((1.0 + u) * 0.5).max(0.0).sqrt())
        };
        let h = 1.0 / self.n as f64;
        let t = s * self.n as f64;
        let i = (t as usize).min(self.n - 1);
        let x = t - i as f64;
        let (y0, d0) = table[i];
        let (y1, d1) = table[i + 1];
        let x2 = x * x;
        let x3 = x2 * x;
        (2.0 * x3 - 3.0 * x2 + 1.0) * y0
            + (x3 - 2.0 * x2 + x) * d0 * h
            + (-2.0 * x3 + 3.0 * x2) * y1
            + (x3 - x2) * d1 * h
    }
}

/// Points in (0, π) where the profile changes sign, refined by bisection.
fn sign_changes(coeffs: &[f64]) -> Vec<f64> {
    let l = coeffs.len().max(1);
    let m = 16 * l + 64;
    let f = |theta: f64| legendre_series(coeffs, theta.cos());
    let mut roots = Vec::new();
    let mut prev_t = 0.0;
    let mut prev_v = f(0.0);
    for i in 1..=m {
        let t = PI * i as f64 / m as f64;
        let v = f(t);
        if prev_v != 0.0 && v != 0.0 && (prev_v < 0.0) != (v < 0.0) {
            let (mut a, mut b, mut fa) = (prev_t, t, prev_v);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let fm = f(mid);
                if (fm < 0.0) == (fa < 0.0) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_t = t;
        prev_v = v;
    }
    roots
}

const ZONAL_REL_TOL: f64 = 1e-5;

/// `∫_0^π |g(cos θ)|^p w(θ) sin θ dθ` for a zonal profile `g`, integrating
/// between consecutive sign changes with Gauss–Legendre rules of two sizes.
pub fn zonal_abs_power_integral(coeffs: &[f64], p: f64, weight: impl Fn(f64) -> f64) -> Result<f64> {
    let mut breaks = vec![0.0];
    breaks.extend(sign_changes(coeffs));
    breaks.push(PI);
    let panel = |n: usize| -> f64 {
        let (x, w) = gauss_legendre(n);
        let mut total = 0.0;
        for seg in breaks.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (xi, wi) in x.iter().zip(&w) {
                let t = mid + half * xi;
                let g = legendre_series(coeffs, t.cos()).abs();
                total += wi * half * g.powf(p) * t.sin() * weight(t);
            }
        }
        total
    };
    let coarse = panel(20);
    let fine = panel(40);
    let scale = fine.abs().max(f64::MIN_POSITIVE);
    if ((coarse - fine) / scale).abs() > ZONAL_REL_TOL {
        return Err(Error::Convergence(format!(
            "zonal integral changed by {:.3e} relative on refinement",
            ((coarse - fine) / scale).abs()
        )));
    }
    Ok(fine)
}

/// `max_θ |g(cos θ)|`, checked against a doubled scan resolution.
pub fn zonal_sup(coeffs: &[f64]) -> Result<f64> {
    let l = coeffs.len().max(1);
    let scan = |m: usize| {
        (0..=m)
            .map(|i| legendre_series(coeffs, (PI * i as f64 / m as f64).cos()).abs())
            .fold(0.0, f64::max)
    };
    let coarse = scan(64 * l + 64);
    let fine = scan(128 * l + 128);
    if ((fine - coarse) / fine.max(f64::MIN_POSITIVE)).abs() > ZONAL_REL_TOL {
        return Err(Error::Convergence("sup-norm scan did not stabilize".into()));
    }
    Ok(fine)
}
