//! Smooth window function `b` with compact support in `[1/B, B]`.
//!
//! The window is derived from a smooth step `Ψ` built from the bump
//! `exp(-1/(1-t²))`:
//!
//! ```text
//! φ(t) = 1                                   t ≤ 1/B
//! φ(t) = Ψ(1 - 2B/(B-1) · (t - 1/B))         1/B < t ≤ 1
//! φ(t) = 0                                   t > 1
//! b(ξ) = sqrt(φ(ξ/B) - φ(ξ))
//! ```
//!
//! `Ψ` is tabulated once by composite Simpson integration of the bump and
//! evaluated with monotone cubic Hermite interpolation, so `φ` is
//! non-increasing and the squares of `b` telescope to one for `ξ ≥ 1`.

use crate::error::{Error, Result};
use serde::Serialize;

pub const MIN_GRID_SIZE: usize = 256;
const PARTITION_TOL: f64 = 1e-8;

fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// Tabulated smooth step on [-1, 1], rising from 0 to 1.
#[derive(Debug, Clone)]
struct SmoothStep {
    values: Vec<f64>,
    slopes: Vec<f64>,
    h: f64,
}

impl SmoothStep {
    fn new(n: usize) -> Self {
        let h = 2.0 / n as f64;
        let mut values = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for i in 0..n {
            let a = -1.0 + i as f64 * h;
            let b = a + h;
            acc += h / 6.0 * (bump(a) + 4.0 * bump(0.5 * (a + b)) + bump(b));
            values.push(acc);
        }
        let total = acc;
        for v in values.iter_mut() {
            *v /= total;
        }
        // exact derivative, then Fritsch–Carlson limiting for monotonicity
        let mut slopes: Vec<f64> = (0..=n).map(|i| bump(-1.0 + i as f64 * h) / total).collect();
        for i in 0..n {
            let delta = (values[i + 1] - values[i]) / h;
            if delta <= 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let a = slopes[i] / delta;
            let b = slopes[i + 1] / delta;
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slopes[i] = tau * a * delta;
                slopes[i + 1] = tau * b * delta;
            }
        }
        Self { values, slopes, h }
    }

    fn eval(&self, u: f64) -> f64 {
        if u <= -1.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let n = self.values.len() - 1;
        let t = (u + 1.0) / self.h;
        let i = (t.floor() as usize).min(n - 1);
        let s = t - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.h, self.slopes[i + 1] * self.h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1
    }
}

#[derive(Debug, Clone)]
pub struct NeedletWindow {
    base: f64,
    grid_size: usize,
    step: SmoothStep,
    /// Max deviation of `b` against the doubled-resolution construction.
    resolution_delta: f64,
    partition_residual: f64,
}

/// Audit numbers reported by `frame-check`.
#[derive(Debug, Clone, Serialize)]
pub struct WindowAudit {
    pub base: f64,
    pub grid_size: usize,
    pub partition_residual: f64,
    pub support_violations: usize,
    pub resolution_delta: f64,
    pub max_abs_derivative: f64,
}

impl NeedletWindow {
    pub fn new(base: f64, grid_size: usize) -> Result<Self> {
        if !(base > 1.0) || !base.is_finite() {
            return Err(Error::Invalid(format!("window base must exceed 1, got {base}")));
        }
        if grid_size < MIN_GRID_SIZE {
            return Err(Error::Invalid(format!(
                "construction grid size {grid_size} below minimum {MIN_GRID_SIZE}"
            )));
        }
        let step = SmoothStep::new(grid_size);
        let fine = SmoothStep::new(2 * grid_size);
        let mut w = Self { base, grid_size, step, resolution_delta: 0.0, partition_residual: 0.0 };
        let mut delta: f64 = 0.0;
        for i in 0..=1000 {
            let xi = 1.0 / base + (base - 1.0 / base) * i as f64 / 1000.0;
            let coarse = w.eval(xi);
            let fine_b = w.eval_with(&fine, xi);
            delta = delta.max((coarse - fine_b).abs());
        }
        w.resolution_delta = delta;
        w.partition_residual = w.partition_residual_on(200);
        if w.partition_residual > PARTITION_TOL {
            return Err(Error::Construction(format!(
                "partition-of-unity residual {} exceeds {PARTITION_TOL}",
                w.partition_residual
            )));
        }
        Ok(w)
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    fn phi(&self, step: &SmoothStep, t: f64) -> f64 {
        let b = self.base;
        if t <= 1.0 / b {
            1.0
        } else if t > 1.0 {
            0.0
        } else {
            step.eval(1.0 - 2.0 * b / (b - 1.0) * (t - 1.0 / b))
        }
    }

    fn eval_with(&self, step: &SmoothStep, xi: f64) -> f64 {
        let b = self.base;
        if xi <= 1.0 / b || xi >= b {
            return 0.0;
        }
        (self.phi(step, xi / b) - self.phi(step, xi)).max(0.0).sqrt()
    }

    /// `b(ξ)`; zero outside `(1/B, B)`.
    pub fn eval(&self, xi: f64) -> f64 {
        self.eval_with(&self.step, xi)
    }

    /// Largest `|Σ_{j≥0} b²(ξ B^{-j}) - 1|` over `n` points of `[1, B⁵]`.
    pub fn partition_residual_on(&self, n: usize) -> f64 {
        let top = self.base.powi(5);
        (0..n)
            .map(|i| {
                let xi = 1.0 + (top - 1.0) * i as f64 / (n - 1).max(1) as f64;
                let mut sum = 0.0;
                let mut x = xi;
                while x > 1.0 / self.base {
                    let v = self.eval(x);
                    sum += v * v;
                    x /= self.base;
                }
                (sum - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn audit(&self) -> WindowAudit {
        let b = self.base;
        let mut violations = 0;
        for i in 0..=2000 {
            let xi = 1e-3 + (4.0 * b) * i as f64 / 2000.0;
            let outside = xi <= 1.0 / b || xi >= b;
            let v = self.eval(xi);
            if outside && v != 0.0 || v < 0.0 {
                violations += 1;
            }
        }
        let h = (b - 1.0 / b) / 4000.0;
        let mut max_d: f64 = 0.0;
        for i in 1..4000 {
            let xi = 1.0 / b + i as f64 * h;
            let d = (self.eval(xi + h) - self.eval(xi - h)) / (2.0 * h);
            max_d = max_d.max(d.abs());
        }
        WindowAudit {
            base: b,
            grid_size: self.grid_size,
            partition_residual: self.partition_residual_on(200),
            support_violations: violations,
            resolution_delta: self.resolution_delta,
            max_abs_derivative: max_d,
        }
    }
}
