use super::window::NeedletWindow;
use super::zonal::{zonal_abs_power_integral, zonal_sup, ScaleProfile, ZonalTable};
use crate::error::{Error, Result};
use crate::sphere::{spherical_distance, QuadratureGrid, SpherePoint, DEFAULT_NODE_BUDGET};
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Window tabulation used by [`NeedletFrame::build`].
pub const DEFAULT_WINDOW_GRID: usize = 4096;
/// Largest admissible `j_max`.
pub const MAX_SCALE: usize = 12;

/// Cubature system and profile at one scale `j`.
#[derive(Debug, Clone)]
pub struct Scale {
    pub j: usize,
    grid: QuadratureGrid,
    profile: ScaleProfile,
}

impl Scale {
    pub fn degree_exact(&self) -> usize {
        self.grid.degree_exact()
    }

    pub fn centers(&self) -> &[SpherePoint] {
        self.grid.nodes()
    }

    pub fn weights(&self) -> &[f64] {
        self.grid.weights()
    }

    /// `K_j`, the number of needlets at this scale.
    pub fn count(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn profile(&self) -> &ScaleProfile {
        &self.profile
    }

    pub fn table(&self) -> ZonalTable {
        ZonalTable::new(self.profile.coeffs())
    }
}

/// Needlet frame with scales `0..=j_max`.
///
/// Needlet centers at scale `j` are the nodes of a reduced product cubature
/// of degree `⌈2B^{j+1}⌉`; weights are the cubature weights.
#[derive(Debug, Clone)]
pub struct NeedletFrame {
    base: f64,
    window: NeedletWindow,
    scales: Vec<Scale>,
}

impl NeedletFrame {
    pub fn build(base: f64, j_max: usize) -> Result<Self> {
        Self::build_with(base, j_max, DEFAULT_WINDOW_GRID, DEFAULT_NODE_BUDGET)
    }

    pub fn build_with(base: f64, j_max: usize, window_grid: usize, node_budget: usize) -> Result<Self> {
        if j_max < 1 || j_max > MAX_SCALE {
            return Err(Error::Invalid(format!("j_max must lie in 1..={MAX_SCALE}, got {j_max}")));
        }
        let window = NeedletWindow::new(base, window_grid)?;
        let mut scales = Vec::with_capacity(j_max + 1);
        for j in 0..=j_max {
            let bj = base.powi(j as i32);
            let degree = (2.0 * base.powi(j as i32 + 1)).ceil() as usize;
            let grid = QuadratureGrid::reduced_with_budget(degree, node_budget)?;
            let top = base.powi(j as i32 + 1).floor() as usize;
            let values = (0..=top).map(|l| window.eval(l as f64 / bj)).collect();
            scales.push(Scale { j, grid, profile: ScaleProfile::new(values) });
        }
        Ok(Self { base, window, scales })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn window(&self) -> &NeedletWindow {
        &self.window
    }

    pub fn j_max(&self) -> usize {
        self.scales.len() - 1
    }

    pub fn scales(&self) -> &[Scale] {
        &self.scales
    }

    pub fn scale(&self, j: usize) -> Result<&Scale> {
        self.scales
            .get(j)
            .ok_or_else(|| Error::Index(format!("scale {j} not in frame (j_max = {})", self.j_max())))
    }

    fn check(&self, j: usize, k: usize) -> Result<&Scale> {
        let s = self.scale(j)?;
        if k >= s.count() {
            return Err(Error::Index(format!("center {k} out of range at scale {j} (K_j = {})", s.count())));
        }
        Ok(s)
    }

    pub fn center(&self, j: usize, k: usize) -> Result<SpherePoint> {
        Ok(self.check(j, k)?.centers()[k])
    }

    pub fn weight(&self, j: usize, k: usize) -> Result<f64> {
        Ok(self.check(j, k)?.weights()[k])
    }

    /// `ψ_jk(x) = √λ_jk Σ_l b(l/B^j) (2l+1)/(4π) P_l(⟨x, ξ_jk⟩)`.
    pub fn eval(&self, j: usize, k: usize, x: &SpherePoint) -> Result<f64> {
        let s = self.check(j, k)?;
        let u = x.dot(&s.centers()[k]).clamp(-1.0, 1.0);
        Ok(s.weights()[k].sqrt() * s.profile.eval(u))
    }

    /// Largest multipole that analysis followed by synthesis reproduces.
    pub fn capacity(&self) -> usize {
        self.base.powi(self.j_max() as i32 - 1).floor() as usize
    }

    /// `‖ψ_jk‖_p`; `p = f64::INFINITY` gives the sup norm.
    pub fn lp_norm(&self, j: usize, k: usize, p: f64) -> Result<f64> {
        let s = self.check(j, k)?;
        let unit = profile_lp_norm(s.profile(), p)?;
        Ok(s.weights()[k].sqrt() * unit)
    }

    /// Empirical envelope constant of the localization bound
    /// `|ψ_jk(x)| ≤ κ_τ B^j (1 + B^j d(x, ξ_jk))^{-τ}`.
    ///
    /// Since `|ψ_jk(x)|` depends on `k` only through `√λ_jk` and on `x` only
    /// through the distance to the center, the sup over all centers and
    /// points is taken over `sample_size` distances with the largest weight.
    pub fn fit_localization(&self, tau: u32, sample_size: usize) -> Result<LocalizationFit> {
        if tau < 1 {
            return Err(Error::Invalid("tau must be at least 1".into()));
        }
        let mut by_scale = BTreeMap::new();
        for s in &self.scales {
            let bj = self.base.powi(s.j as i32);
            let lam = s.weights().iter().cloned().fold(0.0, f64::max);
            let ratio = |theta: f64| {
                lam.sqrt() * s.profile.eval(theta.cos()).abs() * (1.0 + bj * theta).powi(tau as i32) / bj
            };
            let mut best = ratio(0.0);
            for i in 0..sample_size {
                let theta = PI * (i as f64 + 0.5) / sample_size as f64;
                best = best.max(ratio(theta));
            }
            by_scale.insert(s.j, best);
        }
        let kappa_hat = by_scale.values().cloned().fold(0.0, f64::max);
        Ok(LocalizationFit { tau, kappa_hat, max_ratio_by_scale: by_scale })
    }

    /// Min and max of `‖ψ_jk‖_p B^{-j(1-2/p)}` over every center of the
    /// given scales.
    pub fn norm_constants(&self, p: f64, scales: impl IntoIterator<Item = usize>) -> Result<NormConstants> {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        let mut by_scale = BTreeMap::new();
        for j in scales {
            let s = self.scale(j)?;
            let unit = profile_lp_norm(s.profile(), p)?;
            let expo = if p.is_infinite() { 1.0 } else { 1.0 - 2.0 / p };
            let scale = self.base.powf(-(j as f64) * expo);
            let wmin = s.weights().iter().cloned().fold(f64::INFINITY, f64::min);
            let wmax = s.weights().iter().cloned().fold(0.0, f64::max);
            let (a, b) = (wmin.sqrt() * unit * scale, wmax.sqrt() * unit * scale);
            by_scale.insert(j, (a, b));
            lo = lo.min(a);
            hi = hi.max(b);
        }
        Ok(NormConstants { p, q_low: lo, q_high: hi, by_scale })
    }

    /// `max_z Σ_k |ψ_jk(z)|` over the given probe points, divided by `B^j`.
    pub fn uniform_sum_ratio(&self, j: usize, probes: &[SpherePoint]) -> Result<f64> {
        let s = self.scale(j)?;
        let table = s.table();
        let bj = self.base.powi(j as i32);
        let best = probes
            .iter()
            .map(|z| {
                s.centers()
                    .iter()
                    .zip(s.weights())
                    .map(|(c, w)| w.sqrt() * table.eval(z.dot(c).clamp(-1.0, 1.0)).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        Ok(best / bj)
    }

    pub fn diagnostics(&self, norm_powers: &[f64]) -> Result<FrameDiagnostics> {
        let mut scales = Vec::new();
        for s in &self.scales {
            let b2j = self.base.powi(2 * s.j as i32);
            let wmin = s.weights().iter().cloned().fold(f64::INFINITY, f64::min);
            let wmax = s.weights().iter().cloned().fold(0.0, f64::max);
            scales.push(ScaleDiagnostics {
                j: s.j,
                k_count: s.count(),
                degree_exact: s.degree_exact(),
                l_min: s.profile.l_min(),
                l_max: s.profile.l_max(),
                count_over_b2j: s.count() as f64 / b2j,
                weight_min_times_b2j: wmin * b2j,
                weight_max_times_b2j: wmax * b2j,
            });
        }
        let mut norms = Vec::new();
        for &p in norm_powers {
            norms.push(self.norm_constants(p, 1..=self.j_max())?);
        }
        Ok(FrameDiagnostics { base: self.base, window: self.window.audit(), scales, norms })
    }
}

fn profile_lp_norm(profile: &ScaleProfile, p: f64) -> Result<f64> {
    if p.is_infinite() {
        return zonal_sup(profile.coeffs());
    }
    if !(p >= 1.0) {
        return Err(Error::Invalid(format!("L^p norm needs p >= 1, got {p}")));
    }
    let integral = 2.0 * PI * zonal_abs_power_integral(profile.coeffs(), p, |_| 1.0)?;
    Ok(integral.powf(1.0 / p))
}

/// Distance from every center to its nearest neighbour is not needed often;
/// this helper serves the diagnostics of selections.
pub fn min_pairwise_distance(points: &[SpherePoint]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.min(spherical_distance(a, b));
        }
    }
    best
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizationFit {
    pub tau: u32,
    pub kappa_hat: f64,
    pub max_ratio_by_scale: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormConstants {
    pub p: f64,
    pub q_low: f64,
    pub q_high: f64,
    /// Per-scale (min, max) over centers.
    pub by_scale: BTreeMap<usize, (f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScaleDiagnostics {
    pub j: usize,
    pub k_count: usize,
    pub degree_exact: usize,
    pub l_min: usize,
    pub l_max: usize,
    pub count_over_b2j: f64,
    pub weight_min_times_b2j: f64,
    pub weight_max_times_b2j: f64,
}

/// Frame description written by `frame-check`.
#[derive(Debug, Clone, Serialize)]
pub struct FrameDiagnostics {
    pub base: f64,
    pub window: super::window::WindowAudit,
    pub scales: Vec<ScaleDiagnostics>,
    pub norms: Vec<NormConstants>,
}
