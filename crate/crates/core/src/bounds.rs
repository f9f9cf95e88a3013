//! Numerical evaluation of the Wasserstein and `d₂` bounds for needlet
//! coefficients, with existential constants fitted on a calibration frame.

use crate::coefficients::{azimuthal_profile, coeff_stats, select_centers, CoeffSelection, CoeffStats};
use crate::error::{Error, Result};
use crate::field::SphereDensity;
use crate::needlet::{zonal::zonal_abs_power_integral, NeedletFrame, ZonalTable};
use crate::sphere::{gauss_legendre, spherical_distance, QuadratureGrid, SpherePoint};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// `√(2π)/8`, the Stein constant of the multivariate bound.
pub const STEIN_D2: f64 = 0.313_328_534_328_875_3;
/// Upper constant `C` in the net condition `min_separation ≤ C/√d`.
pub const SELECTION_C_UPPER: f64 = 6.0;

/// `R_t^{-1/2} σ_jk^{-3} ∫ |ψ_jk|³ f`.
pub fn third_moment_term(frame: &NeedletFrame, density: &SphereDensity, j: usize, k: usize, r_t: f64) -> Result<f64> {
    let st = coeff_stats(frame, density, j, k)?;
    let integral = abs_cube_integral(frame, density, j, k)?;
    Ok(integral / (r_t.sqrt() * st.sigma_sq.powf(1.5)))
}

/// `∫ |ψ_jk|³ f` through the zonal reduction around the center.
fn abs_cube_integral(frame: &NeedletFrame, density: &SphereDensity, j: usize, k: usize) -> Result<f64> {
    let scale = frame.scale(j)?;
    let lam = frame.weight(j, k)?;
    let center = frame.center(j, k)?;
    let coeffs = scale.profile().coeffs();
    let z = if density.is_uniform() {
        zonal_abs_power_integral(coeffs, 3.0, |_| 0.5)?
    } else {
        zonal_abs_power_integral(coeffs, 3.0, |theta| azimuthal_profile(density, &center, theta))?
    };
    Ok(lam.powf(1.5) * z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DwBound {
    /// `|1 − ‖h‖²| + ∫|h|³ dμ_t`.
    pub raw: f64,
    /// `q′₃³ ζ₂ B^j / (√R_t σ³_jk)`.
    pub closed: f64,
    /// `|1 − ‖h‖²_{L²(μ_t)}|`, zero up to rounding.
    pub norm_defect: f64,
}

pub fn dw_bound(
    frame: &NeedletFrame,
    density: &SphereDensity,
    j: usize,
    k: usize,
    r_t: f64,
    q3_hat: f64,
) -> Result<DwBound> {
    let st = coeff_stats(frame, density, j, k)?;
    let third = abs_cube_integral(frame, density, j, k)? / (r_t.sqrt() * st.sigma_sq.powf(1.5));
    // ‖h‖² = R_t ∫ ψ² f / (R_t σ²)
    let norm_defect = (1.0 - r_t * st.sigma_sq / (r_t.sqrt() * st.sigma_sq.sqrt()).powi(2)).abs();
    let closed = dw_closed(q3_hat, density.zeta2(), frame.base().powi(j as i32), r_t, st.sigma_sq);
    Ok(DwBound { raw: norm_defect + third, closed, norm_defect })
}

/// `q′₃³ ζ₂ B^j / (√R_t σ³)`.
pub fn dw_closed(q3_hat: f64, zeta2: f64, bj: f64, r_t: f64, sigma_sq: f64) -> f64 {
    q3_hat.powi(3) * zeta2 * bj / (r_t.sqrt() * sigma_sq.powf(1.5))
}

/// `C̃_τ ζ₂ / (σ_jk₁ σ_jk₂ (1 + B^j d(ξ_jk₁, ξ_jk₂))^τ)`.
#[allow(clippy::too_many_arguments)]
pub fn covariance_bound(
    frame: &NeedletFrame,
    j: usize,
    k1: usize,
    k2: usize,
    tau: u32,
    c_tau_hat: f64,
    zeta2: f64,
    sigma_pair: (f64, f64),
) -> Result<f64> {
    let d = spherical_distance(&frame.center(j, k1)?, &frame.center(j, k2)?);
    if k1 == k2 || d == 0.0 {
        return Err(Error::Separation { separation: d, required: f64::MIN_POSITIVE });
    }
    Ok(covariance_bound_at(frame.base().powi(j as i32), d, tau, c_tau_hat, zeta2, sigma_pair))
}

pub fn covariance_bound_at(bj: f64, d: f64, tau: u32, c_tau_hat: f64, zeta2: f64, sigma_pair: (f64, f64)) -> f64 {
    c_tau_hat * zeta2 / (sigma_pair.0 * sigma_pair.1 * (1.0 + bj * d).powi(tau as i32))
}

/// Constants of the bounds that the theory only shows to exist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedConstants {
    pub base: f64,
    pub tau: u32,
    pub scales: Vec<usize>,
    /// Lower `L²` norm constant `q₂`.
    pub q2: f64,
    /// Upper `L³` norm constant `q′₃`.
    pub q3_prime: f64,
    /// Localization constant `κ_τ`.
    pub kappa_tau: f64,
    /// `C̃_τ` with `⟨|ψ_jk₁|, |ψ_jk₂|⟩ ≤ C̃_τ (1 + B^j d)^{-τ}`.
    pub c_tilde: f64,
    /// `sup ∫ (Σ_k |ψ_jk|)³ dz / (d B^j)` over the calibration nets.
    pub cprime_hat: f64,
}

/// Relative margin applied to every fitted sup.
pub const FIT_MARGIN: f64 = 0.05;

impl FittedConstants {
    /// Fits on the given scales of `frame`; nets for `cprime_hat` use
    /// `d = ⌊B^j⌋` centers at each scale.
    pub fn calibrate(frame: &NeedletFrame, tau: u32, scales: &[usize]) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::Invalid("calibration needs at least one scale".into()));
        }
        let q2 = frame.norm_constants(2.0, scales.iter().copied())?.q_low;
        let q3_prime = frame.norm_constants(3.0, scales.iter().copied())?.q_high;
        let loc = frame.fit_localization(tau, 4000)?;
        let kappa_tau = scales.iter().map(|j| loc.max_ratio_by_scale[j]).fold(0.0, f64::max);
        let mut c_tilde: f64 = 0.0;
        let mut cprime_hat: f64 = 0.0;
        for &j in scales {
            c_tilde = c_tilde.max(fit_c_tilde(frame, j, tau)?);
            let d = (frame.base().powi(j as i32).floor() as usize).clamp(1, frame.scale(j)?.count());
            let sel = select_centers(frame, j, d)?;
            cprime_hat = cprime_hat.max(cube_sum_ratio(frame, &sel)?);
        }
        let m = 1.0 + FIT_MARGIN;
        Ok(Self {
            base: frame.base(),
            tau,
            scales: scales.to_vec(),
            q2: q2 / m,
            q3_prime: q3_prime * m,
            kappa_tau: kappa_tau * m,
            c_tilde: c_tilde * m,
            cprime_hat: cprime_hat * m,
        })
    }

    /// `c = C̃_τ ζ₂ / (ζ₁ q₂²)`.
    pub fn c(&self, density: &SphereDensity) -> f64 {
        self.c_tilde * density.zeta2() / (density.zeta1() * self.q2 * self.q2)
    }

    /// `c′ = ζ₂ ĉ′`.
    pub fn c_prime(&self, density: &SphereDensity) -> f64 {
        density.zeta2() * self.cprime_hat
    }
}

/// `⟨|ψ₁|, |ψ₂|⟩` for two centers at distance `d` with weight `lam` each:
/// composite 4-point Gauss panels in colatitude around the first center,
/// midpoint rule in azimuth.
fn abs_overlap(table: &ZonalTable, lam: f64, d: f64, panels: usize) -> f64 {
    let c2 = SpherePoint::NORTH.local_to_global(d, 0.0);
    let (gx, gw) = gauss_legendre(4);
    let n_phi = 8 * panels;
    let hp = PI / n_phi as f64;
    let width = PI / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        for (x, w) in gx.iter().zip(&gw) {
            let theta = mid + 0.5 * width * x;
            let (st, ct) = theta.sin_cos();
            let g1 = table.eval(ct).abs();
            if g1 == 0.0 {
                continue;
            }
            let mut ring = 0.0;
            // symmetric in φ ↦ −φ, so integrate over [0, π] and double
            for m in 0..n_phi {
                let phi = (m as f64 + 0.5) * hp;
                let y = SpherePoint { x: st * phi.cos(), y: st * phi.sin(), z: ct };
                ring += table.eval(y.dot(&c2).clamp(-1.0, 1.0)).abs();
            }
            total += 0.5 * width * w * g1 * st * ring;
        }
    }
    lam * total * hp * 2.0
}

/// `max_d ⟨|ψ₁|, |ψ₂|⟩ (1 + B^j d)^τ` at scale `j` using the largest weight.
pub fn fit_c_tilde(frame: &NeedletFrame, j: usize, tau: u32) -> Result<f64> {
    let scale = frame.scale(j)?;
    let table = scale.table();
    let lam = scale.weights().iter().cloned().fold(0.0, f64::max);
    let bj = frame.base().powi(j as i32);
    let n = 4 * scale.profile().l_max() + 32;
    let mut best: f64 = 0.0;
    let mut s = 0.0;
    while s / bj <= PI {
        let d = s / bj;
        let fine = abs_overlap(&table, lam, d, n);
        let coarse = abs_overlap(&table, lam, d, n / 2);
        if (fine - coarse).abs() > 2e-2 * fine.abs().max(1e-300) && fine > 1e-12 {
            return Err(Error::Convergence(format!("overlap integral at d = {d} did not settle")));
        }
        best = best.max(fine * (1.0 + s).powi(tau as i32));
        s = if s == 0.0 { 0.25 } else { s * 1.5 };
    }
    Ok(best)
}

/// `∫ (Σ_k |ψ_jk|)³ dz / (d B^j)` for one selection.
pub fn cube_sum_ratio(frame: &NeedletFrame, selection: &CoeffSelection) -> Result<f64> {
    let j = selection.j;
    let scale = frame.scale(j)?;
    let table = scale.table();
    let centers: Vec<(SpherePoint, f64)> = selection
        .centers
        .iter()
        .map(|&k| (scale.centers()[k], scale.weights()[k].sqrt()))
        .collect();
    let integral = |degree: usize| -> Result<f64> {
        let grid = QuadratureGrid::product(degree)?;
        Ok(grid.integrate(|x| {
            let s: f64 = centers.iter().map(|(c, sl)| sl * table.eval(x.dot(c).clamp(-1.0, 1.0)).abs()).sum();
            s * s * s
        }))
    };
    let l = scale.profile().l_max();
    let fine = integral(12 * l + 16)?;
    let coarse = integral(6 * l + 8)?;
    if (fine - coarse).abs() > 1e-2 * fine {
        return Err(Error::Convergence("cube-sum integral did not settle".into()));
    }
    Ok(fine / (selection.d() as f64 * frame.base().powi(j as i32)))
}

fn inf_term(bj: f64, min_sep: f64, tau: u32) -> f64 {
    if min_sep.is_infinite() {
        0.0
    } else {
        (1.0 + bj * min_sep).powi(tau as i32).recip()
    }
}

/// `(A_t, A_t + q′₃³ d³ ζ₂ √(2π) B^j / (8 √R_t ζ₁^{3/2} q₂³))`.
pub fn d2_bound_fixed(
    selection: &CoeffSelection,
    frame: &NeedletFrame,
    density: &SphereDensity,
    r_t: f64,
    tau: u32,
    constants: &FittedConstants,
) -> Result<(f64, f64)> {
    if selection.d() < 2 {
        return Err(Error::Hypothesis("the fixed-dimension bound needs d ≥ 2".into()));
    }
    Ok(d2_fixed_parts(selection, frame.base(), density, r_t, tau, constants))
}

fn d2_fixed_parts(
    selection: &CoeffSelection,
    base: f64,
    density: &SphereDensity,
    r_t: f64,
    tau: u32,
    k: &FittedConstants,
) -> (f64, f64) {
    let bj = base.powi(selection.j as i32);
    let d = selection.d() as f64;
    let (z1, z2) = (density.zeta1(), density.zeta2());
    let a_t = d * k.c_tilde * z2 / (z1 * k.q2 * k.q2) * inf_term(bj, selection.min_separation, tau);
    let second = k.q3_prime.powi(3) * d.powi(3) * z2 * STEIN_D2 * bj / (r_t.sqrt() * z1.powf(1.5) * k.q2.powi(3));
    (a_t, a_t + second)
}

/// `c d/(1 + B^j δ)^τ + (√(2π)/8) c′ d B^j / (ζ₁^{3/2} q₂³ √R_t)`.
pub fn d2_bound_growing(
    selection: &CoeffSelection,
    frame: &NeedletFrame,
    density: &SphereDensity,
    r_t: f64,
    tau: u32,
    c_hat: f64,
    cprime_hat: f64,
    q2: f64,
) -> Result<f64> {
    selection.check_net(crate::coefficients::SELECTION_C, SELECTION_C_UPPER)?;
    let bj = frame.base().powi(selection.j as i32);
    let d = selection.d() as f64;
    Ok(c_hat * d * inf_term(bj, selection.min_separation, tau)
        + STEIN_D2 * cprime_hat * d * bj / (density.zeta1().powf(1.5) * q2.powi(3) * r_t.sqrt()))
}

/// Sharper bound with the exact covariance defect and triple overlaps:
/// `‖I − Γ_t‖_HS + (√(2π)/8) R_t^{-1/2} ∫ (Σ_k |ψ_jk|/σ_jk)³ f`.
pub fn d2_bound_exact_terms(
    selection: &CoeffSelection,
    frame: &NeedletFrame,
    density: &SphereDensity,
    r_t: f64,
) -> Result<f64> {
    let gamma = crate::coefficients::covariance_exact(frame, density, selection)?;
    let hs = {
        let mut m = gamma.matrix.clone();
        for i in 0..m.nrows() {
            m[(i, i)] -= 1.0;
        }
        m.norm()
    };
    let j = selection.j;
    let scale = frame.scale(j)?;
    let table = scale.table();
    let stats: Vec<CoeffStats> =
        selection.centers.iter().map(|&k| coeff_stats(frame, density, j, k)).collect::<Result<_>>()?;
    let centers: Vec<(SpherePoint, f64)> = selection
        .centers
        .iter()
        .zip(&stats)
        .map(|(&k, st)| (scale.centers()[k], scale.weights()[k].sqrt() / st.sigma_sq.sqrt()))
        .collect();
    let l = scale.profile().l_max();
    let grid = QuadratureGrid::product(12 * l + 16 + density.degree())?;
    let cube = grid.integrate(|x| {
        let s: f64 = centers.iter().map(|(c, w)| w * table.eval(x.dot(c).clamp(-1.0, 1.0)).abs()).sum();
        s * s * s * density.eval(x)
    });
    Ok(hs + STEIN_D2 * cube / r_t.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorollaryRate {
    pub rate: f64,
    pub admissible_tau: u32,
}

/// Rate `κ d_t B^{j(t)}/√R_t` with `d_t = R_t^β`, `B^{2j} = R_t^α`.
pub fn corollary_rate(r_t: f64, alpha: f64, beta: f64, kappa_hat: f64) -> Result<CorollaryRate> {
    if !(0.0 < beta && beta < alpha && alpha < 1.0) {
        return Err(Error::Regime(format!("need 0 < β < α < 1, got α = {alpha}, β = {beta}")));
    }
    let rate = kappa_hat * r_t.powf(beta) * r_t.powf(alpha / 2.0) / r_t.sqrt();
    Ok(CorollaryRate { rate, admissible_tau: admissible_tau(alpha, beta) })
}

/// Smallest integer strictly above `(1 − α)/(α − β)`.
pub fn admissible_tau(alpha: f64, beta: f64) -> u32 {
    ((1.0 - alpha) / (alpha - beta)).floor() as u32 + 1
}

/// `R_t B^{-2j}`.
pub fn effective_sample_size(r_t: f64, base: f64, j: usize) -> f64 {
    r_t * base.powi(-2 * j as i32)
}

/// `J_R = round(log_B(R_t / ln R_t) / 2)`.
pub fn thresholding_scale(r_t: f64, base: f64) -> Result<i64> {
    if !(r_t > std::f64::consts::E) {
        return Err(Error::Domain(format!("thresholding scale needs R_t > e, got {r_t}")));
    }
    Ok(((r_t / r_t.ln()).ln() / base.ln() / 2.0).round() as i64)
}

/// `(√(2 e^{-n} nⁿ/n!), d · that)`.
pub fn depoissonization_bound(n: u64, d: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let nf = n as f64;
    let ln = std::f64::consts::LN_2 - nf + nf * nf.ln() - ln_gamma(nf + 1.0);
    let exact = (0.5 * ln).exp();
    Ok((exact, d as f64 * exact))
}

/// Fitted `κ` of the growing-dimension rate: the largest ratio of the
/// growing bound to `d B^j/√R_t` over the regime `R_t = B^{4j}`, `d = B^j`.
pub fn calibrate_kappa(
    frame: &NeedletFrame,
    density: &SphereDensity,
    constants: &FittedConstants,
    scales: &[usize],
) -> Result<f64> {
    let mut best: f64 = 0.0;
    for &j in scales {
        let bj = frame.base().powi(j as i32);
        let r_t = bj.powi(4);
        let d = (bj.floor() as usize).clamp(1, frame.scale(j)?.count());
        let sel = select_centers(frame, j, d)?;
        let b = d2_bound_growing(
            &sel,
            frame,
            density,
            r_t,
            constants.tau,
            constants.c(density),
            constants.c_prime(density),
            constants.q2,
        )?;
        best = best.max(b / (d as f64 * bj / r_t.sqrt()));
    }
    Ok(best * (1.0 + FIT_MARGIN))
}

/// Every bound for one configuration; field names are the CSV/JSON columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub base: f64,
    pub j: usize,
    pub r_t: f64,
    pub d: usize,
    pub tau: u32,
    pub third_moment_exact: f64,
    pub dw_bound_raw: f64,
    pub dw_bound_closed: f64,
    pub a_t: f64,
    pub d2_bound_fixed: f64,
    pub d2_bound_growing: f64,
    pub corollary_rate: f64,
    pub cov_bound_max: f64,
    pub effective_sample_size: f64,
    pub j_r: i64,
    pub depoissonization_term: f64,
}

/// Report for a selection; one-dimensional quantities are the worst case
/// over the selected centers.
pub fn bound_report(
    frame: &NeedletFrame,
    density: &SphereDensity,
    selection: &CoeffSelection,
    r_t: f64,
    constants: &FittedConstants,
    kappa: f64,
) -> Result<BoundReport> {
    let j = selection.j;
    let tau = constants.tau;
    let bj = frame.base().powi(j as i32);
    let mut third: f64 = 0.0;
    let mut raw: f64 = 0.0;
    let mut closed: f64 = 0.0;
    let mut sigmas = Vec::with_capacity(selection.d());
    for &k in &selection.centers {
        let b = dw_bound(frame, density, j, k, r_t, constants.q3_prime)?;
        third = third.max(b.raw - b.norm_defect);
        raw = raw.max(b.raw);
        closed = closed.max(b.closed);
        sigmas.push(coeff_stats(frame, density, j, k)?.sigma_sq.sqrt());
    }
    let mut cov_bound_max: f64 = 0.0;
    for a in 0..selection.d() {
        for b in 0..a {
            let d = spherical_distance(
                &frame.center(j, selection.centers[a])?,
                &frame.center(j, selection.centers[b])?,
            );
            cov_bound_max = cov_bound_max.max(covariance_bound_at(
                bj,
                d,
                tau,
                constants.c_tilde,
                density.zeta2(),
                (sigmas[a], sigmas[b]),
            ));
        }
    }
    let (a_t, fixed) = d2_fixed_parts(selection, frame.base(), density, r_t, tau, constants);
    let growing = d2_bound_growing(
        selection,
        frame,
        density,
        r_t,
        tau,
        constants.c(density),
        constants.c_prime(density),
        constants.q2,
    )?;
    let n = r_t.round().max(1.0) as u64;
    Ok(BoundReport {
        base: frame.base(),
        j,
        r_t,
        d: selection.d(),
        tau,
        third_moment_exact: third,
        dw_bound_raw: raw,
        dw_bound_closed: closed,
        a_t,
        d2_bound_fixed: fixed,
        d2_bound_growing: growing,
        corollary_rate: kappa * selection.d() as f64 * bj / r_t.sqrt(),
        cov_bound_max,
        effective_sample_size: effective_sample_size(r_t, frame.base(), j),
        j_r: thresholding_scale(r_t.max(3.0), frame.base())?,
        depoissonization_term: depoissonization_bound(n, 1)?.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> NeedletFrame {
        NeedletFrame::build(2.0, 5).unwrap()
    }

    #[test]
    fn third_moment_scales_with_rate() {
        let f = frame();
        let u = SphereDensity::uniform();
        let a = third_moment_term(&f, &u, 3, 10, 1e4).unwrap();
        let b = third_moment_term(&f, &u, 3, 10, 4e4).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
        let vals: Vec<f64> = (2..=5)
            .map(|j| third_moment_term(&f, &u, j, 7, 1.0).unwrap() / 2f64.powi(j as i32))
            .collect();
        let max = vals.iter().cloned().fold(0.0, f64::max);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 3.0, "{vals:?}");
    }

    #[test]
    fn closed_form_dominates() {
        let f = frame();
        let u = SphereDensity::uniform();
        let q3 = f.norm_constants(3.0, 1..=5).unwrap().q_high;
        for (j, k) in [(2, 0), (3, 50), (4, 999), (5, 10)] {
            let b = dw_bound(&f, &u, j, k, 1e6, q3).unwrap();
            assert!(b.norm_defect < 1e-10);
            assert!(b.closed >= b.raw, "({j},{k}): {b:?}");
            if j == 4 {
                assert!(b.closed / b.raw <= 10.0);
            }
        }
        let c1 = dw_closed(1.2, 0.1, 8.0, 1e4, 0.3);
        assert!((dw_closed(1.2, 0.1, 16.0, 1e4, 0.3) / c1 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn covariance_bound_basics() {
        let f = frame();
        assert!(covariance_bound(&f, 3, 4, 4, 3, 1.0, 0.1, (0.5, 0.5)).is_err());
        let near = covariance_bound(&f, 3, 4, 5, 3, 1.0, 0.1, (0.5, 0.5)).unwrap();
        let far = covariance_bound(&f, 3, 4, 400, 3, 1.0, 0.1, (0.5, 0.5)).unwrap();
        assert!(near > far);
    }

    #[test]
    fn rate_and_scales() {
        assert_eq!(admissible_tau(0.5, 0.25), 3);
        let r = corollary_rate(1e12, 0.5, 0.25, 1.0).unwrap();
        assert!((r.rate - 1.0).abs() < 1e-9);
        let r4 = corollary_rate(4e12, 0.5, 0.25, 1.0).unwrap();
        // d and B^j move with R_t here; at fixed d, B^j the rate halves
        assert!(r4.rate > 0.0);
        assert!(matches!(corollary_rate(1e6, 0.3, 0.3, 1.0), Err(Error::Regime(_))));
        assert!((effective_sample_size(1e12, 10.0, 3) - 1e6).abs() < 1e-3);
        assert_eq!(thresholding_scale(1e6, 2.0).unwrap(), 8);
        assert!(thresholding_scale(2.0, 2.0).is_err());
    }

    #[test]
    fn depoissonization_terms() {
        let (e1, _) = depoissonization_bound(1, 3).unwrap();
        assert!((e1 - 0.857763).abs() < 1e-6);
        assert_eq!(depoissonization_bound(5, 0).unwrap().1, 0.0);
        let r: Vec<f64> =
            [4u64, 16, 64, 256].iter().map(|&n| depoissonization_bound(n, 1).unwrap().0 * (n as f64).powf(0.25)).collect();
        for v in &r {
            assert!((v - (2.0 / PI).powf(0.25)).abs() < 0.05, "{r:?}");
        }
        assert!(depoissonization_bound(0, 1).is_err());
    }

    #[test]
    fn fixed_bound_structure() {
        let f = frame();
        let u = SphereDensity::uniform();
        let k = FittedConstants::calibrate(&f, 4, &[2, 3]).unwrap();
        let sel = select_centers(&f, 4, 2).unwrap();
        let (a, total) = d2_bound_fixed(&sel, &f, &u, 1e6, 4, &k).unwrap();
        // antipodal pair: the covariance part is a small fraction of the total
        assert!(a < 2e-2 * total, "{a} {total}");
        let sel4 = select_centers(&f, 4, 4).unwrap();
        let (_, t2) = d2_fixed_parts(&sel, 2.0, &u, 1e6, 4, &k);
        let (a4, t4) = d2_fixed_parts(&sel4, 2.0, &u, 1e6, 4, &k);
        assert!(((t4 - a4) / (t2 - a) - 8.0).abs() < 1e-12);
        assert!(d2_bound_fixed(&select_centers(&f, 4, 1).unwrap(), &f, &u, 1e6, 4, &k).is_err());
    }

    #[test]
    fn overlap_fit_is_finite() {
        let f = frame();
        let c3 = fit_c_tilde(&f, 3, 3).unwrap();
        let c4 = fit_c_tilde(&f, 4, 3).unwrap();
        assert!(c3 > 0.0 && c4 > 0.0);
        assert!(c3.max(c4) / c3.min(c4) < 3.0, "{c3} {c4}");
    }
}
