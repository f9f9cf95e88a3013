//! Monte Carlo estimates of distances to Gaussianity.

use crate::coefficients::{coeff_stats, CovMatrix};
use crate::error::{Error, Result};
use crate::field::{sample_field, PoissonFieldSpec, SphereDensity};
use crate::needlet::NeedletFrame;
use crate::rng::rng_for;
use crate::sphere::{HarmonicExpansion, QuadratureGrid, SpherePoint};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::{PI, SQRT_2};

pub const MIN_SAMPLES: usize = 100;
pub const BOOTSTRAP_RESAMPLES: usize = 100;
/// Seed of the bootstrap generator unless a caller supplies one.
pub const BOOTSTRAP_SEED: u64 = 0x5eed_b007;
pub const DICTIONARY_SIZE: usize = 256;
pub const DICTIONARY_SEED: u64 = 0xd1c7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMethod {
    Wasserstein1d,
    D2Dictionary,
    Moment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceEstimate {
    pub method: DistanceMethod,
    pub value: f64,
    pub std_error: f64,
    pub sample_count: usize,
}

fn check_size(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::SampleSize { required: MIN_SAMPLES, got: n });
    }
    Ok(())
}

/// Standard normal CDF.
pub fn gaussian_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// `Φ⁻¹(p)`: inverse complementary error function followed by one Newton step.
pub fn gaussian_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("quantile level must lie in (0, 1), got {p}")));
    }
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    let density = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    // Newton on Φ(x) − p, written via the upper tail for p > 1/2
    let resid = if p > 0.5 { (1.0 - p) - 0.5 * erfc(x / SQRT_2) } else { gaussian_cdf(x) - p };
    Ok(x - resid / density)
}

fn std_dev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn quantile_grid(m: usize) -> Vec<f64> {
    (1..=m)
        .map(|i| gaussian_quantile((i as f64 - 0.5) / m as f64).expect("level in (0, 1)"))
        .collect()
}

fn w1_sorted(sorted: &[f64], quantiles: &[f64]) -> f64 {
    sorted.iter().zip(quantiles).map(|(x, q)| (x - q).abs()).sum::<f64>() / sorted.len() as f64
}

/// `W₁` between the empirical law and `N(0,1)` by quantile coupling; the
/// standard error comes from a bootstrap seeded with `seed`.
pub fn empirical_wasserstein_1d(samples: &[f64], seed: u64) -> Result<DistanceEstimate> {
    check_size(samples.len())?;
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid("samples must be finite".into()));
    }
    let m = samples.len();
    let q = quantile_grid(m);
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let value = w1_sorted(&sorted, &q);
    let mut rng = rng_for(seed);
    let mut boot = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut buf = vec![0.0; m];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for b in buf.iter_mut() {
            *b = samples[rng.random_range(0..m)];
        }
        buf.sort_by(f64::total_cmp);
        boot.push(w1_sorted(&buf, &q));
    }
    Ok(DistanceEstimate { method: DistanceMethod::Wasserstein1d, value, std_error: std_dev(&boot), sample_count: m })
}

/// `g(x) = cos(⟨w, x⟩ + c) / max(‖w‖, ‖w‖²)`, so `‖g‖_Lip ≤ 1` and `M₂(g) ≤ 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunction {
    pub w: Vec<f64>,
    pub phase: f64,
    pub norm: f64,
}

impl TestFunction {
    pub fn new(w: Vec<f64>, phase: f64) -> Self {
        let r = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        let norm = r.max(r * r);
        Self { w, phase, norm }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if self.norm == 0.0 {
            return 0.0;
        }
        let s: f64 = self.w.iter().zip(x).map(|(a, b)| a * b).sum();
        (s + self.phase).cos() / self.norm
    }

    /// `E g(Y)` for `Y ~ N(0, C)`.
    pub fn gaussian_mean(&self, cov: &CovMatrix) -> f64 {
        if self.norm == 0.0 {
            return 0.0;
        }
        let w = nalgebra::DVector::from_column_slice(&self.w);
        let q = (w.transpose() * &cov.matrix * &w)[(0, 0)];
        self.phase.cos() * (-0.5 * q).exp() / self.norm
    }

    /// Analytic bounds `(sup ‖∇g‖, sup ‖∇²g‖_op)`.
    pub fn derivative_bounds(&self) -> (f64, f64) {
        if self.norm == 0.0 {
            return (0.0, 0.0);
        }
        let r = self.w.iter().map(|v| v * v).sum::<f64>().sqrt();
        (r / self.norm, r * r / self.norm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunctionDictionary {
    pub functions: Vec<TestFunction>,
}

impl TestFunctionDictionary {
    /// Frequencies on spheres of radius {0.5, 1, 2, 4} with uniformly random
    /// directions and phases {0, π/4, π/2}.
    pub fn new(d: usize, size: usize, seed: u64) -> Self {
        const RADII: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
        const PHASES: [f64; 3] = [0.0, PI / 4.0, PI / 2.0];
        let mut rng = rng_for(seed);
        let functions = (0..size)
            .map(|i| {
                let mut dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                dir.iter_mut().for_each(|v| *v *= RADII[i % 4] / n);
                TestFunction::new(dir, PHASES[(i / 4) % 3])
            })
            .collect();
        Self { functions }
    }

    pub fn standard(d: usize) -> Self {
        Self::new(d, DICTIONARY_SIZE, DICTIONARY_SEED)
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// `max_g |mean g(F) − E g(Y)|` over the dictionary: a lower estimate of
/// `d₂(F, N(0, C))`. Also returns the per-function standard errors.
pub fn empirical_d2_lower(
    samples: &[Vec<f64>],
    target: &CovMatrix,
    dict: &TestFunctionDictionary,
    seed: u64,
) -> Result<(DistanceEstimate, Vec<f64>)> {
    check_size(samples.len())?;
    target.check_psd()?;
    let d = target.dim();
    if samples.iter().any(|s| s.len() != d) {
        return Err(Error::Mismatch(format!("samples must have dimension {d}")));
    }
    if dict.functions.iter().any(|g| g.w.len() != d) {
        return Err(Error::Mismatch("dictionary dimension differs from the samples".into()));
    }
    let n = samples.len();
    let targets: Vec<f64> = dict.functions.iter().map(|g| g.gaussian_mean(target)).collect();
    // values[i * m + f]
    let m = dict.len();
    let values: Vec<f64> = samples
        .par_iter()
        .flat_map_iter(|x| dict.functions.iter().map(move |g| g.eval(x)))
        .collect();
    let stat = |idx: &mut dyn Iterator<Item = usize>| -> f64 {
        let mut sums = vec![0.0; m];
        for i in idx {
            let row = &values[i * m..(i + 1) * m];
            sums.iter_mut().zip(row).for_each(|(s, v)| *s += v);
        }
        sums.iter().zip(&targets).map(|(s, t)| (s / n as f64 - t).abs()).fold(0.0, f64::max)
    };
    let value = stat(&mut (0..n));
    let mut rng = rng_for(seed);
    let boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            stat(&mut idx.into_iter())
        })
        .collect();
    let per_function: Vec<f64> = (0..m)
        .map(|f| {
            let col: Vec<f64> = (0..n).map(|i| values[i * m + f]).collect();
            std_dev(&col) / (n as f64).sqrt()
        })
        .collect();
    Ok((
        DistanceEstimate { method: DistanceMethod::D2Dictionary, value, std_error: std_dev(&boot), sample_count: n },
        per_function,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentDiagnostics {
    pub mean: f64,
    pub variance: f64,
    /// `None` when the variance vanishes.
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    pub mean_se: f64,
    pub variance_se: f64,
    pub skewness_se: Option<f64>,
    pub excess_kurtosis_se: Option<f64>,
    pub sample_count: usize,
}

fn moments(x: &[f64]) -> (f64, f64, Option<f64>, Option<f64>) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let variance = m2 / (n - 1.0);
    if m2 == 0.0 {
        return (mean, 0.0, None, None);
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let g1 = m3 / m2.powf(1.5);
    let g2 = m4 / (m2 * m2) - 3.0;
    let skew = g1 * (n * (n - 1.0)).sqrt() / (n - 2.0);
    let kurt = ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
    (mean, variance, Some(skew), Some(kurt))
}

/// Mean, unbiased variance, adjusted skewness and excess kurtosis, with
/// bootstrap standard errors.
pub fn moment_diagnostics(samples: &[f64], seed: u64) -> Result<MomentDiagnostics> {
    check_size(samples.len())?;
    let n = samples.len();
    let (mean, variance, skewness, excess_kurtosis) = moments(samples);
    let mut rng = rng_for(seed);
    let mut buf = vec![0.0; n];
    let mut cols: [Vec<f64>; 4] = Default::default();
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for b in buf.iter_mut() {
            *b = samples[rng.random_range(0..n)];
        }
        let (a, b, c, d) = moments(&buf);
        cols[0].push(a);
        cols[1].push(b);
        if let (Some(c), Some(d)) = (c, d) {
            cols[2].push(c);
            cols[3].push(d);
        }
    }
    let se = |c: &Vec<f64>| if c.len() >= 2 { Some(std_dev(c)) } else { None };
    Ok(MomentDiagnostics {
        mean,
        variance,
        skewness,
        excess_kurtosis,
        mean_se: std_dev(&cols[0]),
        variance_se: std_dev(&cols[1]),
        skewness_se: skewness.and(se(&cols[2])),
        excess_kurtosis_se: excess_kurtosis.and(se(&cols[3])),
        sample_count: n,
    })
}

impl MomentDiagnostics {
    pub fn as_estimate(&self) -> DistanceEstimate {
        // distance of the first four moments from those of N(0, 1)
        let value = self
            .mean
            .abs()
            .max((self.variance - 1.0).abs())
            .max(self.skewness.unwrap_or(0.0).abs())
            .max(self.excess_kurtosis.unwrap_or(0.0).abs());
        let std_error = self
            .mean_se
            .max(self.variance_se)
            .max(self.skewness_se.unwrap_or(0.0))
            .max(self.excess_kurtosis_se.unwrap_or(0.0));
        DistanceEstimate { method: DistanceMethod::Moment, value, std_error, sample_count: self.sample_count }
    }
}

/// Exact and simulated correlation between a needlet coefficient and a fixed probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StableConvergence {
    pub j: usize,
    pub k: usize,
    /// `⟨h_jk, f_p⟩_{L²(μ_t)}` with `f_p` scaled to unit `L²(μ_t)` norm.
    pub exact: f64,
    pub empirical_corr: f64,
    pub std_error: f64,
    pub replicates: usize,
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

/// Exact inner products `⟨h_jk, f_p⟩` for each `(j, k)`, independent of `R_t`.
pub fn stable_convergence_exact(
    frame: &NeedletFrame,
    density: &SphereDensity,
    probe: &HarmonicExpansion,
    targets: &[(usize, usize)],
) -> Result<Vec<f64>> {
    let l_needle = targets
        .iter()
        .map(|&(j, _)| frame.scale(j).map(|s| s.profile().l_max()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    let grid = QuadratureGrid::product(l_needle.max(probe.degree()) + probe.degree() + density.degree())?;
    let fp: Vec<f64> = grid.nodes().iter().map(|x| probe.eval(x)).collect();
    let fw: Vec<f64> = grid.nodes().iter().zip(grid.weights()).map(|(x, w)| w * density.eval(x)).collect();
    let probe_norm = fp.iter().zip(&fw).map(|(p, w)| p * p * w).sum::<f64>().sqrt();
    if !(probe_norm > 0.0) {
        return Err(Error::Invalid("probe has zero norm".into()));
    }
    targets
        .iter()
        .map(|&(j, k)| {
            let st = coeff_stats(frame, density, j, k)?;
            let mut s = 0.0;
            for ((x, p), w) in grid.nodes().iter().zip(&fp).zip(&fw) {
                s += frame.eval(j, k, x)? * p * w;
            }
            Ok(s / (st.sigma_sq.sqrt() * probe_norm))
        })
        .collect()
}

/// For every `(j, k)`: exact inner product and the Monte Carlo correlation of
/// `N̂_t(f_p)` with `β̃_jk` over `replicates` fields sharing seeds
/// `seed, seed + 1, …`.
#[allow(clippy::too_many_arguments)]
pub fn stable_convergence_diagnostic(
    frame: &NeedletFrame,
    spec: &PoissonFieldSpec,
    probe: &HarmonicExpansion,
    targets: &[(usize, usize)],
    t: f64,
    replicates: usize,
    seed: u64,
) -> Result<Vec<StableConvergence>> {
    check_size(replicates)?;
    let density = &spec.density;
    let exact = stable_convergence_exact(frame, density, probe, targets)?;
    let models = targets
        .iter()
        .map(|&(j, k)| {
            let sel = crate::coefficients::CoeffSelection::explicit(frame, j, vec![k])?;
            crate::coefficients::CoeffModel::new(frame, density, sel)
        })
        .collect::<Result<Vec<_>>>()?;
    let probe_mean = {
        let grid = QuadratureGrid::product(probe.degree() + density.degree())?;
        grid.integrate(|x| probe.eval(x) * density.eval(x))
    };
    let r_t = spec.r_t(t);
    let rows: Vec<(f64, Vec<f64>)> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let real = sample_field(spec, t, seed + r as u64)?;
            let pts: Vec<SpherePoint> = real.all_points(spec).collect();
            let np = pts.iter().map(|x| probe.eval(x)).sum::<f64>() - r_t * probe_mean;
            let betas = models.iter().map(|m| m.normalize(&m.raw_sums(pts.iter().copied()), r_t)[0]).collect();
            Ok((np, betas))
        })
        .collect::<Result<_>>()?;
    let probe_vals: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let mut rng = rng_for(seed ^ BOOTSTRAP_SEED);
    let boot_idx: Vec<Vec<usize>> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| (0..replicates).map(|_| rng.random_range(0..replicates)).collect())
        .collect();
    Ok(targets
        .iter()
        .enumerate()
        .map(|(i, &(j, k))| {
            let beta: Vec<f64> = rows.iter().map(|r| r.1[i]).collect();
            let corr = pearson(&probe_vals, &beta);
            let boot: Vec<f64> = boot_idx
                .iter()
                .map(|idx| {
                    let a: Vec<f64> = idx.iter().map(|&q| probe_vals[q]).collect();
                    let b: Vec<f64> = idx.iter().map(|&q| beta[q]).collect();
                    pearson(&a, &b)
                })
                .collect();
            StableConvergence { j, k, exact: exact[i], empirical_corr: corr, std_error: std_dev(&boot), replicates }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_values() {
        assert!(gaussian_quantile(0.5).unwrap().abs() < 1e-15);
        assert!((gaussian_quantile(0.975).unwrap() - 1.959964).abs() < 1e-5);
        for p in [1e-10, 1e-4, 0.01, 0.3, 0.77, 0.999, 1.0 - 1e-9] {
            let x = gaussian_quantile(p).unwrap();
            assert!((gaussian_cdf(x) - p).abs() < 1e-12, "p = {p}");
        }
        // dyadic levels keep 1 − p exact
        for i in 1..1024 {
            let p = i as f64 / 1024.0;
            assert!((gaussian_quantile(p).unwrap() + gaussian_quantile(1.0 - p).unwrap()).abs() < 1e-12);
        }
        assert!(gaussian_quantile(0.0).is_err());
        assert!(gaussian_quantile(1.0).is_err());
    }

    #[test]
    fn wasserstein_self_and_shift() {
        let q = quantile_grid(1000);
        assert!(empirical_wasserstein_1d(&q, 1).unwrap().value < 1e-12);
        let shifted: Vec<f64> = q.iter().map(|x| x + 0.3).collect();
        assert!((empirical_wasserstein_1d(&shifted, 1).unwrap().value - 0.3).abs() < 1e-10);
        assert!(matches!(empirical_wasserstein_1d(&q[..50], 1), Err(Error::SampleSize { .. })));
    }

    #[test]
    fn sorted_matching_is_optimal() {
        let xs = [0.7, -2.1, 0.05, 3.3, -0.4];
        let q = quantile_grid(5);
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let fast = w1_sorted(&sorted, &q);
        // all 5! matchings
        let mut best = f64::INFINITY;
        let mut perm = [0usize, 1, 2, 3, 4];
        fn heap(k: usize, p: &mut [usize; 5], xs: &[f64; 5], q: &[f64], best: &mut f64) {
            if k == 1 {
                let c = p.iter().enumerate().map(|(i, &j)| (xs[i] - q[j]).abs()).sum::<f64>() / 5.0;
                *best = best.min(c);
                return;
            }
            for i in 0..k {
                heap(k - 1, p, xs, q, best);
                if k % 2 == 0 { p.swap(i, k - 1) } else { p.swap(0, k - 1) }
            }
        }
        heap(5, &mut perm, &xs, &q, &mut best);
        assert!((fast - best).abs() < 1e-14);
    }

    #[test]
    fn dictionary_bounds() {
        let dict = TestFunctionDictionary::standard(3);
        assert_eq!(dict.len(), 256);
        let mut rng = rng_for(5);
        let h = 1e-4;
        for g in &dict.functions {
            let (lip, hess) = g.derivative_bounds();
            assert!(lip <= 1.0 + 1e-12 && hess <= 1.0 + 1e-12);
            for _ in 0..4 {
                let x: Vec<f64> = (0..3).map(|_| rng.sample::<f64, _>(StandardNormal) * 2.0).collect();
                let mut grad = 0.0;
                for a in 0..3 {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[a] += h;
                    xm[a] -= h;
                    grad += ((g.eval(&xp) - g.eval(&xm)) / (2.0 * h)).powi(2);
                }
                assert!(grad.sqrt() <= lip + 1e-6);
            }
        }
        let zero = TestFunction::new(vec![0.0, 0.0], 0.3);
        assert_eq!(zero.eval(&[1.0, 2.0]), zero.gaussian_mean(&CovMatrix::identity(2)));
    }

    #[test]
    fn two_point_law() {
        // d = 1, X uniform on {−1, +1}: E cos(wX + c) = cos(c) cos(w)
        let samples: Vec<Vec<f64>> = (0..1000).map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }]).collect();
        let dict = TestFunctionDictionary::standard(1);
        let target = CovMatrix::identity(1);
        let (est, _) = empirical_d2_lower(&samples, &target, &dict, 3).unwrap();
        let brute = dict
            .functions
            .iter()
            .map(|g| (g.phase.cos() * (g.w[0].cos() - (-0.5 * g.w[0] * g.w[0]).exp()) / g.norm).abs())
            .fold(0.0, f64::max);
        assert!((est.value - brute).abs() < 1e-12);
    }

    #[test]
    fn moments_basic() {
        let c = vec![2.5; 200];
        let m = moment_diagnostics(&c, 1).unwrap();
        assert_eq!(m.variance, 0.0);
        assert!(m.skewness.is_none() && m.excess_kurtosis.is_none());
        let x: Vec<f64> = (0..500).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let (a, b) = (moment_diagnostics(&x, 1).unwrap(), moment_diagnostics(&y, 1).unwrap());
        assert!((b.variance / a.variance - 4.0).abs() < 1e-12);
    }
}
