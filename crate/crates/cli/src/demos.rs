//! Application demos: density estimation by needlet thresholding, and
//! detection of point sources with a max-coefficient test.

use crate::config::{SourceTestConfig, ThresholdConfig};
use crate::error::{Context, HarnessError, Result};
use nalgebra::DVector;
use needlab::coefficients::{covariance_exact, CoeffModel, CoeffSelection};
use needlab::field::{sample_field, sample_fixed_n, PointSource, PoissonFieldSpec, SphereDensity};
use needlab::needlet::NeedletFrame;
use needlab::rng::rng_for;
use needlab::sphere::legendre::normalized_assoc_legendre;
use needlab::sphere::{spherical_distance, QuadratureGrid, SpherePoint};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};

/// Real harmonic coefficients up to degree `l_max`, indexed `l² + l + m`.
#[derive(Debug, Clone)]
struct HarmonicCoeffs {
    l_max: usize,
    values: Vec<f64>,
}

impl HarmonicCoeffs {
    fn zeros(l_max: usize) -> Self {
        Self { l_max, values: vec![0.0; (l_max + 1) * (l_max + 1)] }
    }

    /// Calls `visit(index, Y_lm(p))` for every `(l, m)`.
    fn for_each_harmonic(l_max: usize, p: &SpherePoint, buf: &mut Vec<f64>, mut visit: impl FnMut(usize, f64)) {
        let z = p.z.clamp(-1.0, 1.0);
        let phi = p.y.atan2(p.x);
        for m in 0..=l_max {
            normalized_assoc_legendre(m, l_max, z, buf);
            if m == 0 {
                for (i, v) in buf.iter().enumerate() {
                    let l = i;
                    visit(l * l + l, *v);
                }
            } else {
                let (s, c) = (m as f64 * phi).sin_cos();
                for (i, v) in buf.iter().enumerate() {
                    let l = m + i;
                    visit(l * l + l + m, SQRT_2 * v * c);
                    visit(l * l + l - m, SQRT_2 * v * s);
                }
            }
        }
    }

    /// `(1/n) Σ_i Y_lm(x_i)`: the harmonic coefficients of the empirical measure.
    fn empirical(points: &[SpherePoint], l_max: usize) -> Self {
        let mut out = Self::zeros(l_max);
        let mut buf = Vec::with_capacity(l_max + 1);
        for p in points {
            Self::for_each_harmonic(l_max, p, &mut buf, |i, y| out.values[i] += y);
        }
        let n = points.len().max(1) as f64;
        out.values.iter_mut().for_each(|v| *v /= n);
        out
    }

    fn eval(&self, p: &SpherePoint, buf: &mut Vec<f64>) -> f64 {
        let mut s = 0.0;
        Self::for_each_harmonic(self.l_max, p, buf, |i, y| s += self.values[i] * y);
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RiskRow {
    pub n: usize,
    pub threshold: f64,
    pub mean_risk: f64,
    pub risk_stderr: f64,
    /// Share of `j > 1` coefficients surviving the threshold.
    pub kept_fraction: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RiskTable {
    pub j_max: usize,
    pub c: f64,
    pub rows: Vec<RiskRow>,
}

/// Hard-thresholded needlet density estimator: `β̂_jk` from `n` i.i.d.
/// points, coefficients at `j > 1` zeroed below `c·√(log n / n)`, and
/// `f̂ = 1/(4π) + Σ β̂_jk ψ_jk`. Reports the mean `L²` risk.
pub fn demo_threshold_density(
    frame: &NeedletFrame,
    density: &SphereDensity,
    params: &ThresholdConfig,
    seed: u64,
) -> Result<RiskTable> {
    let j_max = params.j_max;
    let top = frame.scale(j_max).context(|| format!("threshold demo scale {j_max}"))?;
    let l_max = top.profile().l_max();
    let grid = QuadratureGrid::product(2 * l_max.max(density.degree()))
        .context(|| "threshold demo quadrature".into())?;
    let truth: Vec<f64> = grid.nodes().iter().map(|x| density.eval(x)).collect();
    let scales: Vec<_> = (0..=j_max).map(|j| (j, frame.scale(j).expect("scale exists").table())).collect();
    let mut rows = Vec::with_capacity(params.n.len());
    for (ni, &n) in params.n.iter().enumerate() {
        let threshold = params.c * ((n as f64).ln() / n as f64).sqrt();
        let runs: Vec<(f64, f64)> = (0..params.replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng = rng_for(seed.wrapping_add((ni * params.replicates + r) as u64));
                let points = sample_fixed_n(density, n, &mut rng);
                let emp = HarmonicCoeffs::empirical(&points, l_max);
                let mut buf = Vec::with_capacity(l_max + 1);
                let g: Vec<f64> = grid.nodes().iter().map(|x| emp.eval(x, &mut buf)).collect();
                let mut estimate = vec![1.0 / (4.0 * PI); grid.len()];
                let (mut kept, mut total) = (0usize, 0usize);
                for (j, table) in &scales {
                    let scale = frame.scale(*j).expect("scale exists");
                    for (c, lam) in scale.centers().iter().zip(scale.weights()) {
                        let sl = lam.sqrt();
                        let psi = |x: &SpherePoint| sl * table.eval(x.dot(c).clamp(-1.0, 1.0));
                        let beta: f64 =
                            grid.nodes().iter().zip(grid.weights()).zip(&g).map(|((x, w), gv)| w * gv * psi(x)).sum();
                        if *j > 1 {
                            total += 1;
                            if beta.abs() < threshold || threshold.is_infinite() {
                                continue;
                            }
                            kept += 1;
                        }
                        for (e, x) in estimate.iter_mut().zip(grid.nodes()) {
                            *e += beta * psi(x);
                        }
                    }
                }
                let risk: f64 =
                    estimate.iter().zip(&truth).zip(grid.weights()).map(|((e, t), w)| w * (e - t).powi(2)).sum();
                (risk, if total == 0 { 0.0 } else { kept as f64 / total as f64 })
            })
            .collect();
        let m = runs.len() as f64;
        let mean = runs.iter().map(|r| r.0).sum::<f64>() / m;
        let var = runs.iter().map(|r| (r.0 - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
        rows.push(RiskRow {
            n,
            threshold,
            mean_risk: mean,
            risk_stderr: (var / m).sqrt(),
            kept_fraction: runs.iter().map(|r| r.1).sum::<f64>() / m,
            replicates: runs.len(),
        });
    }
    Ok(RiskTable { j_max, c: params.c, rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerRow {
    /// Rate of every source.
    pub lambda: f64,
    pub rejection_rate: f64,
    pub std_error: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SourceTestTable {
    pub j: usize,
    pub d: usize,
    #[serde(rename = "R_t")]
    pub r_t: f64,
    pub level: f64,
    pub centers: Vec<usize>,
    /// `1 − level` quantile of `max_k |Z_k|`, `Z ~ N(0, Γ)`.
    pub critical_value: f64,
    /// Rejection rate with no sources.
    pub size: f64,
    pub rows: Vec<PowerRow>,
}

/// The center nearest each source, then farthest-point additions up to `d`.
pub fn source_selection(frame: &NeedletFrame, j: usize, d: usize, sources: &[SpherePoint]) -> Result<CoeffSelection> {
    let scale = frame.scale(j).context(|| format!("scale {j}"))?;
    let pts = scale.centers();
    if d > pts.len() {
        return Err(HarnessError::Config(format!("d = {d} exceeds the {} centers at scale {j}", pts.len())));
    }
    let nearest = |s: &SpherePoint| {
        (0..pts.len()).min_by(|&a, &b| spherical_distance(&pts[a], s).total_cmp(&spherical_distance(&pts[b], s)))
    };
    let mut chosen: Vec<usize> = Vec::with_capacity(d);
    for s in sources {
        if let Some(k) = nearest(s) {
            if !chosen.contains(&k) && chosen.len() < d {
                chosen.push(k);
            }
        }
    }
    if chosen.is_empty() {
        chosen.push(0);
    }
    let mut dist: Vec<f64> = pts
        .iter()
        .map(|p| chosen.iter().map(|&k| spherical_distance(p, &pts[k])).fold(f64::INFINITY, f64::min))
        .collect();
    while chosen.len() < d {
        let best = (0..pts.len()).max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a))).expect("nonempty");
        chosen.push(best);
        for (i, p) in pts.iter().enumerate() {
            dist[i] = dist[i].min(spherical_distance(p, &pts[best]));
        }
    }
    CoeffSelection::explicit(frame, j, chosen).context(|| "source selection".into())
}

fn rejection_rate(
    model: &CoeffModel,
    spec: &PoissonFieldSpec,
    critical: f64,
    replicates: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let hits = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let real = sample_field(spec, 1.0, seed.wrapping_add(r as u64))?;
            let t = model.beta_tilde(&real, spec).iter().fold(0.0f64, |m, b| m.max(b.abs()));
            Ok(usize::from(t > critical))
        })
        .collect::<needlab::Result<Vec<_>>>()
        .context(|| "simulating the test statistic".into())?
        .into_iter()
        .sum::<usize>();
    let p = hits as f64 / replicates as f64;
    Ok((p, (p * (1.0 - p) / replicates as f64).sqrt()))
}

/// Max-coefficient test for point sources: `T = max_k |β̃_jk|`, rejected
/// above the Gaussian `1 − level` quantile of `max_k |Z_k|`.
pub fn demo_point_source_test(
    frame: &NeedletFrame,
    density: &SphereDensity,
    locations: &[SpherePoint],
    params: &SourceTestConfig,
    seed: u64,
) -> Result<SourceTestTable> {
    if !(params.level > 0.0 && params.level < 1.0) {
        return Err(HarnessError::Config(format!("level must lie in (0, 1), got {}", params.level)));
    }
    if locations.is_empty() {
        return Err(HarnessError::Config("the source test needs at least one source location".into()));
    }
    let (j, r_t) = (params.j, params.r_t);
    let sel = source_selection(frame, j, params.d, locations)?;
    let gamma = covariance_exact(frame, density, &sel).context(|| "exact covariance".into())?;
    let chol = gamma
        .matrix
        .clone()
        .cholesky()
        .ok_or_else(|| HarnessError::Config("exact covariance is not positive definite".into()))?;
    let l = chol.l();
    let d = sel.d();
    let mut rng = rng_for(seed ^ 0x6a09_e667);
    let mut maxima: Vec<f64> = (0..params.gaussian_draws)
        .map(|_| {
            let xi = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
            (&l * xi).amax()
        })
        .collect();
    maxima.sort_by(f64::total_cmp);
    let idx = (((1.0 - params.level) * maxima.len() as f64).ceil() as usize).clamp(1, maxima.len()) - 1;
    let critical_value = maxima[idx];

    let model = CoeffModel::new(frame, density, sel.clone()).context(|| "coefficient model".into())?;
    let null = PoissonFieldSpec::new(density.clone(), r_t, vec![]).context(|| "null field".into())?;
    let (size, _) = rejection_rate(&model, &null, critical_value, params.replicates, seed)?;
    let lambdas = if params.lambdas.is_empty() {
        let unit = r_t.sqrt() * frame.base().powi(-(j as i32));
        vec![0.0, 5.0 * unit, 20.0 * unit]
    } else {
        params.lambdas.clone()
    };
    let rows = lambdas
        .iter()
        .map(|&lambda| {
            let sources = locations.iter().map(|&location| PointSource { location, rate: lambda }).collect();
            let spec = PoissonFieldSpec::new(density.clone(), r_t, sources).context(|| "source field".into())?;
            let (p, se) = rejection_rate(&model, &spec, critical_value, params.replicates, seed)?;
            Ok(PowerRow { lambda, rejection_rate: p, std_error: se, replicates: params.replicates })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SourceTestTable {
        j,
        d,
        r_t,
        level: params.level,
        centers: sel.centers,
        critical_value,
        size,
        rows,
    })
}
