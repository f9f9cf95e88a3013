//! Spherical Poisson random measures with intensity `R·t·f(x)dx`, plus
//! optional atomic point sources.

use crate::error::{Error, Result};
use crate::rng::{rng_for, uniform_sphere};
use crate::sphere::{build_quadrature, HarmonicExpansion, SpherePoint};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

const UNIT_MASS_TOL: f64 = 1e-8;
/// Fraction of `ζ₂ − ζ₁` by which the scanned bounds are widened.
const ZETA_PADDING: f64 = 0.01;

/// Serializable description of a density, as it appears in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensitySpec {
    Uniform,
    /// `1/(4π) + Σ coeff·Y_lm` with every `l ≥ 1`.
    Bandlimited { terms: Vec<crate::sphere::HarmonicTerm> },
}

#[derive(Debug, Clone)]
enum DensityKind {
    Uniform,
    Harmonic(HarmonicExpansion),
}

/// Probability density on the sphere satisfying `0 < ζ₁ ≤ f ≤ ζ₂`.
#[derive(Debug, Clone)]
pub struct SphereDensity {
    kind: DensityKind,
    zeta1: f64,
    zeta2: f64,
}

impl SphereDensity {
    pub fn uniform() -> Self {
        let c = 1.0 / (4.0 * PI);
        Self { kind: DensityKind::Uniform, zeta1: c, zeta2: c }
    }

    /// Bandlimited density; `constant` must be `1/(4π)` for unit mass.
    pub fn harmonic(expansion: HarmonicExpansion) -> Result<Self> {
        if expansion.terms.iter().any(|t| t.l == 0) {
            return Err(Error::Invalid("put the l = 0 part in the constant".into()));
        }
        let degree = expansion.degree();
        let grid = build_quadrature(2 * degree.max(1))?;
        let mass = grid.integrate(|p| expansion.eval(p));
        if (mass - 1.0).abs() > UNIT_MASS_TOL {
            return Err(Error::Invalid(format!("density integrates to {mass}, not 1")));
        }
        let scan = build_quadrature(8 * degree.max(4) + 32)?;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in scan.nodes() {
            let v = expansion.eval(p);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let pad = ZETA_PADDING * (hi - lo);
        let (zeta1, zeta2) = (lo - pad, hi + pad);
        if !(zeta1 > 0.0) {
            return Err(Error::Ava(format!("density is not bounded away from zero (min ≈ {lo:.3e})")));
        }
        Ok(Self { kind: DensityKind::Harmonic(expansion), zeta1, zeta2 })
    }

    pub fn from_spec(spec: &DensitySpec) -> Result<Self> {
        match spec {
            DensitySpec::Uniform => Ok(Self::uniform()),
            DensitySpec::Bandlimited { terms } => {
                for t in terms {
                    if t.m.unsigned_abs() as usize > t.l {
                        return Err(Error::Invalid(format!("term (l={}, m={}) has |m| > l", t.l, t.m)));
                    }
                }
                Self::harmonic(HarmonicExpansion::new(1.0 / (4.0 * PI), terms.clone()))
            }
        }
    }

    #[inline]
    pub fn eval(&self, p: &SpherePoint) -> f64 {
        match &self.kind {
            DensityKind::Uniform => 1.0 / (4.0 * PI),
            DensityKind::Harmonic(e) => e.eval(p),
        }
    }

    pub fn zeta1(&self) -> f64 {
        self.zeta1
    }

    pub fn zeta2(&self) -> f64 {
        self.zeta2
    }

    /// Harmonic degree, 0 for the uniform density.
    pub fn degree(&self) -> usize {
        match &self.kind {
            DensityKind::Uniform => 0,
            DensityKind::Harmonic(e) => e.degree(),
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, DensityKind::Uniform)
    }

    pub fn expansion(&self) -> Option<&HarmonicExpansion> {
        match &self.kind {
            DensityKind::Uniform => None,
            DensityKind::Harmonic(e) => Some(e),
        }
    }

    /// One draw from `f` by rejection against the uniform law scaled by `ζ₂`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SpherePoint {
        if self.is_uniform() {
            return uniform_sphere(rng);
        }
        loop {
            let x = uniform_sphere(rng);
            let u: f64 = rng.random();
            if u * self.zeta2 <= self.eval(&x) {
                return x;
            }
        }
    }
}

/// Atomic source at `location` emitting events at `rate` per unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSource {
    pub location: SpherePoint,
    pub rate: f64,
}

/// Poisson field with background intensity `R·t·f` and optional sources.
#[derive(Debug, Clone)]
pub struct PoissonFieldSpec {
    pub density: SphereDensity,
    rate: f64,
    pub sources: Vec<PointSource>,
}

impl PoissonFieldSpec {
    pub fn new(density: SphereDensity, rate: f64, sources: Vec<PointSource>) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::Invalid(format!("rate must be positive and finite, got {rate}")));
        }
        if let Some(s) = sources.iter().find(|s| !(s.rate >= 0.0) || !s.rate.is_finite()) {
            return Err(Error::Invalid(format!("source rate must be non-negative, got {}", s.rate)));
        }
        Ok(Self { density, rate, sources })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// `R_t = R·t`.
    pub fn r_t(&self, t: f64) -> f64 {
        self.rate * t
    }
}

/// One draw of the field at time `t`; source events sit on their source.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRealization {
    pub t: f64,
    pub background_points: Vec<SpherePoint>,
    pub source_counts: Vec<u64>,
}

impl FieldRealization {
    /// Every event, source events repeated at their location.
    pub fn all_points<'a>(&'a self, spec: &'a PoissonFieldSpec) -> impl Iterator<Item = SpherePoint> + 'a {
        let src = spec
            .sources
            .iter()
            .zip(&self.source_counts)
            .flat_map(|(s, &n)| std::iter::repeat_n(s.location, n as usize));
        self.background_points.iter().copied().chain(src)
    }

    /// CSV rows `t,kind,theta,phi`; kind is `background` or `source_<p>`.
    pub fn write_csv<W: Write>(&self, spec: &PoissonFieldSpec, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Invalid(format!("csv write failed: {e}"));
        w.write_record(["t", "kind", "theta", "phi"]).map_err(io)?;
        for p in &self.background_points {
            w.write_record(&[self.t.to_string(), "background".into(), p.theta().to_string(), p.phi().to_string()])
                .map_err(io)?;
        }
        for (i, (s, &n)) in spec.sources.iter().zip(&self.source_counts).enumerate() {
            for _ in 0..n {
                w.write_record(&[
                    self.t.to_string(),
                    format!("source_{i}"),
                    s.location.theta().to_string(),
                    s.location.phi().to_string(),
                ])
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::Invalid(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

/// Exact Poisson draw; `rand_distr` uses inversion for small means and
/// transformed rejection for large ones.
pub fn poisson_draw<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<u64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("Poisson mean must be finite and non-negative, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(lambda).map_err(|e| Error::Domain(format!("Poisson mean {lambda}: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

/// `n` i.i.d. points with density `f`.
pub fn sample_fixed_n<R: Rng + ?Sized>(density: &SphereDensity, n: usize, rng: &mut R) -> Vec<SpherePoint> {
    (0..n).map(|_| density.sample(rng)).collect()
}

fn draw_window<R: Rng + ?Sized>(spec: &PoissonFieldSpec, dt: f64, rng: &mut R) -> Result<(Vec<SpherePoint>, Vec<u64>)> {
    let n = poisson_draw(spec.r_t(dt), rng)?;
    let points = sample_fixed_n(&spec.density, n as usize, rng);
    let counts = spec
        .sources
        .iter()
        .map(|s| poisson_draw(s.rate * dt, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok((points, counts))
}

pub fn sample_field(spec: &PoissonFieldSpec, t: f64, seed: u64) -> Result<FieldRealization> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    let mut rng = rng_for(seed);
    let (background_points, source_counts) = draw_window(spec, t, &mut rng)?;
    Ok(FieldRealization { t, background_points, source_counts })
}

/// Extends a realization from `t₁` to `t₂` with an independent increment.
pub fn increment_realization(
    spec: &PoissonFieldSpec,
    current: &FieldRealization,
    t2: f64,
    seed: u64,
) -> Result<FieldRealization> {
    if t2 < current.t || t2.is_nan() {
        return Err(Error::Ordering { t1: current.t, t2 });
    }
    if t2 == current.t {
        return Ok(current.clone());
    }
    let mut rng = rng_for(seed);
    let (points, counts) = draw_window(spec, t2 - current.t, &mut rng)?;
    let mut background_points = current.background_points.clone();
    background_points.extend(points);
    let source_counts = current.source_counts.iter().zip(counts).map(|(a, b)| a + b).collect();
    Ok(FieldRealization { t: t2, background_points, source_counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::HarmonicTerm;

    pub(crate) fn tilted() -> SphereDensity {
        // (1 + 0.5 cos θ)/(4π)
        let c = 0.5 / (4.0 * PI) / (3.0 / (4.0 * PI)).sqrt();
        SphereDensity::harmonic(HarmonicExpansion::new(1.0 / (4.0 * PI), vec![HarmonicTerm { l: 1, m: 0, coeff: c }]))
            .unwrap()
    }

    #[test]
    fn tilted_density_bounds() {
        let f = tilted();
        let p = SpherePoint::from_angles(0.3, 1.0);
        assert!((f.eval(&p) - (1.0 + 0.5 * 0.3f64.cos()) / (4.0 * PI)).abs() < 1e-14);
        assert!(f.zeta1() <= 0.5 / (4.0 * PI) && f.zeta1() > 0.45 / (4.0 * PI));
        assert!(f.zeta2() >= 1.5 / (4.0 * PI) && f.zeta2() < 1.55 / (4.0 * PI));
    }

    #[test]
    fn rejects_bad_densities() {
        let neg = HarmonicExpansion::new(1.0 / (4.0 * PI), vec![HarmonicTerm { l: 1, m: 0, coeff: 0.5 }]);
        assert!(matches!(SphereDensity::harmonic(neg), Err(Error::Ava(_))));
        let heavy = HarmonicExpansion::new(1.0, vec![]);
        assert!(SphereDensity::harmonic(heavy).is_err());
    }

    #[test]
    fn poisson_edge_cases() {
        let mut rng = rng_for(1);
        assert_eq!(poisson_draw(0.0, &mut rng).unwrap(), 0);
        assert!(matches!(poisson_draw(-1.0, &mut rng), Err(Error::Domain(_))));
    }

    #[test]
    fn same_seed_same_realization() {
        let spec = PoissonFieldSpec::new(tilted(), 30.0, vec![]).unwrap();
        assert_eq!(sample_field(&spec, 1.0, 9).unwrap(), sample_field(&spec, 1.0, 9).unwrap());
        assert!(sample_field(&spec, 0.0, 9).is_err());
    }

    #[test]
    fn increments() {
        let spec = PoissonFieldSpec::new(SphereDensity::uniform(), 20.0, vec![]).unwrap();
        let a = sample_field(&spec, 1.0, 3).unwrap();
        assert_eq!(increment_realization(&spec, &a, 1.0, 4).unwrap(), a);
        assert!(matches!(increment_realization(&spec, &a, 0.5, 4), Err(Error::Ordering { .. })));
        let b = increment_realization(&spec, &a, 2.0, 4).unwrap();
        assert_eq!(&b.background_points[..a.background_points.len()], &a.background_points[..]);
    }

    #[test]
    fn csv_export() {
        let src = PointSource { location: SpherePoint::NORTH, rate: 3.0 };
        let spec = PoissonFieldSpec::new(SphereDensity::uniform(), 5.0, vec![src]).unwrap();
        let r = sample_field(&spec, 1.0, 11).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&spec, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,kind,theta,phi");
        assert_eq!(lines.len() as u64, 1 + r.background_points.len() as u64 + r.source_counts[0]);
        assert_eq!(r.all_points(&spec).count(), lines.len() - 1);
    }
}
