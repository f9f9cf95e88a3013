use super::frame::NeedletFrame;
use crate::error::{Error, Result};
use crate::sphere::{QuadratureGrid, SpherePoint};
use rayon::prelude::*;

/// A bandlimited function sampled on a quadrature grid fine enough for exact
/// analysis against every needlet of a frame.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    degree: usize,
    grid: QuadratureGrid,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn sample(frame: &NeedletFrame, degree: usize, f: impl Fn(&SpherePoint) -> f64) -> Result<Self> {
        let top = frame.scales().iter().map(|s| s.profile().l_max()).max().unwrap_or(0);
        let grid = QuadratureGrid::product(degree + top)?;
        let values = grid.nodes().iter().map(f).collect();
        Ok(Self { degree, grid, values })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Needlet coefficients `β_jk`, indexed `[j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeedletCoefficients {
    pub by_scale: Vec<Vec<f64>>,
}

impl NeedletCoefficients {
    pub fn zeros(frame: &NeedletFrame) -> Self {
        Self { by_scale: frame.scales().iter().map(|s| vec![0.0; s.count()]).collect() }
    }
}

/// `β_jk = ∫ f ψ_jk` by exact quadrature.
pub fn analyze(frame: &NeedletFrame, f: &SampledFunction) -> Result<NeedletCoefficients> {
    if f.degree > frame.capacity() {
        return Err(Error::Bandwidth { degree: f.degree, capacity: frame.capacity() });
    }
    let needed = f.degree + frame.scales().iter().map(|s| s.profile().l_max()).max().unwrap_or(0);
    if f.grid.degree_exact() < needed {
        return Err(Error::Mismatch(format!(
            "sample grid degree {} below required {needed}",
            f.grid.degree_exact()
        )));
    }
    let nodes = f.grid.nodes();
    let wf: Vec<f64> = f.grid.weights().iter().zip(&f.values).map(|(w, v)| w * v).collect();
    let by_scale = frame
        .scales()
        .iter()
        .map(|s| {
            s.centers()
                .par_iter()
                .zip(s.weights().par_iter())
                .map(|(c, lam)| {
                    let acc: f64 = nodes
                        .iter()
                        .zip(&wf)
                        .map(|(x, w)| w * s.profile().eval(x.dot(c).clamp(-1.0, 1.0)))
                        .sum();
                    lam.sqrt() * acc
                })
                .collect()
        })
        .collect();
    Ok(NeedletCoefficients { by_scale })
}

/// `Σ_jk β_jk ψ_jk(x)` at each point.
pub fn synthesize(frame: &NeedletFrame, coeffs: &NeedletCoefficients, points: &[SpherePoint]) -> Result<Vec<f64>> {
    if coeffs.by_scale.len() != frame.scales().len() {
        return Err(Error::Mismatch("coefficient scales do not match frame".into()));
    }
    for (s, c) in frame.scales().iter().zip(&coeffs.by_scale) {
        if c.len() != s.count() {
            return Err(Error::Mismatch(format!("scale {} has {} coefficients, expected {}", s.j, c.len(), s.count())));
        }
    }
    Ok(points
        .par_iter()
        .map(|x| {
            let mut total = 0.0;
            for (s, c) in frame.scales().iter().zip(&coeffs.by_scale) {
                for ((center, lam), beta) in s.centers().iter().zip(s.weights()).zip(c) {
                    if *beta != 0.0 {
                        total += beta * lam.sqrt() * s.profile().eval(x.dot(center).clamp(-1.0, 1.0));
                    }
                }
            }
            total
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::real_harmonic;

    #[test]
    fn constant_has_no_detail_coefficients() {
        let frame = NeedletFrame::build(2.0, 4).unwrap();
        let c = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
        let f = SampledFunction::sample(&frame, 0, |_| c).unwrap();
        let beta = analyze(&frame, &f).unwrap();
        for j in 2..=4 {
            assert!(beta.by_scale[j].iter().all(|b| b.abs() < 1e-12));
        }
    }

    #[test]
    fn bandlimited_round_trip() {
        let frame = NeedletFrame::build(2.0, 4).unwrap();
        let f = SampledFunction::sample(&frame, 3, |p| real_harmonic(3, 2, p)).unwrap();
        let beta = analyze(&frame, &f).unwrap();
        let probes: Vec<SpherePoint> =
            (0..60).map(|i| SpherePoint::from_angles(0.02 + 3.1 * i as f64 / 60.0, 1.3 * i as f64)).collect();
        let back = synthesize(&frame, &beta, &probes).unwrap();
        let err = probes
            .iter()
            .zip(&back)
            .map(|(p, v)| (real_harmonic(3, 2, p) - v).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "round-trip error {err}");
    }

    #[test]
    fn zero_in_zero_out() {
        let frame = NeedletFrame::build(2.0, 3).unwrap();
        let f = SampledFunction::sample(&frame, 2, |_| 0.0).unwrap();
        let beta = analyze(&frame, &f).unwrap();
        assert_eq!(beta, NeedletCoefficients::zeros(&frame));
        let back = synthesize(&frame, &beta, &[SpherePoint::NORTH]).unwrap();
        assert_eq!(back, vec![0.0]);
    }

    #[test]
    fn bandwidth_error() {
        let frame = NeedletFrame::build(2.0, 3).unwrap();
        let f = SampledFunction::sample(&frame, 9, |p| p.z).unwrap();
        assert!(matches!(analyze(&frame, &f), Err(Error::Bandwidth { .. })));
    }
}
