//! Normalized compensated needlet coefficients of a Poisson field, their
//! exact covariances, and the fixed-sample-size (de-Poissonized) variant.

use crate::error::{Error, Result};
use crate::field::{poisson_draw, FieldRealization, PoissonFieldSpec, SphereDensity};
use crate::needlet::{min_pairwise_distance, NeedletFrame, Scale, ZonalTable};
use crate::rng::{rng_for, uniform_sphere};
use crate::sphere::{gauss_legendre, legendre::legendre_series, spherical_distance, QuadratureGrid, SpherePoint};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

/// Separation constant `c` in the check `min_separation ≥ c/√d`.
pub const SELECTION_C: f64 = 0.25;
const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoeffStats {
    pub j: usize,
    pub k: usize,
    /// `σ²_jk = ∫ ψ²_jk f`.
    pub sigma_sq: f64,
    /// `b_jk = ∫ ψ_jk f`.
    pub b: f64,
}

/// Azimuthal integral of `f` around `center`, as a function of the
/// colatitude measured from `center`. Exact for bandlimited `f`.
pub(crate) fn azimuthal_profile(density: &SphereDensity, center: &SpherePoint, theta: f64) -> f64 {
    let n = density.degree() + 1;
    let h = 2.0 * PI / n as f64;
    (0..n).map(|i| density.eval(&center.local_to_global(theta, i as f64 * h))).sum::<f64>() * h
}

/// `(∫ g² F du, ∫ g F du)` with `F` the azimuthal profile, by exact Gauss rules in `u`.
fn zonal_moments(scale: &Scale, density: &SphereDensity, center: &SpherePoint) -> (f64, f64) {
    let coeffs = scale.profile().coeffs();
    if density.is_uniform() {
        // F ≡ 2π/(4π); ∫ g² du and ∫ g du follow from orthogonality of P_l
        let sq: f64 = coeffs.iter().enumerate().map(|(l, c)| c * c * 2.0 / (2 * l + 1) as f64).sum();
        let lin = coeffs.first().map_or(0.0, |c| 2.0 * c);
        return (sq * 0.5, lin * 0.5);
    }
    let degree = 2 * scale.profile().l_max() + density.degree();
    let (x, w) = gauss_legendre(degree / 2 + 1);
    let mut sq = 0.0;
    let mut lin = 0.0;
    for (u, wi) in x.iter().zip(&w) {
        let g = legendre_series(coeffs, *u);
        let f = azimuthal_profile(density, center, u.clamp(-1.0, 1.0).acos());
        sq += wi * g * g * f;
        lin += wi * g * f;
    }
    (sq, lin)
}

pub fn coeff_stats(frame: &NeedletFrame, density: &SphereDensity, j: usize, k: usize) -> Result<CoeffStats> {
    let scale = frame.scale(j)?;
    let center = frame.center(j, k)?;
    let lam = frame.weight(j, k)?;
    let (sq, lin) = zonal_moments(scale, density, &center);
    let sigma_sq = lam * sq;
    if !(sigma_sq > 0.0) || !sigma_sq.is_finite() {
        return Err(Error::Convergence(format!("σ² at ({j},{k}) is {sigma_sq}")));
    }
    Ok(CoeffStats { j, k, sigma_sq, b: lam.sqrt() * lin })
}

/// A set of centers at one scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoeffSelection {
    pub j: usize,
    pub centers: Vec<usize>,
    /// Smallest pairwise spherical distance; `+∞` for a single center.
    pub min_separation: f64,
}

impl CoeffSelection {
    pub fn explicit(frame: &NeedletFrame, j: usize, centers: Vec<usize>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Empty("selection needs at least one center".into()));
        }
        let points = centers.iter().map(|&k| frame.center(j, k)).collect::<Result<Vec<_>>>()?;
        let min_separation = min_pairwise_distance(&points);
        if min_separation == 0.0 {
            return Err(Error::Separation { separation: 0.0, required: f64::MIN_POSITIVE });
        }
        Ok(Self { j, centers, min_separation })
    }

    pub fn d(&self) -> usize {
        self.centers.len()
    }

    /// Checks `c/√d ≤ min_separation ≤ C/√d`.
    pub fn check_net(&self, c: f64, c_upper: f64) -> Result<()> {
        if self.d() < 2 {
            return Ok(());
        }
        let rd = (self.d() as f64).sqrt();
        if self.min_separation < c / rd {
            return Err(Error::Separation { separation: self.min_separation, required: c / rd });
        }
        if self.min_separation > c_upper / rd {
            return Err(Error::Separation { separation: self.min_separation, required: c_upper / rd });
        }
        Ok(())
    }
}

/// Greedy farthest-point selection of `d` centers at scale `j`, starting
/// from center 0. Ties go to the lowest index.
pub fn select_centers(frame: &NeedletFrame, j: usize, d: usize) -> Result<CoeffSelection> {
    let scale = frame.scale(j)?;
    let pts = scale.centers();
    if d > pts.len() {
        return Err(Error::Infeasible { requested: d, available: pts.len() });
    }
    if d == 0 {
        return Err(Error::Invalid("d must be at least 1".into()));
    }
    let mut chosen = vec![0usize];
    let mut dist: Vec<f64> = pts.iter().map(|p| spherical_distance(p, &pts[0])).collect();
    while chosen.len() < d {
        let mut best = 0;
        for i in 1..pts.len() {
            if dist[i] > dist[best] {
                best = i;
            }
        }
        chosen.push(best);
        for (i, p) in pts.iter().enumerate() {
            dist[i] = dist[i].min(spherical_distance(p, &pts[best]));
        }
    }
    let sel = CoeffSelection::explicit(frame, j, chosen)?;
    if sel.d() >= 2 && sel.min_separation < SELECTION_C / (d as f64).sqrt() {
        return Err(Error::Separation {
            separation: sel.min_separation,
            required: SELECTION_C / (d as f64).sqrt(),
        });
    }
    Ok(sel)
}

/// Everything needed to turn point sets into coefficient vectors quickly.
#[derive(Debug, Clone)]
pub struct CoeffModel {
    pub selection: CoeffSelection,
    pub stats: Vec<CoeffStats>,
    centers: Vec<SpherePoint>,
    sqrt_lambda: Vec<f64>,
    table: ZonalTable,
    uniform: bool,
}

impl CoeffModel {
    pub fn new(frame: &NeedletFrame, density: &SphereDensity, selection: CoeffSelection) -> Result<Self> {
        let scale = frame.scale(selection.j).map_err(|_| {
            Error::Mismatch(format!("selection scale {} is not in the frame", selection.j))
        })?;
        let stats = selection
            .centers
            .iter()
            .map(|&k| coeff_stats(frame, density, selection.j, k))
            .collect::<Result<Vec<_>>>()?;
        let centers = selection.centers.iter().map(|&k| scale.centers()[k]).collect();
        let sqrt_lambda = selection.centers.iter().map(|&k| scale.weights()[k].sqrt()).collect();
        Ok(Self { selection, stats, centers, sqrt_lambda, table: scale.table(), uniform: density.is_uniform() })
    }

    pub fn d(&self) -> usize {
        self.centers.len()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.stats.iter().map(|s| s.sigma_sq.sqrt()).collect()
    }

    /// `Σ_i ψ_jk(x_i)` for every selected center.
    pub fn raw_sums(&self, points: impl IntoIterator<Item = SpherePoint>) -> Vec<f64> {
        let mut acc = vec![0.0; self.d()];
        for x in points {
            for (a, c) in acc.iter_mut().zip(&self.centers) {
                *a += self.table.eval(x.dot(c).clamp(-1.0, 1.0));
            }
        }
        acc.iter_mut().zip(&self.sqrt_lambda).for_each(|(a, s)| *a *= s);
        acc
    }

    /// `(Σ ψ_jk(X_i) − R_t b_jk)/(√R_t σ_jk)`.
    pub fn normalize(&self, sums: &[f64], r_t: f64) -> Vec<f64> {
        sums.iter()
            .zip(&self.stats)
            .map(|(s, st)| (s - r_t * st.b) / (r_t.sqrt() * st.sigma_sq.sqrt()))
            .collect()
    }

    pub fn beta_tilde(&self, realization: &FieldRealization, spec: &PoissonFieldSpec) -> Vec<f64> {
        let sums = self.raw_sums(realization.all_points(spec));
        self.normalize(&sums, spec.r_t(realization.t))
    }

    /// `n^{-1/2} Σ_{i≤n} ψ_jk(X_i)/σ_jk` for exactly `n` points.
    pub fn depoissonized(&self, points: &[SpherePoint], n: usize) -> Result<Vec<f64>> {
        if !self.uniform {
            return Err(Error::Hypothesis("de-Poissonization requires the uniform density".into()));
        }
        if self.selection.j <= 1 {
            return Err(Error::Hypothesis("de-Poissonization requires j > 1".into()));
        }
        if points.len() != n || n == 0 {
            return Err(Error::Mismatch(format!("expected {n} points, got {}", points.len())));
        }
        let sums = self.raw_sums(points.iter().copied());
        let rn = (n as f64).sqrt();
        Ok(sums.iter().zip(&self.stats).map(|(s, st)| s / (rn * st.sigma_sq.sqrt())).collect())
    }

    /// Coupled `(Y′_n, Y_n)`: one i.i.d. uniform stream, `N ~ Poisson(n)`;
    /// `Y` sums the first `N` points and `Y′` the first `n`.
    pub fn coupled_pair(&self, n: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut rng = rng_for(seed);
        let big_n = poisson_draw(n as f64, &mut rng)? as usize;
        let points: Vec<SpherePoint> = (0..n.max(big_n)).map(|_| uniform_sphere(&mut rng)).collect();
        let y_prime = self.depoissonized(&points[..n], n)?;
        let sums = self.raw_sums(points[..big_n].iter().copied());
        let rn = (n as f64).sqrt();
        let y = sums.iter().zip(&self.stats).map(|(s, st)| s / (rn * st.sigma_sq.sqrt())).collect();
        Ok((y_prime, y))
    }
}

/// One normalized coefficient vector with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoeffVector {
    pub values: Vec<f64>,
    pub j: usize,
    pub centers: Vec<usize>,
    pub r_t: f64,
    pub seed: u64,
}

pub fn beta_tilde(
    realization: &FieldRealization,
    spec: &PoissonFieldSpec,
    frame: &NeedletFrame,
    selection: &CoeffSelection,
    seed: u64,
) -> Result<CoeffVector> {
    let model = CoeffModel::new(frame, &spec.density, selection.clone())?;
    Ok(CoeffVector {
        values: model.beta_tilde(realization, spec),
        j: selection.j,
        centers: selection.centers.clone(),
        r_t: spec.r_t(realization.t),
        seed,
    })
}

/// `(1/n) Σ ψ_jk(X_i)`.
pub fn empirical_beta_hat(points: &[SpherePoint], frame: &NeedletFrame, j: usize, k: usize) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Empty("empirical coefficient needs at least one point".into()));
    }
    let mut s = 0.0;
    for p in points {
        s += frame.eval(j, k, p)?;
    }
    Ok(s / points.len() as f64)
}

pub fn depoissonized_vector(
    n: usize,
    points: &[SpherePoint],
    frame: &NeedletFrame,
    density: &SphereDensity,
    selection: &CoeffSelection,
) -> Result<Vec<f64>> {
    if !density.is_uniform() {
        return Err(Error::Hypothesis("de-Poissonization requires the uniform density".into()));
    }
    CoeffModel::new(frame, density, selection.clone())?.depoissonized(points, n)
}

/// `2 e^{-n} nⁿ / n!`, the coupled second moment `E[(Y′_n − Y_n)²]` per component.
pub fn coupling_second_moment(n: usize) -> f64 {
    let nf = n as f64;
    let ln = std::f64::consts::LN_2 - nf + if n == 0 { 0.0 } else { nf * nf.ln() } - statrs::function::gamma::ln_gamma(nf + 1.0);
    ln.exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CovKind {
    Target,
    Exact,
    Empirical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    pub matrix: DMatrix<f64>,
    pub kind: CovKind,
}

impl CovMatrix {
    pub fn new(matrix: DMatrix<f64>, kind: CovKind) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Mismatch("covariance must be square".into()));
        }
        let n = matrix.nrows();
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (matrix[(i, j)], matrix[(j, i)]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::Mismatch(format!("covariance not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { matrix, kind })
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: DMatrix::identity(d, d), kind: CovKind::Target }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn check_psd(&self) -> Result<()> {
        let m = self.min_eigenvalue();
        if m < -PSD_TOL {
            return Err(Error::NotPsd(m));
        }
        Ok(())
    }

    pub fn max_offdiag(&self) -> f64 {
        let n = self.dim();
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    best = best.max(self.matrix[(i, j)].abs());
                }
            }
        }
        best
    }

    pub fn max_abs_diff(&self, other: &CovMatrix) -> f64 {
        (&self.matrix - &other.matrix).abs().max()
    }
}

/// `Γ(k₁,k₂) = ∫ ψ_jk₁ ψ_jk₂ f / (σ_jk₁ σ_jk₂)`; independent of `R_t`.
pub fn covariance_exact(frame: &NeedletFrame, density: &SphereDensity, selection: &CoeffSelection) -> Result<CovMatrix> {
    let j = selection.j;
    let scale = frame.scale(j)?;
    let d = selection.d();
    let mut m = DMatrix::identity(d, d);
    if density.is_uniform() {
        let gram = scale.profile().gram_coeffs();
        let g1 = legendre_series(&gram, 1.0);
        for a in 0..d {
            for b in 0..a {
                let u = frame.center(j, selection.centers[a])?.dot(&frame.center(j, selection.centers[b])?);
                let v = legendre_series(&gram, u.clamp(-1.0, 1.0)) / g1;
                m[(a, b)] = v;
                m[(b, a)] = v;
            }
        }
        return CovMatrix::new(m, CovKind::Exact);
    }
    let model = CoeffModel::new(frame, density, selection.clone())?;
    let grid = QuadratureGrid::product(2 * scale.profile().l_max() + density.degree())?;
    let table_free = |k: usize, x: &SpherePoint| frame.eval(j, k, x);
    let fw: Vec<f64> = grid.nodes().iter().zip(grid.weights()).map(|(x, w)| w * density.eval(x)).collect();
    let values = selection
        .centers
        .iter()
        .map(|&k| grid.nodes().iter().map(|x| table_free(k, x)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    let sig = model.sigmas();
    for a in 0..d {
        for b in 0..a {
            let s: f64 = values[a].iter().zip(&values[b]).zip(&fw).map(|((x, y), w)| x * y * w).sum();
            let v = s / (sig[a] * sig[b]);
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    CovMatrix::new(m, CovKind::Exact)
}

/// Sample covariance (divisor `n − 1`) of the rows.
pub fn empirical_covariance(samples: &[Vec<f64>]) -> Result<CovMatrix> {
    if samples.len() < 2 {
        return Err(Error::SampleSize { required: 2, got: samples.len() });
    }
    let d = samples[0].len();
    if samples.iter().any(|s| s.len() != d) {
        return Err(Error::Mismatch("sample vectors differ in length".into()));
    }
    let n = samples.len() as f64;
    let mut mean = vec![0.0; d];
    for s in samples {
        mean.iter_mut().zip(s).for_each(|(m, v)| *m += v / n);
    }
    let mut m = DMatrix::zeros(d, d);
    for s in samples {
        for a in 0..d {
            let da = s[a] - mean[a];
            for b in 0..=a {
                m[(a, b)] += da * (s[b] - mean[b]);
            }
        }
    }
    for a in 0..d {
        for b in 0..=a {
            let v = m[(a, b)] / (n - 1.0);
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    CovMatrix::new(m, CovKind::Empirical)
}

/// CSV rows `replicate,j,k,value`.
pub fn write_coeff_csv<W: Write>(vectors: &[(usize, CoeffVector)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Invalid(format!("csv write failed: {e}"));
    w.write_record(["replicate", "j", "k", "value"]).map_err(io)?;
    for (r, v) in vectors {
        for (k, value) in v.centers.iter().zip(&v.values) {
            w.write_record(&[r.to_string(), v.j.to_string(), k.to_string(), format!("{value:.17e}")])
                .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::Invalid(format!("csv flush failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::sample_field;
    use crate::sphere::{HarmonicExpansion, HarmonicTerm};

    fn frame() -> NeedletFrame {
        NeedletFrame::build(2.0, 5).unwrap()
    }

    fn tilted() -> SphereDensity {
        let c = 0.5 / (4.0 * PI) / (3.0 / (4.0 * PI)).sqrt();
        SphereDensity::harmonic(HarmonicExpansion::new(1.0 / (4.0 * PI), vec![HarmonicTerm { l: 1, m: 0, coeff: c }]))
            .unwrap()
    }

    #[test]
    fn uniform_stats() {
        let f = frame();
        for (j, k) in [(2, 3), (3, 40), (4, 700)] {
            let s = coeff_stats(&f, &SphereDensity::uniform(), j, k).unwrap();
            let n2 = f.lp_norm(j, k, 2.0).unwrap().powi(2);
            assert!((s.sigma_sq - n2 / (4.0 * PI)).abs() < 1e-12 * n2);
            assert!(s.b.abs() < 1e-9);
        }
    }

    #[test]
    fn tilted_stats_match_product_quadrature() {
        let f = frame();
        let dens = tilted();
        let (j, k) = (3, 101);
        let s = coeff_stats(&f, &dens, j, k).unwrap();
        let grid = QuadratureGrid::product(2 * 16 + 1).unwrap();
        let sq = grid.integrate(|x| f.eval(j, k, x).unwrap().powi(2) * dens.eval(x));
        let lin = grid.integrate(|x| f.eval(j, k, x).unwrap() * dens.eval(x));
        assert!((s.sigma_sq - sq).abs() < 1e-11 * sq);
        assert!((s.b - lin).abs() < 1e-11);
        let n2 = f.lp_norm(j, k, 2.0).unwrap().powi(2);
        assert!(s.sigma_sq >= dens.zeta1() * n2 && s.sigma_sq <= dens.zeta2() * n2);
    }

    #[test]
    fn selection_geometry() {
        let f = frame();
        let s2 = select_centers(&f, 3, 2).unwrap();
        assert!(s2.min_separation > PI / 2.0);
        let s1 = select_centers(&f, 3, 1).unwrap();
        assert!(s1.min_separation.is_infinite());
        let kj = f.scale(2).unwrap().count();
        let all = select_centers(&f, 2, kj).unwrap();
        assert!(all.min_separation > 0.1 / 4.0 && all.min_separation < 2.0 / 4.0, "{}", all.min_separation);
        assert!(matches!(select_centers(&f, 2, kj + 1), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn single_point_component() {
        let f = frame();
        let sel = CoeffSelection::explicit(&f, 3, vec![17]).unwrap();
        let model = CoeffModel::new(&f, &SphereDensity::uniform(), sel).unwrap();
        let c = f.center(3, 17).unwrap();
        let v = model.normalize(&model.raw_sums([c]), 1.0);
        let st = coeff_stats(&f, &SphereDensity::uniform(), 3, 17).unwrap();
        let direct = (f.eval(3, 17, &c).unwrap() - st.b) / st.sigma_sq.sqrt();
        assert!((v[0] - direct).abs() < 1e-9 * direct.abs());
    }

    #[test]
    fn empty_realization_is_zero() {
        let f = frame();
        let spec = PoissonFieldSpec::new(SphereDensity::uniform(), 1e-9, vec![]).unwrap();
        let r = sample_field(&spec, 1.0, 0).unwrap();
        assert!(r.background_points.is_empty());
        let sel = select_centers(&f, 3, 3).unwrap();
        let v = beta_tilde(&r, &spec, &f, &sel, 0).unwrap();
        assert!(v.values.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn beta_hat_basics() {
        let f = frame();
        let c = f.center(3, 5).unwrap();
        let one = empirical_beta_hat(&[c], &f, 3, 5).unwrap();
        assert_eq!(one, f.eval(3, 5, &c).unwrap());
        assert!((empirical_beta_hat(&[c, c, c], &f, 3, 5).unwrap() - one).abs() < 1e-14 * one.abs());
        assert!(matches!(empirical_beta_hat(&[], &f, 3, 5), Err(Error::Empty(_))));
    }

    #[test]
    fn exact_covariance() {
        let f = frame();
        for dens in [SphereDensity::uniform(), tilted()] {
            let sel = select_centers(&f, 3, 6).unwrap();
            let g = covariance_exact(&f, &dens, &sel).unwrap();
            for i in 0..6 {
                assert!((g.matrix[(i, i)] - 1.0).abs() < 1e-10);
            }
            g.check_psd().unwrap();
        }
        // neighbouring centers are correlated; uniform and quadrature paths agree
        let sel = CoeffSelection::explicit(&f, 3, vec![100, 101, 102]).unwrap();
        let a = covariance_exact(&f, &SphereDensity::uniform(), &sel).unwrap();
        assert!(a.max_offdiag() > 1e-3);
        let flat = SphereDensity::harmonic(HarmonicExpansion::new(
            1.0 / (4.0 * PI),
            vec![HarmonicTerm { l: 2, m: 1, coeff: 1e-14 }],
        ))
        .unwrap();
        let b = covariance_exact(&f, &flat, &sel).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-10);
    }

    #[test]
    fn coupling_formula() {
        assert!((coupling_second_moment(2) - 0.541341).abs() < 1e-6);
        assert!((coupling_second_moment(1) - 0.735759).abs() < 1e-6);
        let r = coupling_second_moment(1024) / coupling_second_moment(256);
        assert!((r - 0.5).abs() < 1e-3);
    }

    #[test]
    fn depoissonization_hypotheses() {
        let f = frame();
        let sel = select_centers(&f, 1, 1).unwrap();
        let p = [SpherePoint::NORTH];
        assert!(matches!(
            depoissonized_vector(1, &p, &f, &SphereDensity::uniform(), &sel),
            Err(Error::Hypothesis(_))
        ));
        let sel3 = select_centers(&f, 3, 1).unwrap();
        assert!(matches!(depoissonized_vector(1, &p, &f, &tilted(), &sel3), Err(Error::Hypothesis(_))));
        assert!(depoissonized_vector(1, &p, &f, &SphereDensity::uniform(), &sel3).is_ok());
    }

    #[test]
    fn empirical_covariance_of_known_rows() {
        let rows = vec![vec![1.0, 2.0], vec![-1.0, -2.0], vec![1.0, -2.0], vec![-1.0, 2.0]];
        let c = empirical_covariance(&rows).unwrap();
        assert!((c.matrix[(0, 0)] - 4.0 / 3.0).abs() < 1e-15);
        assert!((c.matrix[(1, 1)] - 16.0 / 3.0).abs() < 1e-14);
        assert_eq!(c.matrix[(0, 1)], 0.0);
        assert!(matches!(
            CovMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]), CovKind::Exact).unwrap().check_psd(),
            Err(Error::NotPsd(_))
        ));
    }
}
