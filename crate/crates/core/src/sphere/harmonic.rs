use super::legendre::normalized_assoc_legendre;
use super::SpherePoint;
use serde::{Deserialize, Serialize};

/// One real spherical-harmonic term `coeff · Y_lm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTerm {
    pub l: usize,
    pub m: i64,
    pub coeff: f64,
}

/// A bandlimited real function `constant + Σ coeff · Y_lm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicExpansion {
    pub constant: f64,
    pub terms: Vec<HarmonicTerm>,
}

impl HarmonicExpansion {
    pub fn new(constant: f64, terms: Vec<HarmonicTerm>) -> Self {
        for t in &terms {
            assert!(t.m.unsigned_abs() as usize <= t.l, "|m| must not exceed l");
        }
        Self { constant, terms }
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.l).max().unwrap_or(0)
    }

    pub fn eval(&self, p: &SpherePoint) -> f64 {
        if self.terms.is_empty() {
            return self.constant;
        }
        let lmax = self.degree();
        let mut buf = Vec::with_capacity(lmax + 1);
        let mut value = self.constant;
        let phi = p.y.atan2(p.x);
        let z = p.z.clamp(-1.0, 1.0);
        let mut current_m = usize::MAX;
        let mut sorted: Vec<&HarmonicTerm> = self.terms.iter().collect();
        sorted.sort_by_key(|t| t.m.unsigned_abs());
        for t in sorted {
            let am = t.m.unsigned_abs() as usize;
            if am != current_m {
                normalized_assoc_legendre(am, lmax, z, &mut buf);
                current_m = am;
            }
            let plm = buf[t.l - am];
            let ang = if t.m == 0 {
                1.0
            } else if t.m > 0 {
                std::f64::consts::SQRT_2 * (am as f64 * phi).cos()
            } else {
                std::f64::consts::SQRT_2 * (am as f64 * phi).sin()
            };
            value += t.coeff * plm * ang;
        }
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::legendre::real_harmonic;

    #[test]
    fn matches_term_by_term() {
        let e = HarmonicExpansion::new(
            0.1,
            vec![
                HarmonicTerm { l: 3, m: 2, coeff: 0.5 },
                HarmonicTerm { l: 1, m: 0, coeff: -0.2 },
                HarmonicTerm { l: 4, m: -3, coeff: 0.7 },
            ],
        );
        let p = SpherePoint::from_angles(1.0, 2.5);
        let direct = 0.1 + 0.5 * real_harmonic(3, 2, &p) - 0.2 * real_harmonic(1, 0, &p)
            + 0.7 * real_harmonic(4, -3, &p);
        assert!((e.eval(&p) - direct).abs() < 1e-14);
        assert_eq!(e.degree(), 4);
    }
}
