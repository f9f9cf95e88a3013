//! Legendre polynomials, projection kernels and real spherical harmonics.

use super::SpherePoint;
use crate::error::{Error, Result};
use std::f64::consts::PI;

const DOMAIN_SLACK: f64 = 1e-12;

fn check_domain(u: f64) -> Result<f64> {
    if !u.is_finite() || u.abs() > 1.0 + DOMAIN_SLACK {
        return Err(Error::Domain(format!("Legendre argument {u} outside [-1, 1]")));
    }
    Ok(u.clamp(-1.0, 1.0))
}

/// `P_0(u), ..., P_{l_max}(u)` by the three-term recurrence.
pub fn legendre_all(l_max: usize, u: f64) -> Result<Vec<f64>> {
    let u = check_domain(u)?;
    let mut out = vec![0.0; l_max + 1];
    legendre_fill(u, &mut out);
    Ok(out)
}

/// Fills `out[l] = P_l(u)` for `l < out.len()`. No domain check.
#[inline]
pub fn legendre_fill(u: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = u;
    for l in 1..out.len() - 1 {
        let lf = l as f64;
        out[l + 1] = ((2.0 * lf + 1.0) * u * out[l] - lf * out[l - 1]) / (lf + 1.0);
    }
}

/// Zonal projection kernel `L_l(u) = (2l+1)/(4π) P_l(u)`.
pub fn projection_kernel(l: usize, cos_gamma: f64) -> Result<f64> {
    let p = legendre_all(l, cos_gamma)?;
    Ok((2 * l + 1) as f64 / (4.0 * PI) * p[l])
}

/// Evaluates `Σ_l c_l P_l(u)` together with its derivative in `u`, using the
/// recurrences for `P_l` and `P_l'`.
#[inline]
pub fn legendre_series_with_derivative(coeffs: &[f64], u: f64) -> (f64, f64) {
    if coeffs.is_empty() {
        return (0.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, u);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    let mut value = coeffs[0];
    let mut deriv = 0.0;
    if coeffs.len() > 1 {
        value += coeffs[1] * u;
        deriv += coeffs[1];
    }
    for l in 1..coeffs.len().saturating_sub(1) {
        let lf = l as f64;
        let p_next = ((2.0 * lf + 1.0) * u * p - lf * p_prev) / (lf + 1.0);
        // P'_{l+1} = P'_{l-1} + (2l+1) P_l
        let dp_next = dp_prev + (2.0 * lf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
        value += coeffs[l + 1] * p;
        deriv += coeffs[l + 1] * dp;
    }
    (value, deriv)
}

/// Evaluates `Σ_l c_l P_l(u)` by Clenshaw summation.
#[inline]
pub fn legendre_series(coeffs: &[f64], u: f64) -> f64 {
    let n = coeffs.len();
    if n == 0 {
        return 0.0;
    }
    let (mut b1, mut b2) = (0.0, 0.0);
    for l in (1..n).rev() {
        let lf = l as f64;
        let alpha = (2.0 * lf + 1.0) / (lf + 1.0) * u;
        let beta = (lf + 1.0) / (lf + 2.0);
        let b0 = coeffs[l] + alpha * b1 - beta * b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + u * b1 - 0.5 * b2
}

/// Fully normalized associated Legendre functions for a fixed order `m`:
/// `out[l - m] = P̄_l^m(cos θ)` for `l = m..=l_max`, normalized so that
/// `P̄_l^m(cos θ) e^{imφ}` has unit L² norm on the sphere.
pub fn normalized_assoc_legendre(m: usize, l_max: usize, cos_theta: f64, out: &mut Vec<f64>) {
    out.clear();
    if m > l_max {
        return;
    }
    let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        pmm *= -((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * sin_theta;
    }
    out.push(pmm);
    if m == l_max {
        return;
    }
    let mf = m as f64;
    out.push((2.0 * mf + 3.0).sqrt() * cos_theta * pmm);
    for l in (m + 2)..=l_max {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lp = lf - 1.0;
        let a_prev = ((4.0 * lp * lp - 1.0) / (lp * lp - mf * mf)).sqrt();
        let next = a * (cos_theta * out[l - 1 - m] - out[l - 2 - m] / a_prev);
        out.push(next);
    }
}

/// Real orthonormal spherical harmonic `Y_lm` (m < 0 selects the sine branch).
pub fn real_harmonic(l: usize, m: i64, p: &SpherePoint) -> f64 {
    let am = m.unsigned_abs() as usize;
    assert!(am <= l, "|m| must not exceed l");
    let mut buf = Vec::with_capacity(l + 1);
    normalized_assoc_legendre(am, l, p.z.clamp(-1.0, 1.0), &mut buf);
    let plm = buf[l - am];
    if m == 0 {
        plm
    } else {
        let phi = p.y.atan2(p.x);
        let trig = if m > 0 { (am as f64 * phi).cos() } else { (am as f64 * phi).sin() };
        std::f64::consts::SQRT_2 * plm * trig
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn explicit(l: usize, u: f64) -> f64 {
        match l {
            0 => 1.0,
            1 => u,
            2 => (3.0 * u * u - 1.0) / 2.0,
            3 => (5.0 * u.powi(3) - 3.0 * u) / 2.0,
            4 => (35.0 * u.powi(4) - 30.0 * u * u + 3.0) / 8.0,
            5 => (63.0 * u.powi(5) - 70.0 * u.powi(3) + 15.0 * u) / 8.0,
            6 => (231.0 * u.powi(6) - 315.0 * u.powi(4) + 105.0 * u * u - 5.0) / 16.0,
            _ => unreachable!(),
        }
    }

    #[test]
    fn small_cases() {
        assert_eq!(legendre_all(0, 0.7).unwrap(), vec![1.0]);
        assert_eq!(legendre_all(1, 0.5).unwrap(), vec![1.0, 0.5]);
        let p = legendre_all(5, 0.3).unwrap();
        assert!((p[5] - 0.34538625).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(legendre_all(3, 1.0 + 1e-9).is_err());
        assert!(legendre_all(3, f64::NAN).is_err());
        assert!(legendre_all(3, -1.0 - 1e-13).is_ok());
        assert!(projection_kernel(2, -1.5).is_err());
    }

    #[test]
    fn projection_kernel_values() {
        assert!((projection_kernel(0, 0.31).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((projection_kernel(1, 1.0).unwrap() - 3.0 / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn projection_kernel_matches_harmonic_sum() {
        // addition theorem at a pair with <x, y> = 0.2
        let x = SpherePoint::from_angles(0.7, 0.4);
        let y = x.local_to_global(0.2f64.acos(), 1.9);
        assert!((x.dot(&y) - 0.2).abs() < 1e-14);
        let brute: f64 = (-4i64..=4).map(|m| real_harmonic(4, m, &x) * real_harmonic(4, m, &y)).sum();
        assert!((brute - projection_kernel(4, 0.2).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn series_helpers_agree() {
        let c = [0.3, -1.0, 0.5, 0.25, 2.0, -0.7];
        for &u in &[-1.0, -0.4, 0.0, 0.33, 0.9, 1.0] {
            let p = legendre_all(5, u).unwrap();
            let direct: f64 = c.iter().zip(&p).map(|(a, b)| a * b).sum();
            assert!((legendre_series(&c, u) - direct).abs() < 1e-13);
            let (v, d) = legendre_series_with_derivative(&c, u);
            assert!((v - direct).abs() < 1e-13);
            let h = 1e-6;
            let (ua, ub) = ((u - h).max(-1.0), (u + h).min(1.0));
            let fd = (legendre_series(&c, ub) - legendre_series(&c, ua)) / (ub - ua);
            assert!((d - fd).abs() < 1e-5 * (1.0 + d.abs()));
        }
    }

    proptest! {
        #[test]
        fn recurrence_matches_explicit(u in -1.0f64..=1.0) {
            let p = legendre_all(6, u).unwrap();
            for (l, v) in p.iter().enumerate() {
                prop_assert!((v - explicit(l, u)).abs() < 1e-12);
                prop_assert!(v.abs() <= 1.0 + 1e-14);
            }
        }
    }
}
