use needlab::coefficients::{
    coupling_second_moment, covariance_exact, empirical_covariance, select_centers, CoeffModel,
};
use needlab::field::{sample_field, DensitySpec, PoissonFieldSpec, SphereDensity};
use needlab::needlet::NeedletFrame;
use needlab::sphere::HarmonicTerm;

fn frame() -> NeedletFrame {
    NeedletFrame::build(2.0, 4).unwrap()
}

fn tilted() -> SphereDensity {
    let spec = DensitySpec::Bandlimited {
        terms: vec![HarmonicTerm { l: 1, m: 0, coeff: 0.1 }, HarmonicTerm { l: 2, m: 1, coeff: 0.05 }],
    };
    SphereDensity::from_spec(&spec).unwrap()
}

#[test]
fn normalized_coefficients_are_centered_with_unit_variance() {
    let f = frame();
    let density = tilted();
    let sel = select_centers(&f, 2, 3).unwrap();
    let model = CoeffModel::new(&f, &density, sel).unwrap();
    let spec = PoissonFieldSpec::new(density, 3000.0, vec![]).unwrap();
    let m = 3000;
    let rows: Vec<Vec<f64>> =
        (0..m).map(|r| model.beta_tilde(&sample_field(&spec, 1.0, 500 + r).unwrap(), &spec)).collect();
    for c in 0..3 {
        let mean = rows.iter().map(|v| v[c]).sum::<f64>() / m as f64;
        let var = rows.iter().map(|v| (v[c] - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        assert!(mean.abs() < 4.0 / (m as f64).sqrt(), "component {c}: mean {mean}");
        // sd of the sample variance of a near-Gaussian sample is about √(2/m)
        assert!((var - 1.0).abs() < 4.0 * (2.0 / m as f64).sqrt(), "component {c}: variance {var}");
    }
}

#[test]
fn empirical_covariance_matches_the_exact_one() {
    let f = frame();
    let density = tilted();
    let sel = select_centers(&f, 2, 4).unwrap();
    let exact = covariance_exact(&f, &density, &sel).unwrap();
    let model = CoeffModel::new(&f, &density, sel).unwrap();
    let spec = PoissonFieldSpec::new(density, 2000.0, vec![]).unwrap();
    let rows: Vec<Vec<f64>> =
        (0..4000).map(|r| model.beta_tilde(&sample_field(&spec, 1.0, 9000 + r).unwrap(), &spec)).collect();
    let emp = empirical_covariance(&rows).unwrap();
    assert!(emp.max_abs_diff(&exact) < 0.08, "max difference {}", emp.max_abs_diff(&exact));
}

#[test]
fn coupling_moment_matches_closed_form() {
    let f = frame();
    let model = CoeffModel::new(&f, &SphereDensity::uniform(), select_centers(&f, 3, 2).unwrap()).unwrap();
    for n in [1usize, 2, 8, 32] {
        let m = 6000;
        let sq: Vec<f64> = (0..m)
            .map(|r| {
                let (yp, y) = model.coupled_pair(n, (n * 100_000 + r) as u64).unwrap();
                (yp[1] - y[1]).powi(2)
            })
            .collect();
        let mean = sq.iter().sum::<f64>() / m as f64;
        let se = (sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64 / m as f64).sqrt();
        let target = coupling_second_moment(n);
        assert!((mean - target).abs() < 4.0 * se, "n = {n}: {mean} ± {se} vs {target}");
    }
}

#[test]
fn coupling_moment_reference_values() {
    // 2 e^{-n} n^n / n! by direct evaluation
    let direct = |n: u32| 2.0 * (-(n as f64)).exp() * (n as f64).powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    for n in [1, 2, 5, 8, 20] {
        assert!((coupling_second_moment(n as usize) - direct(n)).abs() < 1e-13);
    }
    assert!((coupling_second_moment(2) - 0.541_341_13).abs() < 1e-8);
}
