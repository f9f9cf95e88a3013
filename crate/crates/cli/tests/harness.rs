use needlab::field::{DensitySpec, SphereDensity};
use needlab::needlet::NeedletFrame;
use needlab::sphere::{HarmonicTerm, SpherePoint};
use needlab_cli::config::{OutputPaths, SourceTestConfig, ThresholdConfig};
use needlab_cli::report::{read_csv, render_svg, to_csv_string};
use needlab_cli::sweep::{run_sweep_with, ResultRow, ResultTable, SweepContext};
use needlab_cli::{demo_point_source_test, demo_threshold_density, emit_report, ExperimentConfig, HarnessError, ReportFormat};
use std::process::Command;

fn small_config(seed: u64) -> ExperimentConfig {
    let text = format!(
        r#"{{"B": 2.0, "j": [2, 3], "R_t": [300, 3000], "d": [1, 2], "replicates": 120, "base_seed": {seed},
            "calibration_scales": [2, 3]}}"#
    );
    ExperimentConfig::from_json(&text).unwrap()
}

fn row(j: usize, r_t: f64, v: f64) -> ResultRow {
    ResultRow {
        base: 2.0,
        j,
        r_t,
        d: 1,
        replicates: 100,
        seed: 1,
        dw_empirical: v,
        dw_stderr: v / 7.0,
        dw_bound_raw: 3.0 * v,
        dw_bound_closed: 10.0 * v,
        d2_lower: v / 3.0,
        d2_stderr: 1e-3,
        d2_bound_fixed: 0.1,
        d2_bound_growing: 0.2 + v,
        max_offdiag_cov: 0.0,
        cov_bound_max: 0.0,
        eff_sample_size: r_t / 16.0,
    }
}

#[test]
fn config_validation_rejects_bad_input() {
    let base = r#""B": 2.0, "j": [3], "R_t": [1000], "d": [1], "base_seed": 1"#;
    assert!(ExperimentConfig::from_json(&format!("{{{base}, \"replicates\": 100}}")).is_ok());
    for bad in [
        format!("{{{base}, \"replicates\": 99}}"),
        r#"{"B": 2.0, "j": [], "R_t": [1000], "d": [1], "base_seed": 1, "replicates": 100}"#.to_string(),
        format!("{{{base}, \"replicates\": 100, \"unknown_key\": 1}}"),
        format!("{{{base}, \"replicates\": 100, \"density\": {{\"kind\": \"expression\", \"text\": \"1\"}}}}"),
    ] {
        let err = ExperimentConfig::from_json(&bad).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{bad}");
    }
}

#[test]
fn budget_guard_rejects_expensive_sweeps() {
    let text = r#"{"B": 2.0, "j": [3], "R_t": [1e9], "d": [4], "replicates": 100000, "base_seed": 1}"#;
    let cfg = ExperimentConfig::from_json(text).unwrap();
    match cfg.check_budget() {
        Err(HarnessError::Budget { estimate, .. }) => assert!(estimate > 1e14),
        other => panic!("expected a budget error, got {other:?}"),
    }
}

#[test]
fn sweep_rows_are_consistent_and_deterministic() {
    let cfg = small_config(11);
    let ctx = SweepContext::new(&cfg).unwrap();
    let a = run_sweep_with(&cfg, &ctx).unwrap();
    assert_eq!(a.rows.len(), 8);
    for (i, r) in a.rows.iter().enumerate() {
        assert_eq!(r.seed, 11 + (i * 120) as u64);
        for v in [r.dw_bound_raw, r.dw_bound_closed, r.d2_bound_fixed, r.d2_bound_growing, r.cov_bound_max] {
            assert!(v >= 0.0 && v.is_finite());
        }
        assert!((r.eff_sample_size - r.r_t / 4f64.powi(r.j as i32)).abs() < 1e-9);
    }
    let b = run_sweep_with(&cfg, &ctx).unwrap();
    assert_eq!(to_csv_string(&a), to_csv_string(&b));
    let other = run_sweep_with(&small_config(12), &ctx).unwrap();
    assert_ne!(to_csv_string(&a), to_csv_string(&other));
}

#[test]
fn sweep_rejects_d_beyond_the_scale() {
    let text = r#"{"B": 2.0, "j": [0], "R_t": [100], "d": [1000], "replicates": 100, "base_seed": 1,
                   "calibration_scales": [2]}"#;
    let cfg = ExperimentConfig::from_json(text).unwrap();
    let ctx = SweepContext::new(&cfg).unwrap();
    assert!(matches!(run_sweep_with(&cfg, &ctx), Err(HarnessError::Config(_))));
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let table = ResultTable {
        rows: vec![row(2, 1e3, 0.1 + 0.2), row(3, 1234.5678, std::f64::consts::PI / 1e7), row(3, 1e5, 1.0 / 3.0)],
    };
    let dir = tempfile::tempdir().unwrap();
    let paths = OutputPaths { dir: dir.path().to_path_buf(), stem: "t".into() };
    let path = emit_report(&table, ReportFormat::Csv, &paths).unwrap();
    let header = std::fs::read_to_string(&path).unwrap().lines().next().unwrap().to_string();
    assert_eq!(
        header,
        "B,j,R_t,d,replicates,seed,dw_empirical,dw_stderr,dw_bound_raw,dw_bound_closed,d2_lower,d2_stderr,\
         d2_bound_fixed,d2_bound_growing,max_offdiag_cov,cov_bound_max,eff_sample_size"
    );
    assert_eq!(read_csv(&path).unwrap(), table);
    let json: Vec<ResultRow> =
        serde_json::from_str(&std::fs::read_to_string(emit_report(&table, ReportFormat::Json, &paths).unwrap()).unwrap())
            .unwrap();
    assert_eq!(json, table.rows);
}

#[test]
fn empty_table_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let paths = OutputPaths { dir: dir.path().join("sub"), stem: "t".into() };
    for f in [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg] {
        assert!(matches!(emit_report(&ResultTable::default(), f, &paths), Err(HarnessError::EmptyTable)));
    }
    assert!(!paths.dir.exists());
}

#[test]
fn svg_has_one_polyline_per_scale_and_curve() {
    let table = ResultTable {
        rows: vec![row(2, 1e3, 0.1), row(2, 1e4, 0.03), row(3, 1e3, 0.2), row(3, 1e4, 0.07), row(4, 1e4, 0.1)],
    };
    let svg = render_svg(&table);
    assert_eq!(svg.matches("<polyline").count(), 3 * 4);
    for j in 2..=4 {
        for curve in ["dw_empirical", "dw_bound_raw", "d2_lower", "d2_bound_growing"] {
            assert_eq!(svg.matches(&format!(r#"data-j="{j}" data-curve="{curve}""#)).count(), 1);
        }
    }
}

#[test]
fn thresholding_uniform_density_kills_fine_scales() {
    let frame = NeedletFrame::build(2.0, 3).unwrap();
    let params = ThresholdConfig { n: vec![1000, 20_000], c: 1.0, replicates: 6, j_max: 3 };
    let table = demo_threshold_density(&frame, &SphereDensity::uniform(), &params, 3).unwrap();
    assert_eq!(table.rows[1].kept_fraction, 0.0);
    assert!(table.rows[1].mean_risk < table.rows[0].mean_risk);
    assert!(table.rows[1].mean_risk < 1e-3);
}

#[test]
fn infinite_threshold_keeps_only_coarse_scales() {
    let frame = NeedletFrame::build(2.0, 3).unwrap();
    let spec = DensitySpec::Bandlimited { terms: vec![HarmonicTerm { l: 6, m: 2, coeff: 0.05 }] };
    let density = SphereDensity::from_spec(&spec).unwrap();
    let inf = ThresholdConfig { n: vec![50_000], c: f64::INFINITY, replicates: 4, j_max: 3 };
    let keep = ThresholdConfig { c: 0.0, ..inf.clone() };
    let a = demo_threshold_density(&frame, &density, &inf, 9).unwrap();
    let b = demo_threshold_density(&frame, &density, &keep, 9).unwrap();
    assert_eq!(a.rows[0].kept_fraction, 0.0);
    assert_eq!(b.rows[0].kept_fraction, 1.0);
    // dropping the l = 6 term leaves its full energy as bias
    assert!((a.rows[0].mean_risk - 0.05f64.powi(2)).abs() < 5e-4, "{}", a.rows[0].mean_risk);
    assert!(b.rows[0].mean_risk < a.rows[0].mean_risk);
}

#[test]
fn point_source_test_is_calibrated_and_powerful() {
    let frame = NeedletFrame::build(2.0, 3).unwrap();
    let params = SourceTestConfig {
        j: 3,
        d: 4,
        r_t: 20_000.0,
        level: 0.05,
        lambdas: vec![],
        replicates: 2000,
        gaussian_draws: 100_000,
    };
    let src = [SpherePoint::from_angles(1.1, 0.4)];
    let table = demo_point_source_test(&frame, &SphereDensity::uniform(), &src, &params, 21).unwrap();
    assert!((0.03..=0.07).contains(&table.size), "size {}", table.size);
    assert_eq!(table.rows[0].lambda, 0.0);
    assert_eq!(table.rows[0].rejection_rate, table.size);
    for w in table.rows.windows(2) {
        assert!(w[1].rejection_rate + 2.0 * w[1].std_error >= w[0].rejection_rate);
    }
    assert!(table.rows[2].rejection_rate > 0.9);

    let bad = SourceTestConfig { level: 1.5, ..params };
    assert!(demo_point_source_test(&frame, &SphereDensity::uniform(), &src, &bad, 21).is_err());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_needlab");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"B": 2.0, "j": [2], "R_t": [1000], "d": [1], "replicates": 10, "base_seed": 1}"#).unwrap();
    let status = Command::new(bin).args(["sweep", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(2));

    std::fs::write(
        &cfg,
        r#"{"B": 2.0, "j": [2], "R_t": [500], "d": [1], "replicates": 100, "base_seed": 1, "calibration_scales": [2]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = Command::new(bin)
        .args(["sweep", "--format", "csv", "--threads", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(read_csv(&out.join("results.csv")).unwrap().rows.len(), 1);
}
