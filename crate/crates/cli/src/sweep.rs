//! Replicated simulations over a grid of `(j, R_t, d)` configurations.

use crate::config::ExperimentConfig;
use crate::error::{Context, HarnessError, Result};
use needlab::bounds::{bound_report, calibrate_kappa, FittedConstants};
use needlab::coefficients::{covariance_exact, select_centers, CoeffModel, CovMatrix};
use needlab::distance::{empirical_d2_lower, empirical_wasserstein_1d, TestFunctionDictionary, BOOTSTRAP_SEED};
use needlab::field::{sample_field, PoissonFieldSpec, SphereDensity};
use needlab::needlet::NeedletFrame;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One configuration of a sweep; field names are the output columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    #[serde(rename = "B")]
    pub base: f64,
    pub j: usize,
    #[serde(rename = "R_t")]
    pub r_t: f64,
    pub d: usize,
    pub replicates: usize,
    /// First seed of the configuration's range.
    pub seed: u64,
    pub dw_empirical: f64,
    pub dw_stderr: f64,
    pub dw_bound_raw: f64,
    pub dw_bound_closed: f64,
    pub d2_lower: f64,
    pub d2_stderr: f64,
    pub d2_bound_fixed: f64,
    pub d2_bound_growing: f64,
    pub max_offdiag_cov: f64,
    pub cov_bound_max: f64,
    pub eff_sample_size: f64,
}

pub const COLUMNS: [&str; 17] = [
    "B",
    "j",
    "R_t",
    "d",
    "replicates",
    "seed",
    "dw_empirical",
    "dw_stderr",
    "dw_bound_raw",
    "dw_bound_closed",
    "d2_lower",
    "d2_stderr",
    "d2_bound_fixed",
    "d2_bound_growing",
    "max_offdiag_cov",
    "cov_bound_max",
    "eff_sample_size",
];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Frame, density and fitted constants shared by every configuration.
#[derive(Debug, Clone)]
pub struct SweepContext {
    pub frame: NeedletFrame,
    pub density: SphereDensity,
    pub constants: FittedConstants,
    pub kappa: f64,
}

impl SweepContext {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let scales = cfg.calibration();
        let top = cfg.j.iter().chain(&scales).copied().max().unwrap_or(1).max(1);
        let frame = NeedletFrame::build(cfg.base, top).context(|| format!("building the frame up to j = {top}"))?;
        let density = SphereDensity::from_spec(&cfg.density).context(|| "density".into())?;
        let constants = FittedConstants::calibrate(&frame, cfg.tau, &scales)
            .context(|| format!("fitting constants on scales {scales:?}"))?;
        let kappa = calibrate_kappa(&frame, &density, &constants, &scales).context(|| "fitting kappa".into())?;
        Ok(Self { frame, density, constants, kappa })
    }
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.check_budget()?;
    let ctx = SweepContext::new(cfg)?;
    run_sweep_with(cfg, &ctx)
}

/// Runs every configuration; configuration `i` owns seeds
/// `base_seed + i·replicates ..`.
pub fn run_sweep_with(cfg: &ExperimentConfig, ctx: &SweepContext) -> Result<ResultTable> {
    cfg.validate()?;
    cfg.check_budget()?;
    if ctx.constants.tau != cfg.tau {
        return Err(HarnessError::Config(format!(
            "context was fitted with tau = {}, config asks for {}",
            ctx.constants.tau, cfg.tau
        )));
    }
    let grid = cfg.grid();
    for &(j, _, d) in &grid {
        let count = ctx.frame.scale(j).context(|| format!("scale {j}"))?.count();
        if d > count {
            return Err(HarnessError::Config(format!("d = {d} exceeds the {count} centers at scale {j}")));
        }
    }
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(j, r_t, d))| {
            let seed = cfg.base_seed.wrapping_add((i * cfg.replicates) as u64);
            run_configuration(cfg, ctx, j, r_t, d, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResultTable { rows })
}

fn run_configuration(
    cfg: &ExperimentConfig,
    ctx: &SweepContext,
    j: usize,
    r_t: f64,
    d: usize,
    seed: u64,
) -> Result<ResultRow> {
    let label = move || format!("configuration j = {j}, R_t = {r_t}, d = {d}");
    let frame = &ctx.frame;
    let sel = select_centers(frame, j, d).context(label)?;
    let model = CoeffModel::new(frame, &ctx.density, sel.clone()).context(label)?;
    let spec = PoissonFieldSpec::new(ctx.density.clone(), r_t, cfg.sources()).context(label)?;
    let samples = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let real = sample_field(&spec, 1.0, seed.wrapping_add(r as u64))?;
            Ok(model.beta_tilde(&real, &spec))
        })
        .collect::<needlab::Result<Vec<Vec<f64>>>>()
        .context(label)?;

    // worst component, matching the worst-case one-dimensional bound
    let boot_seed = seed ^ BOOTSTRAP_SEED;
    let (mut dw, mut dw_se) = (0.0f64, 0.0);
    for c in 0..d {
        let col: Vec<f64> = samples.iter().map(|s| s[c]).collect();
        let est = empirical_wasserstein_1d(&col, boot_seed).context(label)?;
        if est.value > dw {
            (dw, dw_se) = (est.value, est.std_error);
        }
    }
    let dict = TestFunctionDictionary::standard(d);
    let (d2, _) = empirical_d2_lower(&samples, &CovMatrix::identity(d), &dict, boot_seed).context(label)?;
    let gamma = covariance_exact(frame, &ctx.density, &sel).context(label)?;
    let report = bound_report(frame, &ctx.density, &sel, r_t, &ctx.constants, ctx.kappa).context(label)?;
    Ok(ResultRow {
        base: cfg.base,
        j,
        r_t,
        d,
        replicates: cfg.replicates,
        seed,
        dw_empirical: dw,
        dw_stderr: dw_se,
        dw_bound_raw: report.dw_bound_raw,
        dw_bound_closed: report.dw_bound_closed,
        d2_lower: d2.value,
        d2_stderr: d2.std_error,
        d2_bound_fixed: report.d2_bound_fixed,
        d2_bound_growing: report.d2_bound_growing,
        max_offdiag_cov: gamma.max_offdiag(),
        cov_bound_max: report.cov_bound_max,
        eff_sample_size: report.effective_sample_size,
    })
}

/// Bound reports for every configuration, without simulation.
pub fn bound_reports(cfg: &ExperimentConfig, ctx: &SweepContext) -> Result<Vec<needlab::bounds::BoundReport>> {
    cfg.grid()
        .into_iter()
        .map(|(j, r_t, d)| {
            let label = move || format!("configuration j = {j}, R_t = {r_t}, d = {d}");
            let sel = select_centers(&ctx.frame, j, d).context(label)?;
            bound_report(&ctx.frame, &ctx.density, &sel, r_t, &ctx.constants, ctx.kappa).context(label)
        })
        .collect()
}
