//! JSON experiment configuration.

use crate::error::{io_err, HarnessError, Result};
use needlab::field::{DensitySpec, PointSource};
use needlab::sphere::SpherePoint;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const MIN_REPLICATES: usize = 100;
/// Default ceiling on the estimated number of kernel evaluations in a sweep.
pub const DEFAULT_MAX_COST: f64 = 2e11;
pub const DEFAULT_CALIBRATION_SCALES: [usize; 4] = [2, 3, 4, 5];

/// A point source given by colatitude, longitude and rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub theta: f64,
    pub phi: f64,
    pub rate: f64,
}

impl SourceConfig {
    pub fn to_source(self) -> PointSource {
        PointSource { location: SpherePoint::from_angles(self.theta, self.phi), rate: self.rate }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub dir: PathBuf,
    /// File stem shared by `.csv`, `.json` and `.svg` outputs.
    #[serde(default = "default_stem")]
    pub stem: String,
}

fn default_stem() -> String {
    "results".into()
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), stem: default_stem() }
    }
}

/// Parameters of the thresholding demo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub n: Vec<usize>,
    /// Threshold multiplier `c` in `c·√(log n / n)`.
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "fifty")]
    pub replicates: usize,
    /// Finest reconstructed scale.
    #[serde(default = "four")]
    pub j_max: usize,
}

/// Parameters of the point-source detection demo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceTestConfig {
    pub j: usize,
    pub d: usize,
    #[serde(rename = "R_t")]
    pub r_t: f64,
    #[serde(default = "level")]
    pub level: f64,
    /// Source rates to test; empty means `{0, 5, 20}·√R_t B^{-j}`.
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default = "two_thousand")]
    pub replicates: usize,
    #[serde(default = "gaussian_draws")]
    pub gaussian_draws: usize,
}

fn one() -> f64 {
    1.0
}
fn fifty() -> usize {
    50
}
fn four() -> usize {
    4
}
fn level() -> f64 {
    0.05
}
fn two_thousand() -> usize {
    2000
}
fn gaussian_draws() -> usize {
    100_000
}
fn default_tau() -> u32 {
    3
}
fn uniform() -> DensitySpec {
    DensitySpec::Uniform
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "B")]
    pub base: f64,
    pub j: Vec<usize>,
    #[serde(rename = "R_t")]
    pub r_t: Vec<f64>,
    pub d: Vec<usize>,
    pub replicates: usize,
    pub base_seed: u64,
    #[serde(default = "uniform")]
    pub density: DensitySpec,
    #[serde(default)]
    pub sources: Vec<SourceConfig>,
    #[serde(default = "default_tau")]
    pub tau: u32,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub max_cost: Option<f64>,
    /// Scales on which the unnamed constants of the bounds are fitted.
    #[serde(default)]
    pub calibration_scales: Option<Vec<usize>>,
    #[serde(default)]
    pub threshold: Option<ThresholdConfig>,
    #[serde(default)]
    pub source_test: Option<SourceTestConfig>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::from_json(&text)
    }

    /// Checks everything that does not need a frame; `d ≤ K_j` is checked
    /// once the frame exists.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !(self.base > 1.0) || !self.base.is_finite() {
            return bad(format!("B must exceed 1, got {}", self.base));
        }
        if self.j.is_empty() || self.r_t.is_empty() || self.d.is_empty() {
            return bad("the j, R_t and d lists must be nonempty".into());
        }
        if let Some(r) = self.r_t.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
            return bad(format!("R_t values must be positive, got {r}"));
        }
        if self.d.contains(&0) {
            return bad("d must be at least 1".into());
        }
        if self.replicates < MIN_REPLICATES {
            return bad(format!("replicates must be at least {MIN_REPLICATES}, got {}", self.replicates));
        }
        if self.tau == 0 {
            return bad("tau must be positive".into());
        }
        if self.calibration_scales.as_ref().is_some_and(|s| s.is_empty()) {
            return bad("calibration_scales must be nonempty when given".into());
        }
        if let Some(s) = self.sources.iter().find(|s| !(s.rate >= 0.0) || !s.rate.is_finite()) {
            return bad(format!("source rates must be non-negative, got {}", s.rate));
        }
        if let Some(t) = &self.threshold {
            if t.n.is_empty() || t.n.contains(&0) {
                return bad("threshold.n must be a nonempty list of positive sizes".into());
            }
            if !(t.c >= 0.0) || t.replicates == 0 {
                return bad("threshold.c must be non-negative and replicates positive".into());
            }
        }
        if let Some(s) = &self.source_test {
            if !(s.level > 0.0 && s.level < 1.0) {
                return bad(format!("level must lie in (0, 1), got {}", s.level));
            }
            if s.d == 0 || s.replicates == 0 || s.gaussian_draws == 0 || !(s.r_t > 0.0) {
                return bad("source_test needs positive d, R_t, replicates and gaussian_draws".into());
            }
        }
        Ok(())
    }

    pub fn calibration(&self) -> Vec<usize> {
        self.calibration_scales.clone().unwrap_or_else(|| DEFAULT_CALIBRATION_SCALES.to_vec())
    }

    pub fn sources(&self) -> Vec<PointSource> {
        self.sources.iter().map(|s| s.to_source()).collect()
    }

    /// Configurations in sweep order: `j` outermost, then `R_t`, then `d`.
    pub fn grid(&self) -> Vec<(usize, f64, usize)> {
        let mut out = Vec::new();
        for &j in &self.j {
            for &r in &self.r_t {
                for &d in &self.d {
                    out.push((j, r, d));
                }
            }
        }
        out
    }

    /// Rough number of kernel evaluations: points times coefficients, plus
    /// the dictionary work.
    pub fn estimated_cost(&self) -> f64 {
        let src: f64 = self.sources.iter().map(|s| s.rate).sum();
        self.grid()
            .iter()
            .map(|&(_, r, d)| self.replicates as f64 * ((r + src) * (1.0 + d as f64) + (d * 256) as f64))
            .sum()
    }

    pub fn check_budget(&self) -> Result<()> {
        let ceiling = self.max_cost.unwrap_or(DEFAULT_MAX_COST);
        let estimate = self.estimated_cost();
        if estimate > ceiling {
            return Err(HarnessError::Budget { estimate, ceiling });
        }
        Ok(())
    }
}
