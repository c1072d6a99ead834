//! Run configuration: a JSON file, overridden field by field by flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use margin_guard::explain::FitConfig;
use margin_guard::pipeline::{CurveConfig, ExplanationMethod, SamplerConfig};
use margin_guard::Metric;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Labelled CSV (`label` column, optional `group` column).
    pub dataset: Option<PathBuf>,
    /// Model JSON `{"w": [...], "b": ...}`. Without it a model is fitted.
    pub weights: Option<PathBuf>,
    pub fit: FitConfig,
    pub explanations: ExplanationMethod,
    pub r_values: Vec<f64>,
    pub grid: Vec<f64>,
    pub sampler: SamplerConfig,
    pub repeats: usize,
    /// Required by every sampling command; there is no clock-based default.
    pub seed: Option<u64>,
    pub positive_flip_only: bool,
    pub per_class: bool,
    pub metrics: Vec<Metric>,
    pub kappa: Option<f64>,
    pub targets: usize,
    /// Scale every row onto the unit sphere before anything else.
    pub normalize: bool,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let curve = CurveConfig::default();
        Self {
            dataset: None,
            weights: None,
            fit: FitConfig::default(),
            explanations: ExplanationMethod::default(),
            r_values: vec![curve.r],
            grid: curve.grid,
            sampler: curve.sampler,
            repeats: curve.repeats,
            seed: None,
            positive_flip_only: curve.positive_flip_only,
            per_class: curve.per_class,
            metrics: Metric::ALL.to_vec(),
            kappa: None,
            targets: 10,
            normalize: false,
            output_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .context("a seed is required (set `seed` in the config or pass --seed)")
    }

    pub fn dataset(&self) -> Result<&Path> {
        self.dataset
            .as_deref()
            .context("a dataset is required (set `dataset` in the config or pass --dataset)")
    }

    /// Checks that referenced files exist and numeric settings are usable.
    pub fn validate(&self) -> Result<()> {
        for p in [&self.dataset, &self.weights].into_iter().flatten() {
            if !p.is_file() {
                bail!("input file {} does not exist", p.display());
            }
        }
        if self.r_values.is_empty() || self.r_values.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            bail!("r values must be positive, got {:?}", self.r_values);
        }
        if self.metrics.is_empty() {
            bail!("at least one metric must be selected");
        }
        if self.repeats == 0 {
            bail!("repeats must be positive");
        }
        if self.sampler.n == 0 {
            bail!("sampler.n must be positive");
        }
        if let Some(k) = self.kappa {
            if !(0.0..=1.0).contains(&k) {
                bail!("kappa must lie in [0, 1], got {k}");
            }
        }
        Ok(())
    }

    pub fn curve_config(&self, r: f64) -> Result<CurveConfig> {
        Ok(CurveConfig {
            grid: self.grid.clone(),
            r,
            positive_flip_only: self.positive_flip_only,
            per_class: self.per_class,
            sampler: self.sampler,
            repeats: self.repeats,
            seed: self.seed()?,
        })
    }
}
