use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::guidance::{GuidanceConfig, GuidanceMode};
use crate::metrics::MetricThresholds;
use crate::sampler::{ScoreTerms, Strategy};
use crate::schedule::ScheduleConfig;
use crate::synth::SceneParams;

/// Environment variable overriding `seeds.base`.
pub const SEED_ENV: &str = "UNCAGE_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    pub count: usize,
    #[serde(default)]
    pub base: u64,
}

impl Default for SeedConfig {
    fn default() -> Self {
        Self { count: 1, base: 0 }
    }
}

/// A run matrix. List-valued fields expand as a Cartesian product; the
/// guidance axes (`wa`, `guidance_steps`, `mode`, `blur`) only apply to the
/// `uncage` strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub scene: SceneParams,
    /// Leakage sweep; empty means `scene.lambda` alone.
    pub lambda: Vec<f64>,
    pub steps: usize,
    pub temp_start: f64,
    pub temp_end: f64,
    pub token_temperature: f64,
    pub strategies: Vec<Strategy>,
    pub wa: Vec<f64>,
    pub guidance_steps: Vec<usize>,
    pub mode: Vec<GuidanceMode>,
    pub blur: Vec<bool>,
    pub sigma: f64,
    pub terms: ScoreTerms,
    pub seeds: SeedConfig,
    pub metrics: MetricThresholds,
    pub bootstrap_resamples: usize,
    /// Output directory for CSVs and renderings.
    pub out: Option<PathBuf>,
    /// Write one trace CSV per run.
    pub traces: bool,
    /// Write one SVG rendering per run.
    pub svg: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let guidance = GuidanceConfig::default();
        Self {
            scene: SceneParams::default(),
            lambda: Vec::new(),
            steps: 16,
            temp_start: ScheduleConfig::DEFAULT_TEMP_START,
            temp_end: ScheduleConfig::DEFAULT_TEMP_END,
            token_temperature: 1.0,
            strategies: vec![Strategy::Baseline, Strategy::Uncage],
            wa: vec![guidance.weight],
            guidance_steps: vec![4],
            mode: vec![guidance.mode],
            blur: vec![guidance.blur_enabled],
            sigma: guidance.sigma,
            terms: ScoreTerms::default(),
            seeds: SeedConfig { count: 20, base: 0 },
            metrics: MetricThresholds::default(),
            bootstrap_resamples: 1000,
            out: None,
            traces: false,
            svg: false,
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: BenchConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text)
    }

    /// Applies `UNCAGE_SEED` when set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(raw) = std::env::var(SEED_ENV) {
            self.seeds.base = raw
                .trim()
                .parse()
                .map_err(|_| invalid("seeds.base", format!("{SEED_ENV}={raw} is not a u64")))?;
        }
        Ok(())
    }

    pub fn lambdas(&self) -> Vec<f64> {
        if self.lambda.is_empty() {
            vec![self.scene.overlap]
        } else {
            self.lambda.clone()
        }
    }

    pub fn schedule(&self) -> Result<ScheduleConfig> {
        ScheduleConfig::with_temperatures(
            self.steps,
            self.scene.height * self.scene.width,
            self.temp_start,
            self.temp_end,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() {
            return Err(invalid("strategies", "at least one strategy is required"));
        }
        if self.seeds.count == 0 {
            return Err(invalid("seeds.count", "at least one seed is required"));
        }
        if self.strategies.contains(&Strategy::Uncage) {
            if self.wa.is_empty() {
                return Err(invalid("wa", "empty list"));
            }
            if self.guidance_steps.is_empty() {
                return Err(invalid("guidance_steps", "empty list"));
            }
            if self.mode.is_empty() {
                return Err(invalid("mode", "empty list"));
            }
            if self.blur.is_empty() {
                return Err(invalid("blur", "empty list"));
            }
        }
        if let Some(w) = self.wa.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(invalid("wa", format!("{w} must be a finite value >= 0")));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma", format!("{} must be > 0", self.sigma)));
        }
        if let Some(l) = self.lambdas().iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(invalid("lambda", format!("{l} outside [0, 1]")));
        }
        if !(self.token_temperature >= 0.0) {
            return Err(invalid("token_temperature", "must be >= 0"));
        }
        if self.scene.height == 0 || self.scene.width == 0 {
            return Err(invalid("scene.height", "grid must be non-empty"));
        }
        if self.scene.n_objects == 0 {
            return Err(invalid(
                "scene.n_objects",
                "at least one object is required",
            ));
        }
        if !(self.scene.attn_sigma > 0.0) {
            return Err(invalid("scene.attn_sigma", "must be > 0"));
        }
        if !(self.scene.noise >= 0.0) {
            return Err(invalid("scene.noise", "must be >= 0"));
        }
        if self.scene.blocks == 0 || self.scene.heads == 0 {
            return Err(invalid("scene.blocks", "blocks and heads must be >= 1"));
        }
        let m = &self.metrics;
        for (name, v) in [
            ("metrics.theta_min", m.theta_min),
            ("metrics.theta_mix", m.theta_mix),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(name, format!("{v} outside [0, 1]")));
            }
        }
        if self.bootstrap_resamples == 0 {
            return Err(invalid("bootstrap_resamples", "must be >= 1"));
        }
        self.schedule()
            .map_err(|e| invalid("steps", e.to_string()))?;
        Ok(())
    }

    pub(crate) fn guidance(
        &self,
        wa: f64,
        steps: usize,
        mode: GuidanceMode,
        blur: bool,
    ) -> GuidanceConfig {
        GuidanceConfig {
            weight: wa,
            guidance_steps: steps,
            sigma: self.sigma,
            blur_enabled: blur,
            mode,
        }
    }
}
