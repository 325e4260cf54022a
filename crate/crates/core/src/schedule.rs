//! Cosine unmasking schedule and linear Gumbel temperature annealing.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub total_steps: usize,
    pub total_tokens: usize,
    pub temp_start: f64,
    pub temp_end: f64,
}

impl ScheduleConfig {
    pub const DEFAULT_TEMP_START: f64 = 1.0;
    pub const DEFAULT_TEMP_END: f64 = 0.01;

    /// Schedule with the default 1.0 → 0.01 temperature ramp.
    pub fn new(total_steps: usize, total_tokens: usize) -> Result<Self> {
        Self::with_temperatures(
            total_steps,
            total_tokens,
            Self::DEFAULT_TEMP_START,
            Self::DEFAULT_TEMP_END,
        )
    }

    pub fn with_temperatures(
        total_steps: usize,
        total_tokens: usize,
        temp_start: f64,
        temp_end: f64,
    ) -> Result<Self> {
        let cfg = Self {
            total_steps,
            total_tokens,
            temp_start,
            temp_end,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        if self.total_steps == 0 {
            return Err(contract("total_steps must be at least 1"));
        }
        if self.total_tokens == 0 {
            return Err(contract("total_tokens must be at least 1"));
        }
        if !(self.temp_end > 0.0 && self.temp_start >= self.temp_end) {
            return Err(contract(format!(
                "temperatures must satisfy start >= end > 0, got {} -> {}",
                self.temp_start, self.temp_end
            )));
        }
        Ok(())
    }

    /// Number of positions still masked after step `t` (`t = 0` is the start).
    pub fn masked_after(&self, t: usize) -> usize {
        let (n, steps) = (self.total_tokens, self.total_steps);
        if t == 0 {
            return n;
        }
        if t >= steps {
            return 0;
        }
        let remaining = n as f64 * (FRAC_PI_2 * t as f64 / steps as f64).cos();
        // Nudge values that land on an integer up to rounding error back down
        // before the ceiling.
        let remaining = (remaining - 1e-12 * n as f64).ceil();
        (remaining.max(0.0) as usize).min(n)
    }

    /// Tokens to unmask at each step `1..=T`.
    pub fn unmask_counts(&self) -> Vec<usize> {
        (1..=self.total_steps)
            .map(|t| self.masked_after(t - 1) - self.masked_after(t))
            .collect()
    }

    /// Gumbel temperature at step `t` in `1..=T`.
    pub fn gumbel_temperature(&self, t: usize) -> Result<f64> {
        if t == 0 || t > self.total_steps {
            return Err(contract(format!(
                "step {t} outside 1..={}",
                self.total_steps
            )));
        }
        if self.total_steps == 1 {
            return Ok(self.temp_start);
        }
        let frac = (t - 1) as f64 / (self.total_steps - 1) as f64;
        Ok(self.temp_start + (self.temp_end - self.temp_start) * frac)
    }
}

/// Free-function form of [`ScheduleConfig::unmask_counts`].
pub fn unmask_counts(cfg: &ScheduleConfig) -> Vec<usize> {
    cfg.unmask_counts()
}

/// Free-function form of [`ScheduleConfig::gumbel_temperature`].
pub fn gumbel_temperature(t: usize, cfg: &ScheduleConfig) -> Result<f64> {
    cfg.gumbel_temperature(t)
}
