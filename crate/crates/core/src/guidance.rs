//! Contrastive attention guidance.
//!
//! Per-subject attention maps are averaged over every (block, head) slice,
//! min-max rescaled, optionally smoothed with a Gaussian, and reduced to a
//! single score field: for each position, the best object's margin between
//! its weakest positive-pair attention and its strongest negative-pair
//! attention.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::grid::Grid;
use crate::prompt::{PromptSpec, SubjectId};
use crate::scoring::ScoreField;

/// One H×W map per subject, indexed by subject id.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionMaps {
    pub step: usize,
    pub maps: Vec<Grid<f64>>,
}

impl AttentionMaps {
    pub fn get(&self, subject: SubjectId) -> Option<&Grid<f64>> {
        self.maps.get(subject.0)
    }

    pub fn dims(&self) -> Option<(usize, usize)> {
        self.maps.first().map(Grid::dims)
    }
}

/// Raw attention from one (block, head) slice: one map per subject.
pub type AttentionSlice = Vec<Grid<f64>>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuidanceMode {
    #[default]
    Contrastive,
    PositiveOnly,
    NegativeOnly,
}

impl GuidanceMode {
    pub fn name(self) -> &'static str {
        match self {
            GuidanceMode::Contrastive => "contrastive",
            GuidanceMode::PositiveOnly => "positive_only",
            GuidanceMode::NegativeOnly => "negative_only",
        }
    }
}

impl std::str::FromStr for GuidanceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "contrastive" => Ok(Self::Contrastive),
            "positive_only" | "positive" => Ok(Self::PositiveOnly),
            "negative_only" | "negative" => Ok(Self::NegativeOnly),
            other => Err(format!("unknown guidance mode `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GuidanceConfig {
    #[serde(rename = "wa")]
    pub weight: f64,
    pub guidance_steps: usize,
    pub sigma: f64,
    #[serde(rename = "blur")]
    pub blur_enabled: bool,
    pub mode: GuidanceMode,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self {
            weight: 3.0,
            guidance_steps: 16,
            sigma: 2.0,
            blur_enabled: true,
            mode: GuidanceMode::Contrastive,
        }
    }
}

impl GuidanceConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return Err(contract(format!(
                "guidance weight {} must be >= 0",
                self.weight
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(contract(format!("blur sigma {} must be > 0", self.sigma)));
        }
        Ok(())
    }

    /// Whether guidance contributes to the score at step `t`.
    pub fn active_at(&self, t: usize) -> bool {
        self.weight != 0.0 && t <= self.guidance_steps
    }
}

/// Elementwise mean over all slices, then per-subject min-max rescale.
/// Constant maps rescale to all zeros.
pub fn aggregate_attention(raw: &[AttentionSlice], step: usize) -> Result<AttentionMaps> {
    let first = raw
        .first()
        .ok_or_else(|| contract("no attention slices to aggregate"))?;
    let subjects = first.len();
    let (h, w) = first
        .first()
        .map(Grid::dims)
        .ok_or_else(|| contract("attention slice holds no subject maps"))?;
    for (i, slice) in raw.iter().enumerate() {
        if slice.len() != subjects {
            return Err(contract(format!(
                "slice {i} has {} subject maps, expected {subjects}",
                slice.len()
            )));
        }
        for map in slice {
            map.ensure_dims(h, w, "attention map")?;
        }
    }

    let scale = 1.0 / raw.len() as f64;
    let maps = (0..subjects)
        .map(|s| {
            let mut acc = vec![0.0; h * w];
            for slice in raw {
                for (a, v) in acc.iter_mut().zip(slice[s].as_slice()) {
                    *a += v;
                }
            }
            acc.iter_mut().for_each(|a| *a *= scale);
            rescale_unit(&mut acc);
            Grid::from_vec(h, w, acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AttentionMaps { step, maps })
}

/// In-place min-max rescale to `[0, 1]`; constant input becomes zeros.
pub fn rescale_unit(values: &mut [f64]) {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        });
    let range = hi - lo;
    if range > 0.0 && range.is_finite() {
        values.iter_mut().for_each(|v| *v = (*v - lo) / range);
    } else {
        values.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Normalized 1D Gaussian taps, half-width `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(contract(format!("blur sigma {sigma} must be > 0")));
    }
    let half = (3.0 * sigma).ceil() as isize;
    let denom = 2.0 * sigma * sigma;
    let mut taps: Vec<f64> = (-half..=half)
        .map(|x| (-((x * x) as f64) / denom).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    Ok(taps)
}

/// Separable Gaussian blur with replicate (clamp-to-edge) padding.
pub fn gaussian_blur(map: &Grid<f64>, sigma: f64) -> Result<Grid<f64>> {
    let kernel = gaussian_kernel(sigma)?;
    let (h, w) = map.dims();
    if h == 0 || w == 0 {
        return Err(contract("cannot blur an empty map"));
    }
    let half = (kernel.len() / 2) as isize;
    let src = map.as_slice();

    let mut tmp = vec![0.0; h * w];
    for r in 0..h {
        let row = &src[r * w..(r + 1) * w];
        for c in 0..w {
            let mut acc = 0.0;
            for (k, tap) in kernel.iter().enumerate() {
                let cc = (c as isize + k as isize - half).clamp(0, w as isize - 1) as usize;
                acc += tap * row[cc];
            }
            tmp[r * w + c] = acc;
        }
    }

    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for (k, tap) in kernel.iter().enumerate() {
            let rr = (r as isize + k as isize - half).clamp(0, h as isize - 1) as usize;
            let src_row = &tmp[rr * w..(rr + 1) * w];
            let dst_row = &mut out[r * w..(r + 1) * w];
            for (d, s) in dst_row.iter_mut().zip(src_row) {
                *d += tap * s;
            }
        }
    }
    Grid::from_vec(h, w, out)
}

/// Blurs every subject map with the same sigma.
pub fn blur_maps(maps: &AttentionMaps, sigma: f64) -> Result<AttentionMaps> {
    Ok(AttentionMaps {
        step: maps.step,
        maps: maps
            .maps
            .iter()
            .map(|m| gaussian_blur(m, sigma))
            .collect::<Result<_>>()?,
    })
}

/// `F_a`: per position, the maximum over objects of
/// `min(positive-pair attention) - max(negative-pair attention)`.
///
/// An empty negative set contributes a maximum of 0.
pub fn contrastive_scores(
    maps: &AttentionMaps,
    spec: &PromptSpec,
    mode: GuidanceMode,
) -> Result<ScoreField> {
    let (h, w) = maps
        .dims()
        .ok_or_else(|| contract("attention maps are empty"))?;
    if spec.objects.is_empty() {
        return Err(contract("prompt has no objects"));
    }
    let lookup = |id: SubjectId| -> Result<&[f64]> {
        let map = maps
            .get(id)
            .ok_or_else(|| contract(format!("no attention map for subject {id}")))?;
        map.ensure_dims(h, w, "attention map")?;
        Ok(map.as_slice())
    };

    let mut out = vec![f64::NEG_INFINITY; h * w];
    let mut pos_min = vec![0.0; h * w];
    let mut neg_max = vec![0.0; h * w];
    for &o in &spec.objects {
        let positives = spec
            .positives(o)
            .ok_or_else(|| contract(format!("object {o} has no positive set")))?;
        let negatives = spec
            .negatives(o)
            .ok_or_else(|| contract(format!("object {o} has no negative set")))?;

        pos_min.fill(f64::INFINITY);
        for &p in positives {
            for (m, v) in pos_min.iter_mut().zip(lookup(p)?) {
                *m = m.min(*v);
            }
        }
        neg_max.fill(f64::NEG_INFINITY);
        for &n in negatives {
            for (m, v) in neg_max.iter_mut().zip(lookup(n)?) {
                *m = m.max(*v);
            }
        }
        if negatives.is_empty() {
            neg_max.fill(0.0);
        }

        for ((o, p), n) in out.iter_mut().zip(&pos_min).zip(&neg_max) {
            let score = match mode {
                GuidanceMode::Contrastive => p - n,
                GuidanceMode::PositiveOnly => *p,
                GuidanceMode::NegativeOnly => -n,
            };
            *o = o.max(score);
        }
    }
    Grid::from_vec(h, w, out)
}

/// Blur (when enabled) followed by the contrastive reduction.
pub fn guidance_field(
    maps: &AttentionMaps,
    spec: &PromptSpec,
    cfg: &GuidanceConfig,
) -> Result<ScoreField> {
    if cfg.blur_enabled {
        contrastive_scores(&blur_maps(maps, cfg.sigma)?, spec, cfg.mode)
    } else {
        contrastive_scores(maps, spec, cfg.mode)
    }
}
