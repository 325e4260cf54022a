//! Missing-object, attribute-leakage and object-mixture rates of a final
//! token grid against its ground-truth scene.
//!
//! These are threshold proxies for failure modes that are usually judged by
//! eye or by an image-text model; the thresholds are part of every report.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::Grid;
use crate::scoring::TokenId;
use crate::synth::{SceneSpec, TokenMeaning};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricThresholds {
    /// An object is missing below this fraction of its region area.
    pub theta_min: f64,
    /// A region is mixed above this fraction of foreign object cells.
    pub theta_mix: f64,
}

impl Default for MetricThresholds {
    fn default() -> Self {
        Self {
            theta_min: 0.3,
            theta_mix: 0.2,
        }
    }
}

/// A rate with a flag for when it was computed over nothing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub value: f64,
    pub vacuous: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub missing: Vec<bool>,
    pub missing_rate: f64,
    pub attribute_leakage: Rate,
    pub object_mixture: Rate,
    pub thresholds: MetricThresholds,
}

fn object_cells(grid: &Grid<TokenId>, scene: &SceneSpec) -> Vec<(usize, usize)> {
    // (total cells, wrong-attribute cells) per entity, anywhere on the grid.
    let mut counts = vec![(0usize, 0usize); scene.entities.len()];
    for &tok in grid.as_slice() {
        if let TokenMeaning::Composite { entity, correct } = scene.meaning(tok) {
            if let Some(c) = counts.get_mut(entity) {
                c.0 += 1;
                if !correct {
                    c.1 += 1;
                }
            }
        }
    }
    counts
}

/// Object `o` is missing when fewer than `theta_min * area(o)` cells carry any
/// of its composite tokens.
pub fn missing_object(
    grid: &Grid<TokenId>,
    scene: &SceneSpec,
    theta_min: f64,
) -> Result<Vec<bool>> {
    grid.ensure_dims(scene.height, scene.width, "grid")?;
    let counts = object_cells(grid, scene);
    Ok((0..scene.entities.len())
        .map(|e| {
            let area = scene.region(e).len() as f64;
            (counts[e].0 as f64) < theta_min * area
        })
        .collect())
}

/// Mean over objects present of the fraction of their cells carrying a
/// wrong-attribute variant.
pub fn attribute_leakage(grid: &Grid<TokenId>, scene: &SceneSpec) -> Result<Rate> {
    grid.ensure_dims(scene.height, scene.width, "grid")?;
    let fractions: Vec<f64> = object_cells(grid, scene)
        .into_iter()
        .filter(|(total, _)| *total > 0)
        .map(|(total, wrong)| wrong as f64 / total as f64)
        .collect();
    if fractions.is_empty() {
        return Ok(Rate {
            value: 0.0,
            vacuous: true,
        });
    }
    Ok(Rate {
        value: fractions.iter().sum::<f64>() / fractions.len() as f64,
        vacuous: false,
    })
}

/// Fraction of object regions whose non-background cells are more than
/// `theta_mix` another object's tokens.
pub fn object_mixture(grid: &Grid<TokenId>, scene: &SceneSpec, theta_mix: f64) -> Result<Rate> {
    grid.ensure_dims(scene.height, scene.width, "grid")?;
    let regions = scene.entities.len();
    let mut mixed = 0usize;
    let mut any_foreground = false;
    for e in 0..regions {
        let (mut fg, mut foreign) = (0usize, 0usize);
        for p in scene.region(e) {
            if let TokenMeaning::Composite { entity, .. } = scene.meaning(grid[p]) {
                fg += 1;
                if entity != e {
                    foreign += 1;
                }
            }
        }
        if fg > 0 {
            any_foreground = true;
            if foreign as f64 / fg as f64 > theta_mix {
                mixed += 1;
            }
        }
    }
    Ok(Rate {
        value: if regions == 0 {
            0.0
        } else {
            mixed as f64 / regions as f64
        },
        vacuous: !any_foreground,
    })
}

pub fn evaluate(
    grid: &Grid<TokenId>,
    scene: &SceneSpec,
    thresholds: MetricThresholds,
) -> Result<FidelityReport> {
    let missing = missing_object(grid, scene, thresholds.theta_min)?;
    let missing_rate = if missing.is_empty() {
        0.0
    } else {
        missing.iter().filter(|m| **m).count() as f64 / missing.len() as f64
    };
    Ok(FidelityReport {
        missing_rate,
        missing,
        attribute_leakage: attribute_leakage(grid, scene)?,
        object_mixture: object_mixture(grid, scene, thresholds.theta_mix)?,
        thresholds,
    })
}
