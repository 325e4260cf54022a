//! SVG rendering of decoded token grids.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{io_err, Error, Result};
use crate::grid::Grid;
use crate::scoring::TokenId;
use crate::synth::{SceneSpec, TokenMeaning};

const CELL: usize = 16;
const BACKGROUND_FILL: &str = "#d9d9d9";

/// HSL fill for a token: one hue per entity, a pale shade when the entity
/// carries the wrong attribute.
pub fn cell_fill(scene: &SceneSpec, token: TokenId) -> String {
    match scene.meaning(token) {
        TokenMeaning::Background => BACKGROUND_FILL.to_string(),
        TokenMeaning::Composite { entity, correct } => {
            let n = scene.entities.len().max(1);
            let hue = (entity * 360 / n + 10) % 360;
            if correct {
                format!("hsl({hue},70%,45%)")
            } else {
                format!("hsl({hue},45%,80%)")
            }
        }
    }
}

pub fn render_grid_svg(grid: &Grid<TokenId>, scene: &SceneSpec) -> Result<String> {
    grid.ensure_dims(scene.height, scene.width, "rendered grid")?;
    let vocab = scene.vocab_size() as TokenId;
    if let Some(bad) = grid.as_slice().iter().find(|t| **t >= vocab) {
        return Err(Error::Contract(format!(
            "token {bad} outside vocabulary of {vocab}"
        )));
    }
    let (w, h) = (scene.width * CELL, scene.height * CELL);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    for (pos, token) in grid.positions().zip(grid.as_slice()) {
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{}"/>"#,
            pos.col * CELL,
            pos.row * CELL,
            cell_fill(scene, *token)
        );
    }
    for (i, ent) in scene.entities.iter().enumerate() {
        let half = CELL as f64 / 2.0;
        let label = match &ent.attribute_label {
            Some(a) => format!("{a} {}", ent.object_label),
            None => ent.object_label.clone(),
        };
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="black" stroke-width="1.5" stroke-dasharray="4 2"><title>{} ({label})</title></circle>"#,
            ent.center.1 * CELL as f64 + half,
            ent.center.0 * CELL as f64 + half,
            (ent.radius + 0.5) * CELL as f64,
            i
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_grid_svg(grid: &Grid<TokenId>, scene: &SceneSpec, path: &Path) -> Result<()> {
    let svg = render_grid_svg(grid, scene)?;
    std::fs::write(path, svg).map_err(io_err(path))
}
