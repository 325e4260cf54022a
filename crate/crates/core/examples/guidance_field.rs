//! Computes the contrastive guidance field for a generated two-object scene
//! and prints it as a heat map next to the ground truth.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uncage::guidance::{aggregate_attention, guidance_field, GuidanceConfig, GuidanceMode};
use uncage::synth::mock_attention_slices;
use uncage::{gen_scene, SceneParams};

const SHADES: &[u8] = b" .:-=+*#%@";

fn main() -> uncage::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (scene, spec) = gen_scene(&mut rng, &SceneParams::default())?;
    let maps = aggregate_attention(&mock_attention_slices(&scene, &spec)?, 1)?;
    let truth = scene.ground_truth();

    for mode in [
        GuidanceMode::Contrastive,
        GuidanceMode::PositiveOnly,
        GuidanceMode::NegativeOnly,
    ] {
        let cfg = GuidanceConfig {
            mode,
            ..GuidanceConfig::default()
        };
        let field = guidance_field(&maps, &spec, &cfg)?;
        let (lo, hi) = field
            .as_slice()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(*v), b.max(*v))
            });
        println!("{} (range {lo:.3} .. {hi:.3})", mode.name());
        for r in 0..scene.height {
            let heat: String = (0..scene.width)
                .map(|c| {
                    let v = field[uncage::Pos::new(r, c)];
                    let u = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
                    SHADES[((u * (SHADES.len() - 1) as f64).round()) as usize] as char
                })
                .collect();
            let gt: String = (0..scene.width)
                .map(|c| char::from(b'0' + truth[uncage::Pos::new(r, c)] as u8))
                .collect();
            println!("  {heat}   {gt}");
        }
    }
    Ok(())
}
