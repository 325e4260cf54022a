//! Decodes a scene, writes its trace, then rebuilds the grid from the trace
//! and renders it as SVG.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uncage::bench::render::write_grid_svg;
use uncage::guidance::GuidanceConfig;
use uncage::sampler::{grid_from_trace_rows, read_trace_csv};
use uncage::{gen_scene, run, SceneParams, ScheduleConfig, StrategyConfig, SynthModel};

fn main() -> uncage::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "scene.svg".into());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (scene, spec) = gen_scene(&mut rng, &SceneParams::default())?;
    let model = SynthModel::new(scene.clone(), 9)?;
    let sched = ScheduleConfig::new(16, scene.height * scene.width)?;
    let guidance = GuidanceConfig {
        guidance_steps: 4,
        ..GuidanceConfig::default()
    };
    let outcome = run(&model, &spec, &sched, &StrategyConfig::uncage(guidance, 9))?;

    let mut csv = Vec::new();
    outcome.trace.write_csv(&mut csv)?;
    let rows = read_trace_csv(csv.as_slice())?;
    let grid = grid_from_trace_rows(&rows, scene.height, scene.width)?;
    assert_eq!(grid, outcome.state.tokens);

    write_grid_svg(&grid, &scene, out.as_ref())?;
    println!("{} trace rows, wrote {out}", rows.len());
    Ok(())
}
