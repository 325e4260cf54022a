#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uncage::guidance::{AttentionMaps, GuidanceConfig, GuidanceMode};
use uncage::sampler::{run_with, RunOptions};
use uncage::{
    build_prompt_spec, gen_scene, ObjectEntry, PromptSpec, RunOutcome, SceneParams, SceneSpec,
    ScheduleConfig, Strategy, StrategyConfig, SynthModel,
};

pub fn scene(seed: u64, params: &SceneParams) -> (SceneSpec, PromptSpec) {
    gen_scene(&mut ChaCha8Rng::seed_from_u64(seed), params).unwrap()
}

/// Light attention (one slice) keeps property runs fast.
pub fn fast_params() -> SceneParams {
    SceneParams {
        blocks: 1,
        heads: 1,
        ..SceneParams::default()
    }
}

pub fn guided(wa: f64, steps: usize) -> GuidanceConfig {
    GuidanceConfig {
        weight: wa,
        guidance_steps: steps,
        ..GuidanceConfig::default()
    }
}

pub fn decode(
    scene: &SceneSpec,
    spec: &PromptSpec,
    steps: usize,
    strat: &StrategyConfig,
    keep_fields: bool,
) -> RunOutcome {
    let model = SynthModel::new(scene.clone(), seed_mix(strat.seed)).unwrap();
    let sched = ScheduleConfig::new(steps, scene.height * scene.width).unwrap();
    run_with(&model, spec, &sched, strat, RunOptions { keep_fields }).unwrap()
}

pub fn seed_mix(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xA5A5
}

pub fn strategy(strategy: Strategy, seed: u64) -> StrategyConfig {
    StrategyConfig::new(strategy, seed)
}

/// Prompt with `attrs[i]` attributes on object `i`.
pub fn prompt(attrs: &[usize]) -> PromptSpec {
    let names: Vec<Vec<String>> = attrs
        .iter()
        .enumerate()
        .map(|(i, &n)| (0..n).map(|j| format!("a{i}_{j}")).collect())
        .collect();
    let entries: Vec<ObjectEntry> = names
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let refs: Vec<&str> = a.iter().map(String::as_str).collect();
            ObjectEntry::new(format!("o{i}"), &refs)
        })
        .collect();
    build_prompt_spec(&entries).unwrap()
}

/// Evaluates every (positive, negative) pair explicitly.
pub fn pair_oracle(maps: &AttentionMaps, spec: &PromptSpec, mode: GuidanceMode) -> Vec<f64> {
    let (h, w) = maps.dims().unwrap();
    (0..h * w)
        .map(|i| {
            let at = |s: &uncage::SubjectId| maps.get(*s).unwrap().as_slice()[i];
            spec.objects
                .iter()
                .map(|o| {
                    let pos = spec.positives(*o).unwrap();
                    let neg = spec.negatives(*o).unwrap();
                    let mut best = f64::INFINITY;
                    for p in pos {
                        if neg.is_empty() {
                            let v = match mode {
                                GuidanceMode::NegativeOnly => 0.0,
                                _ => at(p),
                            };
                            best = best.min(v);
                        }
                        for n in neg {
                            let v = match mode {
                                GuidanceMode::Contrastive => at(p) - at(n),
                                GuidanceMode::PositiveOnly => at(p),
                                GuidanceMode::NegativeOnly => -at(n),
                            };
                            best = best.min(v);
                        }
                    }
                    best
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}
