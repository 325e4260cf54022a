//! Masked generative parallel decoding with contrastive-attention-guided
//! unmasking order.
//!
//! The crate contains the decoding loop ([`sampler`]), the unmasking-order
//! strategies it dispatches to ([`scoring`], [`guidance`], [`halton`]), the
//! cosine schedule ([`schedule`]), a procedural mock model with ground truth
//! ([`synth`]), failure-mode metrics ([`metrics`]) and the benchmark harness
//! behind the `uncage` binary ([`bench`]).

pub mod bench;
pub mod error;
pub mod grid;
pub mod guidance;
pub mod halton;
pub mod metrics;
pub mod prompt;
pub mod sampler;
pub mod schedule;
pub mod scoring;
pub mod synth;

pub use error::{Error, Result};
pub use grid::{Grid, Pos};
pub use guidance::{GuidanceConfig, GuidanceMode};
pub use prompt::{build_prompt_spec, ObjectEntry, PromptSpec, SubjectId};
pub use sampler::{run, MaskedModel, RunOutcome, RunTrace, Strategy, StrategyConfig};
pub use schedule::ScheduleConfig;
pub use scoring::{GridState, ScoreField, TokenId};
pub use synth::{gen_scene, SceneParams, SceneSpec, SynthModel};
