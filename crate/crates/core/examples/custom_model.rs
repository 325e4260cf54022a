//! Plugs a hand-written model into the sampler through `MaskedModel`.
//!
//! The toy model prefers token 1 on the left half and token 2 on the right,
//! and its attention for each object covers the matching half.

use uncage::guidance::GuidanceConfig;
use uncage::sampler::{MaskedModel, ModelOutput};
use uncage::scoring::Logits;
use uncage::{
    build_prompt_spec, run, Grid, GridState, ObjectEntry, Pos, PromptSpec, ScheduleConfig,
    StrategyConfig,
};

struct Halves {
    height: usize,
    width: usize,
}

impl MaskedModel for Halves {
    fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn query(
        &self,
        _spec: &PromptSpec,
        _state: &GridState,
        _t: usize,
    ) -> uncage::Result<ModelOutput> {
        let mut logits = Logits::zeros(self.height, self.width, 3);
        for r in 0..self.height {
            for c in 0..self.width {
                let left = c < self.width / 2;
                logits.at_mut(Pos::new(r, c))[if left { 1 } else { 2 }] = 4.0;
            }
        }
        let half = |left: bool| {
            Grid::from_fn(self.height, self.width, |p| {
                f64::from(u8::from((p.col < self.width / 2) == left))
            })
        };
        Ok(ModelOutput {
            logits,
            attention: vec![vec![half(true), half(false)]],
        })
    }
}

fn main() -> uncage::Result<()> {
    let spec = build_prompt_spec(&[ObjectEntry::new("sun", &[]), ObjectEntry::new("moon", &[])])?;
    let model = Halves {
        height: 6,
        width: 12,
    };
    let sched = ScheduleConfig::new(6, 72)?;
    let outcome = run(
        &model,
        &spec,
        &sched,
        &StrategyConfig::uncage(GuidanceConfig::default(), 1),
    )?;

    for step in &outcome.trace.steps {
        let cells: Vec<String> = step
            .events
            .iter()
            .map(|e| format!("({},{})", e.pos.row, e.pos.col))
            .collect();
        println!("t={} unmasked {}", step.step, cells.join(" "));
    }
    Ok(())
}
