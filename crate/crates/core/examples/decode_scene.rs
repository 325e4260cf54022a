//! Decodes one synthetic scene with every ordering strategy and reports the
//! failure-mode metrics of each result.
//!
//! ```text
//! cargo run --example decode_scene -- 42
//! ```

use uncage::bench::{execute_run, BenchConfig, Cell, CellGuidance};
use uncage::synth::TokenMeaning;
use uncage::{GuidanceMode, Pos, Strategy};

fn main() -> uncage::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(42, |s| s.parse().expect("seed"));
    let cfg = BenchConfig::default();

    for strategy in Strategy::ALL {
        let cell = Cell {
            strategy,
            guidance: (strategy == Strategy::Uncage).then_some(CellGuidance {
                wa: 3.0,
                steps: 4,
                mode: GuidanceMode::Contrastive,
                blur: true,
            }),
            lambda: cfg.scene.overlap,
        };
        let (scene, outcome, report) = execute_run(&cfg, &cell, seed, None)?;
        println!(
            "{strategy}: missing {:.2}  leakage {:.3}  mixture {:.2}",
            report.missing_rate, report.attribute_leakage.value, report.object_mixture.value
        );
        for r in 0..scene.height {
            let line: String = (0..scene.width)
                .map(
                    |c| match scene.meaning(outcome.state.tokens[Pos::new(r, c)]) {
                        TokenMeaning::Background => '.',
                        TokenMeaning::Composite {
                            entity,
                            correct: true,
                        } => char::from(b'A' + entity as u8),
                        TokenMeaning::Composite {
                            entity,
                            correct: false,
                        } => char::from(b'a' + entity as u8),
                    },
                )
                .collect();
            println!("  {line}");
        }
    }
    Ok(())
}
