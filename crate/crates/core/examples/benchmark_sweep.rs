//! Runs a small guidance-weight sweep and writes `runs.csv` and
//! `summary.csv` to the given directory (default `sweep-out`).

use std::path::PathBuf;

use uncage::bench::{run_to_dir, BenchConfig};

fn main() -> uncage::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from("sweep-out"), PathBuf::from);
    let mut cfg = BenchConfig::from_json(
        r#"{
            "strategies": ["baseline", "halton", "uncage"],
            "wa": [0.0, 1.5, 3.0],
            "guidance_steps": [4],
            "seeds": {"count": 40, "base": 1000}
        }"#,
    )?;
    cfg.apply_env()?;

    let report = run_to_dir(&cfg, None, 0, &dir)?;
    for s in &report.summaries {
        println!(
            "{:<9} wa={:<4} missing {:.3}  mixture {:.3} [{:.3}, {:.3}]",
            s.spec.strategy.name(),
            s.spec.wa(),
            s.missing_rate.mean,
            s.mixture.mean,
            s.mixture.lo,
            s.mixture.hi
        );
    }
    println!("wrote {} runs to {}", report.runs.len(), dir.display());
    Ok(())
}
