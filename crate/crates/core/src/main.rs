use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use uncage::bench::{self, render, BenchConfig, Cell, CellGuidance, SEED_ENV};
use uncage::error::io_err;
use uncage::sampler::{grid_from_trace_rows, read_trace_csv, Strategy};
use uncage::synth::{SceneSpec, TokenMeaning};
use uncage::{GuidanceMode, Result};

#[derive(Parser)]
#[command(
    name = "uncage",
    version,
    about = "Attention-guided unmasking order for masked generative decoders"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark matrix from a JSON config and write runs.csv / summary.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output directory (overrides `out` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replay a fixed scene for every run instead of generating one per seed.
        #[arg(long)]
        scene_file: Option<PathBuf>,
    },
    /// Render a decoded grid from a trace CSV as SVG.
    Render {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode one scene and print the result.
    Demo {
        #[arg(long, default_value = "uncage")]
        strategy: Strategy,
        #[arg(long, default_value_t = 42, env = SEED_ENV)]
        seed: u64,
        #[arg(long, default_value_t = 3.0)]
        wa: f64,
        #[arg(long, default_value_t = 4)]
        guidance_steps: usize,
        #[arg(long, default_value = "contrastive")]
        mode: GuidanceMode,
        #[arg(long)]
        scene_file: Option<PathBuf>,
        /// Write scene.json, trace.csv and grid.svg here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_scene(path: &Path) -> Result<SceneSpec> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    SceneSpec::from_json(&text)
}

fn cmd_run(
    config: &Path,
    jobs: usize,
    out: Option<PathBuf>,
    scene_file: Option<PathBuf>,
) -> Result<bool> {
    let mut cfg = BenchConfig::load(config)?;
    cfg.apply_env()?;
    let scene = scene_file.as_deref().map(load_scene).transpose()?;
    let dir = out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let report = bench::run_to_dir(&cfg, scene.as_ref(), jobs, &dir)?;
    println!(
        "{} cells, {} runs -> {}",
        report.cells.len(),
        report.runs.len(),
        dir.display()
    );
    for s in &report.summaries {
        println!(
            "{:<9} wa={:<4} T_g={:<3} {:<13} blur={:<5} lambda={:.2}  missing={:.3}  leakage={:.3}  mixture={:.3} [{:.3}, {:.3}]",
            s.spec.strategy.name(),
            s.spec.wa(),
            s.spec.guidance_steps(),
            s.spec.mode_name(),
            s.spec.blur(),
            s.spec.lambda,
            s.missing_rate.mean,
            s.leakage.mean,
            s.mixture.mean,
            s.mixture.lo,
            s.mixture.hi,
        );
    }
    for f in &report.failures {
        eprintln!("run {} (seed {}) failed: {}", f.run_id, f.seed, f.message);
    }
    Ok(report.succeeded())
}

fn cmd_render(trace: &Path, scene: &Path, out: &Path) -> Result<()> {
    let scene = load_scene(scene)?;
    let file = std::fs::File::open(trace).map_err(io_err(trace))?;
    let rows = read_trace_csv(file)?;
    let grid = grid_from_trace_rows(&rows, scene.height, scene.width)?;
    render::write_grid_svg(&grid, &scene, out)
}

fn glyph(scene: &SceneSpec, token: u32) -> char {
    const UPPER: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    match scene.meaning(token) {
        TokenMeaning::Background => '.',
        TokenMeaning::Composite { entity, correct } => {
            let c = UPPER[entity % UPPER.len()] as char;
            if correct {
                c
            } else {
                c.to_ascii_lowercase()
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_demo(
    strategy: Strategy,
    seed: u64,
    wa: f64,
    guidance_steps: usize,
    mode: GuidanceMode,
    scene_file: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<()> {
    let cfg = BenchConfig::default();
    let fixed = scene_file.as_deref().map(load_scene).transpose()?;
    let lambda = fixed.as_ref().map_or(cfg.scene.overlap, |s| s.overlap);
    let cell = Cell {
        strategy,
        guidance: (strategy == Strategy::Uncage).then_some(CellGuidance {
            wa,
            steps: guidance_steps,
            mode,
            blur: true,
        }),
        lambda,
    };
    let (scene, outcome, report) = bench::execute_run(&cfg, &cell, seed, fixed.as_ref())?;

    for (i, e) in scene.entities.iter().enumerate() {
        println!(
            "{}: {} {} at ({:.0}, {:.0}) r={:.1}",
            glyph(&scene, scene.correct_token(i)),
            e.attribute_label.as_deref().unwrap_or("-"),
            e.object_label,
            e.center.0,
            e.center.1,
            e.radius
        );
    }
    let truth = scene.ground_truth();
    for row in 0..scene.height {
        let line = |g: &uncage::Grid<u32>| -> String {
            (0..scene.width)
                .map(|c| glyph(&scene, g[uncage::Pos::new(row, c)]))
                .collect()
        };
        println!("{}   {}", line(&outcome.state.tokens), line(&truth));
    }
    println!(
        "{strategy} seed={seed}: missing={:.2} leakage={:.3} mixture={:.2}",
        report.missing_rate, report.attribute_leakage.value, report.object_mixture.value
    );

    if let Some(dir) = out {
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let scene_path = dir.join("scene.json");
        std::fs::write(&scene_path, scene.to_json()?).map_err(io_err(&scene_path))?;
        let trace_path = dir.join("trace.csv");
        let file = std::fs::File::create(&trace_path).map_err(io_err(&trace_path))?;
        outcome.trace.write_csv(std::io::BufWriter::new(file))?;
        render::write_grid_svg(&outcome.state.tokens, &scene, &dir.join("grid.svg"))?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            jobs,
            out,
            scene_file,
        } => cmd_run(&config, jobs, out, scene_file),
        Command::Render { trace, scene, out } => cmd_render(&trace, &scene, &out).map(|_| true),
        Command::Demo {
            strategy,
            seed,
            wa,
            guidance_steps,
            mode,
            scene_file,
            out,
        } => cmd_demo(strategy, seed, wa, guidance_steps, mode, scene_file, out).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
