//! Run matrices over strategies, guidance settings and seeds.
//!
//! Every run draws its scene, model noise and sampler streams from its seed
//! alone, so two cells sharing a seed decode the same scene and the output is
//! deterministic regardless of how many worker threads execute it.

pub mod config;
pub mod render;

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{io_err, Error, Result};
use crate::guidance::GuidanceMode;
use crate::metrics::{evaluate, FidelityReport};
use crate::sampler::{run_with, RunOptions, RunOutcome, Strategy, StrategyConfig};
use crate::synth::{gen_scene, SceneSpec, SynthModel};

pub use config::{BenchConfig, SeedConfig, SEED_ENV};

/// Stream of the run seed used for scene placement.
const SCENE_STREAM: u64 = 10;

/// Header of the per-run CSV. Column order is part of the output format.
pub const RUN_CSV_HEADER: &str =
    "run_id,seed,strategy,wa,guidance_steps,mode,blur,lambda,missing_rate,leakage,mixture,steps,grid";

/// One cell of the run matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub strategy: Strategy,
    /// `None` for strategies without attention guidance.
    pub guidance: Option<CellGuidance>,
    pub lambda: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellGuidance {
    pub wa: f64,
    pub steps: usize,
    pub mode: GuidanceMode,
    pub blur: bool,
}

impl Cell {
    pub fn wa(&self) -> f64 {
        self.guidance.map_or(0.0, |g| g.wa)
    }

    pub fn guidance_steps(&self) -> usize {
        self.guidance.map_or(0, |g| g.steps)
    }

    pub fn mode_name(&self) -> &'static str {
        self.guidance.map_or("none", |g| g.mode.name())
    }

    pub fn blur(&self) -> bool {
        self.guidance.is_some_and(|g| g.blur)
    }
}

#[derive(Clone, Debug)]
pub struct RunSpec {
    pub run_id: usize,
    pub cell: usize,
    pub seed: u64,
}

/// Expands the config into its cells, in output order.
pub fn expand_cells(cfg: &BenchConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &strategy in &cfg.strategies {
        for &lambda in &cfg.lambdas() {
            if strategy == Strategy::Uncage {
                for &wa in &cfg.wa {
                    for &steps in &cfg.guidance_steps {
                        for &mode in &cfg.mode {
                            for &blur in &cfg.blur {
                                cells.push(Cell {
                                    strategy,
                                    guidance: Some(CellGuidance {
                                        wa,
                                        steps,
                                        mode,
                                        blur,
                                    }),
                                    lambda,
                                });
                            }
                        }
                    }
                }
            } else {
                cells.push(Cell {
                    strategy,
                    guidance: None,
                    lambda,
                });
            }
        }
    }
    cells
}

pub fn expand_runs(cfg: &BenchConfig, cells: &[Cell]) -> Vec<RunSpec> {
    let mut runs = Vec::with_capacity(cells.len() * cfg.seeds.count);
    for cell in 0..cells.len() {
        for i in 0..cfg.seeds.count {
            runs.push(RunSpec {
                run_id: runs.len(),
                cell,
                seed: cfg.seeds.base.wrapping_add(i as u64),
            });
        }
    }
    runs
}

/// Model noise seed derived from the run seed (SplitMix64 finalizer).
pub fn model_seed(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Scene for a run: the fixed scene when given, else generated from the seed.
pub fn scene_for(
    cfg: &BenchConfig,
    fixed: Option<&SceneSpec>,
    seed: u64,
    lambda: f64,
) -> Result<SceneSpec> {
    let mut scene = match fixed {
        Some(s) => s.clone(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(SCENE_STREAM);
            gen_scene(&mut rng, &cfg.scene)?.0
        }
    };
    scene.overlap = lambda;
    Ok(scene)
}

pub fn strategy_config(cfg: &BenchConfig, cell: &Cell, seed: u64) -> StrategyConfig {
    let mut strat =
        StrategyConfig::new(cell.strategy, seed).with_token_temperature(cfg.token_temperature);
    if let Some(g) = cell.guidance {
        strat.guidance = cfg.guidance(g.wa, g.steps, g.mode, g.blur);
        strat.terms = cfg.terms;
    }
    strat
}

/// Decodes one run and scores it.
pub fn execute_run(
    cfg: &BenchConfig,
    cell: &Cell,
    seed: u64,
    fixed: Option<&SceneSpec>,
) -> Result<(SceneSpec, RunOutcome, FidelityReport)> {
    let scene = scene_for(cfg, fixed, seed, cell.lambda)?;
    let prompt = scene.prompt()?;
    let model = SynthModel::new(scene, model_seed(seed))?;
    let sched = cfg.schedule()?;
    let strat = strategy_config(cfg, cell, seed);
    let outcome = run_with(&model, &prompt, &sched, &strat, RunOptions::default())?;
    let report = evaluate(&outcome.state.tokens, &model.scene, cfg.metrics)?;
    Ok((model.scene, outcome, report))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub seed: u64,
    pub strategy: Strategy,
    pub wa: f64,
    pub guidance_steps: usize,
    pub mode: &'static str,
    pub blur: bool,
    pub lambda: f64,
    pub missing_rate: f64,
    pub leakage: f64,
    pub mixture: f64,
    pub steps: usize,
    pub grid: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub cell: usize,
    pub spec: Cell,
    pub runs: usize,
    pub missing_rate: Interval,
    pub leakage: Interval,
    pub mixture: Interval,
}

#[derive(Clone, Debug)]
pub struct RunFailure {
    pub run_id: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub cells: Vec<Cell>,
    pub runs: Vec<RunRecord>,
    pub summaries: Vec<CellSummary>,
    pub failures: Vec<RunFailure>,
}

impl BenchReport {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary_for(&self, pred: impl Fn(&Cell) -> bool) -> Option<&CellSummary> {
        self.summaries.iter().find(|s| pred(&s.spec))
    }
}

/// Percentile bootstrap of the mean for each metric column, sharing
/// resample indices across columns.
pub fn bootstrap_means(columns: &[&[f64]], resamples: usize, seed: u64) -> Vec<Interval> {
    let n = columns.first().map_or(0, |c| c.len());
    if n == 0 {
        return columns
            .iter()
            .map(|_| Interval {
                mean: 0.0,
                lo: 0.0,
                hi: 0.0,
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats: Vec<Vec<f64>> = vec![Vec::with_capacity(resamples); columns.len()];
    let mut idx = vec![0usize; n];
    for _ in 0..resamples {
        idx.iter_mut().for_each(|i| *i = rng.random_range(0..n));
        for (col, out) in columns.iter().zip(stats.iter_mut()) {
            out.push(idx.iter().map(|i| col[*i]).sum::<f64>() / n as f64);
        }
    }
    columns
        .iter()
        .zip(stats)
        .map(|(col, mut s)| {
            s.sort_by(f64::total_cmp);
            let lo = s[((0.025 * resamples as f64).floor() as usize).min(resamples - 1)];
            let hi = s[((0.975 * resamples as f64).ceil() as usize).clamp(1, resamples) - 1];
            Interval {
                mean: col.iter().sum::<f64>() / n as f64,
                lo,
                hi,
            }
        })
        .collect()
}

/// Folds per-run records into one summary per cell.
pub fn summarize(
    cfg: &BenchConfig,
    cells: &[Cell],
    runs: &[RunRecord],
    cell_of: &[usize],
) -> Vec<CellSummary> {
    cells
        .iter()
        .enumerate()
        .map(|(ci, cell)| {
            let rows: Vec<&RunRecord> = runs
                .iter()
                .zip(cell_of)
                .filter(|(_, c)| **c == ci)
                .map(|(r, _)| r)
                .collect();
            let missing: Vec<f64> = rows.iter().map(|r| r.missing_rate).collect();
            let leakage: Vec<f64> = rows.iter().map(|r| r.leakage).collect();
            let mixture: Vec<f64> = rows.iter().map(|r| r.mixture).collect();
            let seed = cfg.seeds.base ^ ((ci as u64 + 1) << 32);
            let iv = bootstrap_means(
                &[&missing, &leakage, &mixture],
                cfg.bootstrap_resamples,
                seed,
            );
            CellSummary {
                cell: ci,
                spec: *cell,
                runs: rows.len(),
                missing_rate: iv[0],
                leakage: iv[1],
                mixture: iv[2],
            }
        })
        .collect()
}

/// Optional side outputs written while a run completes.
struct RunArtifacts<'a> {
    dir: &'a Path,
    traces: bool,
    svg: bool,
}

/// Executes the whole matrix on `jobs` worker threads (0 = all cores).
pub fn run_benchmark(
    cfg: &BenchConfig,
    fixed_scene: Option<&SceneSpec>,
    jobs: usize,
) -> Result<BenchReport> {
    run_benchmark_inner(cfg, fixed_scene, jobs, None)
}

fn run_benchmark_inner(
    cfg: &BenchConfig,
    fixed_scene: Option<&SceneSpec>,
    jobs: usize,
    artifacts: Option<RunArtifacts<'_>>,
) -> Result<BenchReport> {
    cfg.validate()?;
    let cells = expand_cells(cfg);
    let specs = expand_runs(cfg, &cells);
    let grid = format!("{}x{}", cfg.scene.height, cfg.scene.width);
    let artifacts = artifacts.as_ref();

    let one = |spec: &RunSpec| -> Result<RunRecord> {
        let cell = &cells[spec.cell];
        let (scene, outcome, report) = execute_run(cfg, cell, spec.seed, fixed_scene)?;
        if let Some(a) = artifacts {
            if a.traces {
                let path = a
                    .dir
                    .join("traces")
                    .join(format!("run_{:05}.csv", spec.run_id));
                let file = std::fs::File::create(&path).map_err(io_err(&path))?;
                outcome.trace.write_csv(std::io::BufWriter::new(file))?;
            }
            if a.svg {
                let path = a
                    .dir
                    .join("svg")
                    .join(format!("run_{:05}.svg", spec.run_id));
                render::write_grid_svg(&outcome.state.tokens, &scene, &path)?;
            }
        }
        Ok(RunRecord {
            run_id: spec.run_id,
            seed: spec.seed,
            strategy: cell.strategy,
            wa: cell.wa(),
            guidance_steps: cell.guidance_steps(),
            mode: cell.mode_name(),
            blur: cell.blur(),
            lambda: cell.lambda,
            missing_rate: report.missing_rate,
            leakage: report.attribute_leakage.value,
            mixture: report.object_mixture.value,
            steps: cfg.steps,
            grid: grid.clone(),
        })
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config {
            field: "jobs".into(),
            reason: e.to_string(),
        })?;
    let results: Vec<Result<RunRecord>> = pool.install(|| specs.par_iter().map(one).collect());

    let mut runs = Vec::with_capacity(results.len());
    let mut cell_of = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (spec, res) in specs.iter().zip(results) {
        match res {
            Ok(r) => {
                runs.push(r);
                cell_of.push(spec.cell);
            }
            Err(e) => failures.push(RunFailure {
                run_id: spec.run_id,
                seed: spec.seed,
                message: e.to_string(),
            }),
        }
    }
    let summaries = summarize(cfg, &cells, &runs, &cell_of);
    Ok(BenchReport {
        cells,
        runs,
        summaries,
        failures,
    })
}

pub fn write_runs_csv<W: Write>(runs: &[RunRecord], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for r in runs {
        wtr.serialize(r)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    cell: usize,
    strategy: Strategy,
    wa: f64,
    guidance_steps: usize,
    mode: &'a str,
    blur: bool,
    lambda: f64,
    runs: usize,
    missing_rate: f64,
    missing_lo: f64,
    missing_hi: f64,
    leakage: f64,
    leakage_lo: f64,
    leakage_hi: f64,
    mixture: f64,
    mixture_lo: f64,
    mixture_hi: f64,
    theta_min: f64,
    theta_mix: f64,
    steps: usize,
    grid: String,
}

pub fn write_summary_csv<W: Write>(
    cfg: &BenchConfig,
    summaries: &[CellSummary],
    out: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for s in summaries {
        wtr.serialize(SummaryRow {
            cell: s.cell,
            strategy: s.spec.strategy,
            wa: s.spec.wa(),
            guidance_steps: s.spec.guidance_steps(),
            mode: s.spec.mode_name(),
            blur: s.spec.blur(),
            lambda: s.spec.lambda,
            runs: s.runs,
            missing_rate: s.missing_rate.mean,
            missing_lo: s.missing_rate.lo,
            missing_hi: s.missing_rate.hi,
            leakage: s.leakage.mean,
            leakage_lo: s.leakage.lo,
            leakage_hi: s.leakage.hi,
            mixture: s.mixture.mean,
            mixture_lo: s.mixture.lo,
            mixture_hi: s.mixture.hi,
            theta_min: cfg.metrics.theta_min,
            theta_mix: cfg.metrics.theta_mix,
            steps: cfg.steps,
            grid: format!("{}x{}", cfg.scene.height, cfg.scene.width),
        })?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Runs the matrix and writes `runs.csv` and `summary.csv` (plus traces and
/// SVGs when enabled) under `dir`.
pub fn run_to_dir(
    cfg: &BenchConfig,
    fixed_scene: Option<&SceneSpec>,
    jobs: usize,
    dir: &Path,
) -> Result<BenchReport> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (on, sub) in [(cfg.traces, "traces"), (cfg.svg, "svg")] {
        if on {
            let p = dir.join(sub);
            std::fs::create_dir_all(&p).map_err(io_err(&p))?;
        }
    }
    let report = run_benchmark_inner(
        cfg,
        fixed_scene,
        jobs,
        Some(RunArtifacts {
            dir,
            traces: cfg.traces,
            svg: cfg.svg,
        }),
    )?;
    let runs_path = dir.join("runs.csv");
    let file = std::fs::File::create(&runs_path).map_err(io_err(&runs_path))?;
    write_runs_csv(&report.runs, std::io::BufWriter::new(file))?;
    let summary_path = dir.join("summary.csv");
    let file = std::fs::File::create(&summary_path).map_err(io_err(&summary_path))?;
    write_summary_csv(cfg, &report.summaries, std::io::BufWriter::new(file))?;
    Ok(report)
}
