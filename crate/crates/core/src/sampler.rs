//! The parallel decoding loop.
//!
//! Each step queries the model once, samples a token for every masked
//! position, scores the candidates according to the strategy and commits the
//! top `k_t` of them. Everything not committed is re-masked and predicted
//! again at the next step.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::grid::{Grid, Pos};
use crate::guidance::{aggregate_attention, guidance_field, AttentionSlice, GuidanceConfig};
use crate::halton::halton_order;
use crate::prompt::PromptSpec;
use crate::schedule::ScheduleConfig;
use crate::scoring::{
    combine_scores, confidence_scores, gumbel_noise, select_topk, GridState, Logits, ScoreField,
    TokenId,
};

/// Substream of the sampler seed used for token sampling.
pub const TOKEN_STREAM: u64 = 1;
/// Substream of the sampler seed used for Gumbel ordering noise.
pub const GUMBEL_STREAM: u64 = 2;

/// What the model returns for one step.
#[derive(Clone, Debug)]
pub struct ModelOutput {
    pub logits: Logits,
    /// One entry per (block, head) slice.
    pub attention: Vec<AttentionSlice>,
}

/// A masked generative model over an H×W token grid.
///
/// Implementations must be deterministic in `(spec, state, t)` and their own
/// seed, and must return finite logits.
pub trait MaskedModel {
    fn dims(&self) -> (usize, usize);

    fn query(&self, spec: &PromptSpec, state: &GridState, t: usize) -> Result<ModelOutput>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Gumbel noise only.
    Random,
    /// Sampled-token logit only.
    Confidence,
    /// Logit plus annealed Gumbel noise.
    Baseline,
    /// Precomputed Halton order.
    Halton,
    /// Baseline plus contrastive attention guidance.
    Uncage,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Random,
        Strategy::Confidence,
        Strategy::Baseline,
        Strategy::Halton,
        Strategy::Uncage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Confidence => "confidence",
            Strategy::Baseline => "baseline",
            Strategy::Halton => "halton",
            Strategy::Uncage => "uncage",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown strategy `{s}` (expected random|confidence|baseline|halton|uncage)"
                )
            })
    }
}

/// Which baseline terms the guided score keeps. Both on by default; turning
/// one off reproduces the "without F_c" / "without F_g" ablations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreTerms {
    pub confidence: bool,
    pub gumbel: bool,
}

impl Default for ScoreTerms {
    fn default() -> Self {
        Self {
            confidence: true,
            gumbel: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    pub guidance: GuidanceConfig,
    pub terms: ScoreTerms,
    pub seed: u64,
    /// Softmax temperature for token sampling; 0 means greedy.
    pub token_temperature: f64,
}

impl StrategyConfig {
    pub fn new(strategy: Strategy, seed: u64) -> Self {
        Self {
            strategy,
            guidance: GuidanceConfig::default(),
            terms: ScoreTerms::default(),
            seed,
            token_temperature: 1.0,
        }
    }

    pub fn uncage(guidance: GuidanceConfig, seed: u64) -> Self {
        Self {
            guidance,
            ..Self::new(Strategy::Uncage, seed)
        }
    }

    pub fn with_token_temperature(mut self, tau: f64) -> Self {
        self.token_temperature = tau;
        self
    }

    pub fn with_terms(mut self, terms: ScoreTerms) -> Self {
        self.terms = terms;
        self
    }
}

/// min / max / mean over the masked positions of a field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl FieldSummary {
    fn over_masked(field: &ScoreField, state: &GridState) -> Option<Self> {
        let mut n = 0usize;
        let (mut min, mut max, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for (v, m) in field.as_slice().iter().zip(state.masked.as_slice()) {
            if *m {
                n += 1;
                min = min.min(*v);
                max = max.max(*v);
                sum += v;
            }
        }
        (n > 0).then(|| Self {
            min,
            max,
            mean: sum / n as f64,
        })
    }
}

/// Which inputs actually fed the ordering decision at a step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingInputs {
    pub read_confidence: bool,
    pub gumbel_draws: usize,
    pub read_attention: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnmaskEvent {
    pub pos: Pos,
    pub token: TokenId,
    pub f_c: f64,
    pub f_g: Option<f64>,
    pub f_a: Option<f64>,
    pub f: Option<f64>,
}

/// Full per-step fields, kept only when requested.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFields {
    pub confidence: ScoreField,
    pub gumbel: Option<ScoreField>,
    pub attention: Option<ScoreField>,
    pub combined: Option<ScoreField>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub temperature: f64,
    pub events: Vec<UnmaskEvent>,
    pub confidence: Option<FieldSummary>,
    pub gumbel: Option<FieldSummary>,
    pub attention: Option<FieldSummary>,
    pub combined: Option<FieldSummary>,
    pub ordering: OrderingInputs,
    pub fields: Option<StepFields>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunTrace {
    pub height: usize,
    pub width: usize,
    pub steps: Vec<StepRecord>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub state: GridState,
    pub trace: RunTrace,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Keep every per-step score field in the trace.
    pub keep_fields: bool,
}

/// Samples a token for every masked position; committed positions keep
/// their id. One uniform draw is consumed per position either way.
pub fn sample_tokens<R: Rng + ?Sized>(
    logits: &Logits,
    temperature: f64,
    state: &GridState,
    rng: &mut R,
) -> Result<Grid<TokenId>> {
    let (h, w) = state.dims();
    if logits.height() != h || logits.width() != w {
        return Err(contract(format!(
            "logits are {}x{}, grid is {h}x{w}",
            logits.height(),
            logits.width()
        )));
    }
    let mut probs = vec![0.0; logits.vocab()];
    let mut out = Vec::with_capacity(h * w);
    for (i, row) in logits.rows().enumerate() {
        let u: f64 = rng.sample(Open01);
        if !state.masked.as_slice()[i] {
            out.push(state.tokens.as_slice()[i]);
            continue;
        }
        let best = argmax(row);
        if temperature <= 0.0 {
            out.push(best as TokenId);
            continue;
        }
        let peak = row[best];
        let mut total = 0.0;
        for (p, l) in probs.iter_mut().zip(row) {
            *p = ((l - peak) / temperature).exp();
            total += *p;
        }
        let target = u * total;
        let mut acc = 0.0;
        let mut chosen = row.len() - 1;
        for (v, p) in probs.iter().enumerate() {
            acc += p;
            if target < acc {
                chosen = v;
                break;
            }
        }
        out.push(chosen as TokenId);
    }
    Grid::from_vec(h, w, out)
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in row.iter().enumerate().skip(1) {
        if *v > row[best] {
            best = i;
        }
    }
    best
}

/// Runs the full decoding loop.
pub fn run<M: MaskedModel + ?Sized>(
    model: &M,
    spec: &PromptSpec,
    sched: &ScheduleConfig,
    strat: &StrategyConfig,
) -> Result<RunOutcome> {
    run_with(model, spec, sched, strat, RunOptions::default())
}

pub fn run_with<M: MaskedModel + ?Sized>(
    model: &M,
    spec: &PromptSpec,
    sched: &ScheduleConfig,
    strat: &StrategyConfig,
    opts: RunOptions,
) -> Result<RunOutcome> {
    sched.check()?;
    let (h, w) = model.dims();
    if h * w != sched.total_tokens {
        return Err(contract(format!(
            "schedule covers {} tokens, model grid is {h}x{w}",
            sched.total_tokens
        )));
    }
    if strat.strategy == Strategy::Uncage {
        strat.guidance.check()?;
    }

    let mut token_rng = ChaCha8Rng::seed_from_u64(strat.seed);
    token_rng.set_stream(TOKEN_STREAM);
    let mut gumbel_rng = ChaCha8Rng::seed_from_u64(strat.seed);
    gumbel_rng.set_stream(GUMBEL_STREAM);

    let halton = match strat.strategy {
        Strategy::Halton => Some(halton_order(h, w)?),
        _ => None,
    };
    let mut halton_cursor = 0usize;

    let counts = sched.unmask_counts();
    let mut state = GridState::all_masked(h, w);
    let mut trace = RunTrace {
        height: h,
        width: w,
        steps: Vec::with_capacity(counts.len()),
    };

    for (t, &k_t) in (1..=sched.total_steps).zip(&counts) {
        let remaining = state.masked_count();
        if remaining == 0 {
            break;
        }
        let k = k_t.min(remaining);

        let out = model.query(spec, &state, t)?;
        if out.logits.height() != h || out.logits.width() != w {
            return Err(contract(format!(
                "model returned {}x{} logits for a {h}x{w} grid",
                out.logits.height(),
                out.logits.width()
            )));
        }
        let sampled = sample_tokens(&out.logits, strat.token_temperature, &state, &mut token_rng)?;
        let fc = confidence_scores(&out.logits, &sampled, &state)?;
        let tau = sched.gumbel_temperature(t)?;

        let mut ordering = OrderingInputs::default();
        let draws_gumbel = matches!(
            strat.strategy,
            Strategy::Random | Strategy::Baseline | Strategy::Uncage
        );
        let fg = draws_gumbel.then(|| {
            ordering.gumbel_draws = h * w;
            gumbel_noise(h, w, tau, &mut gumbel_rng)
        });

        let fa = if strat.strategy == Strategy::Uncage && strat.guidance.active_at(t) {
            let maps = aggregate_attention(&out.attention, t)?;
            ordering.read_attention = true;
            Some(guidance_field(&maps, spec, &strat.guidance)?)
        } else {
            None
        };

        let combined = match strat.strategy {
            Strategy::Halton => None,
            Strategy::Random => fg.clone(),
            Strategy::Confidence => {
                ordering.read_confidence = true;
                Some(fc.clone())
            }
            Strategy::Baseline => {
                ordering.read_confidence = true;
                let fg = fg.as_ref().expect("baseline draws gumbel noise");
                Some(combine_scores(&fc, fg, None, 0.0, t, 0)?)
            }
            Strategy::Uncage => {
                let fg = fg.as_ref().expect("uncage draws gumbel noise");
                let terms = strat.terms;
                ordering.read_confidence = terms.confidence;
                let base_c = if terms.confidence {
                    fc.clone()
                } else {
                    fc.map(|v| if v.is_finite() { 0.0 } else { *v })
                };
                let base_g = if terms.gumbel {
                    fg.clone()
                } else {
                    Grid::filled(h, w, 0.0)
                };
                Some(combine_scores(
                    &base_c,
                    &base_g,
                    fa.as_ref(),
                    strat.guidance.weight,
                    t,
                    strat.guidance.guidance_steps,
                )?)
            }
        };

        let chosen = match (&halton, &combined) {
            (Some(order), _) => {
                let mut picked = Vec::with_capacity(k);
                while picked.len() < k {
                    let p = order.order[halton_cursor];
                    halton_cursor += 1;
                    if state.is_masked(p) {
                        picked.push(p);
                    }
                }
                picked
            }
            (None, Some(f)) => select_topk(f, &state, k)?,
            (None, None) => unreachable!("score-based strategies always produce a field"),
        };

        let summaries = (
            FieldSummary::over_masked(&fc, &state),
            fg.as_ref()
                .and_then(|f| FieldSummary::over_masked(f, &state)),
            fa.as_ref()
                .and_then(|f| FieldSummary::over_masked(f, &state)),
            combined
                .as_ref()
                .and_then(|f| FieldSummary::over_masked(f, &state)),
        );

        let mut events = Vec::with_capacity(chosen.len());
        for p in chosen {
            let token = sampled[p];
            state.commit(p, token)?;
            events.push(UnmaskEvent {
                pos: p,
                token,
                f_c: fc[p],
                f_g: fg.as_ref().map(|f| f[p]),
                f_a: fa.as_ref().map(|f| f[p]),
                f: combined.as_ref().map(|f| f[p]),
            });
        }
        state.step = t;

        trace.steps.push(StepRecord {
            step: t,
            temperature: tau,
            events,
            confidence: summaries.0,
            gumbel: summaries.1,
            attention: summaries.2,
            combined: summaries.3,
            ordering,
            fields: opts.keep_fields.then_some(StepFields {
                confidence: fc,
                gumbel: fg,
                attention: fa,
                combined,
            }),
        });
    }

    Ok(RunOutcome { state, trace })
}

/// One row of the trace CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub row: usize,
    pub col: usize,
    pub token_id: TokenId,
    pub f_c: f64,
    pub f_g: Option<f64>,
    pub f_a: Option<f64>,
    pub f: Option<f64>,
}

impl RunTrace {
    pub fn events(&self) -> impl Iterator<Item = (usize, &UnmaskEvent)> {
        self.steps
            .iter()
            .flat_map(|s| s.events.iter().map(move |e| (s.step, e)))
    }

    /// Positions unmasked per step.
    pub fn step_counts(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.events.len()).collect()
    }

    pub fn rows(&self) -> Vec<TraceRow> {
        self.events()
            .map(|(step, e)| TraceRow {
                step,
                row: e.pos.row,
                col: e.pos.col,
                token_id: e.token,
                f_c: e.f_c,
                f_g: e.f_g,
                f_a: e.f_a,
                f: e.f,
            })
            .collect()
    }

    /// Grid assembled from the committed tokens; `None` where never unmasked.
    pub fn assembled_grid(&self) -> Grid<Option<TokenId>> {
        let mut grid = Grid::filled(self.height, self.width, None);
        for (_, e) in self.events() {
            grid[e.pos] = Some(e.token);
        }
        grid
    }

    /// Writes `step,row,col,token_id,f_c,f_g,f_a,f`, one row per unmasking event.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        for row in self.rows() {
            wtr.serialize(row)?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let rows = rdr.deserialize().collect::<Result<Vec<TraceRow>, _>>()?;
    Ok(rows)
}

/// Rebuilds a final token grid from trace rows.
pub fn grid_from_trace_rows(
    rows: &[TraceRow],
    height: usize,
    width: usize,
) -> Result<Grid<TokenId>> {
    let mut grid = Grid::filled(height, width, None);
    for r in rows {
        let pos = Pos::new(r.row, r.col);
        let slot = grid
            .get(pos)
            .ok_or_else(|| contract(format!("trace row at {pos:?} outside {height}x{width}")))?;
        if slot.is_some() {
            return Err(contract(format!("trace unmasks {pos:?} twice")));
        }
        grid[pos] = Some(r.token_id);
    }
    let missing = grid.as_slice().iter().filter(|v| v.is_none()).count();
    if missing > 0 {
        return Err(contract(format!("trace leaves {missing} positions masked")));
    }
    Ok(grid.map(|v| v.expect("checked above")))
}
