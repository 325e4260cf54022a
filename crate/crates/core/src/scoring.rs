//! Unmasking-order score terms and top-k selection.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::grid::{Grid, Pos};

/// Real-valued field over grid positions. Excluded positions hold `-inf`.
pub type ScoreField = Grid<f64>;

pub type TokenId = u32;

/// Token grid plus mask status. Masked positions carry no meaningful id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridState {
    pub tokens: Grid<TokenId>,
    pub masked: Grid<bool>,
    pub step: usize,
}

impl GridState {
    pub fn all_masked(height: usize, width: usize) -> Self {
        Self {
            tokens: Grid::filled(height, width, 0),
            masked: Grid::filled(height, width, true),
            step: 0,
        }
    }

    pub fn height(&self) -> usize {
        self.tokens.height()
    }

    pub fn width(&self) -> usize {
        self.tokens.width()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.tokens.dims()
    }

    pub fn masked_count(&self) -> usize {
        self.masked.as_slice().iter().filter(|m| **m).count()
    }

    pub fn is_masked(&self, pos: Pos) -> bool {
        self.masked[pos]
    }

    /// Commits `token` at `pos`. Committed positions never change again.
    pub fn commit(&mut self, pos: Pos, token: TokenId) -> Result<()> {
        if !self.masked[pos] {
            return Err(contract(format!("{pos:?} is already unmasked")));
        }
        self.tokens[pos] = token;
        self.masked[pos] = false;
        Ok(())
    }
}

/// Per-position logits, laid out `[row][col][vocab]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Logits {
    height: usize,
    width: usize,
    vocab: usize,
    data: Vec<f64>,
}

impl Logits {
    pub fn zeros(height: usize, width: usize, vocab: usize) -> Self {
        Self {
            height,
            width,
            vocab,
            data: vec![0.0; height * width * vocab],
        }
    }

    pub fn from_vec(height: usize, width: usize, vocab: usize, data: Vec<f64>) -> Result<Self> {
        if vocab == 0 || data.len() != height * width * vocab {
            return Err(contract(format!(
                "logit buffer has {} entries, expected {height}x{width}x{vocab}",
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            vocab,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }

    pub fn at(&self, pos: Pos) -> &[f64] {
        let start = (pos.row * self.width + pos.col) * self.vocab;
        &self.data[start..start + self.vocab]
    }

    pub fn at_mut(&mut self, pos: Pos) -> &mut [f64] {
        let start = (pos.row * self.width + pos.col) * self.vocab;
        &mut self.data[start..start + self.vocab]
    }

    /// Logit rows in row-major position order.
    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.vocab)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// `F_c`: the raw logit of the sampled token at masked positions, `-inf` elsewhere.
pub fn confidence_scores(
    logits: &Logits,
    sampled: &Grid<TokenId>,
    state: &GridState,
) -> Result<ScoreField> {
    let (h, w) = state.dims();
    if logits.height != h || logits.width != w {
        return Err(contract(format!(
            "logits are {}x{}, state is {h}x{w}",
            logits.height, logits.width
        )));
    }
    sampled.ensure_dims(h, w, "sampled tokens")?;

    let mut out = Vec::with_capacity(h * w);
    for (i, row) in logits.rows().enumerate() {
        if state.masked.as_slice()[i] {
            let id = sampled.as_slice()[i] as usize;
            let v = *row.get(id).ok_or_else(|| {
                contract(format!("sampled id {id} outside vocab of {}", logits.vocab))
            })?;
            out.push(v);
        } else {
            out.push(f64::NEG_INFINITY);
        }
    }
    Grid::from_vec(h, w, out)
}

/// Gumbel transform of a single uniform draw: `-tau * ln(-ln u)`.
#[inline]
pub fn gumbel_from_uniform(u: f64, tau: f64) -> f64 {
    -tau * (-u.ln()).ln()
}

/// `F_g`: temperature-scaled Gumbel noise, one uniform draw per position.
///
/// Always consumes exactly `height * width` draws so that downstream streams
/// stay aligned regardless of `tau`.
pub fn gumbel_noise<R: Rng + ?Sized>(
    height: usize,
    width: usize,
    tau: f64,
    rng: &mut R,
) -> ScoreField {
    Grid::from_fn(height, width, |_| {
        let u: f64 = rng.sample(Open01);
        if tau == 0.0 {
            0.0
        } else {
            gumbel_from_uniform(u, tau)
        }
    })
}

/// `F = F_c + F_g (+ w_a F_a while t <= T_g)`.
///
/// Outside the guidance window, or with `w_a = 0`, the guidance term is not
/// touched at all so the result is bitwise `F_c + F_g`.
pub fn combine_scores(
    confidence: &ScoreField,
    gumbel: &ScoreField,
    attention: Option<&ScoreField>,
    wa: f64,
    t: usize,
    guidance_steps: usize,
) -> Result<ScoreField> {
    let (h, w) = confidence.dims();
    gumbel.ensure_dims(h, w, "gumbel field")?;
    let guided = match attention {
        Some(fa) if wa != 0.0 && t <= guidance_steps => {
            fa.ensure_dims(h, w, "attention field")?;
            if let Some(bad) = fa.as_slice().iter().find(|v| !v.is_finite()) {
                return Err(contract(format!("attention field holds non-finite {bad}")));
            }
            Some(fa)
        }
        _ => None,
    };

    let fc = confidence.as_slice();
    let fg = gumbel.as_slice();
    let data = match guided {
        None => fc.iter().zip(fg).map(|(c, g)| c + g).collect(),
        Some(fa) => fc
            .iter()
            .zip(fg)
            .zip(fa.as_slice())
            .map(|((c, g), a)| c + g + wa * a)
            .collect(),
    };
    Grid::from_vec(h, w, data)
}

/// The `k` masked positions with the largest score, best first.
///
/// Ties go to the smaller row-major index. Unmasked positions are never
/// returned whatever their score.
pub fn select_topk(scores: &ScoreField, state: &GridState, k: usize) -> Result<Vec<Pos>> {
    let (h, w) = state.dims();
    scores.ensure_dims(h, w, "score field")?;
    let values = scores.as_slice();
    let mut candidates: Vec<usize> = state
        .masked
        .as_slice()
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.then_some(i))
        .collect();
    if k > candidates.len() {
        return Err(contract(format!(
            "asked for {k} positions, only {} masked",
            candidates.len()
        )));
    }
    let by_score = |a: &usize, b: &usize| values[*b].total_cmp(&values[*a]).then(a.cmp(b));
    if k > 0 && k < candidates.len() {
        candidates.select_nth_unstable_by(k - 1, by_score);
    }
    candidates.truncate(k);
    candidates.sort_unstable_by(by_score);
    Ok(candidates.into_iter().map(|i| scores.pos_of(i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn field(h: usize, w: usize, v: &[f64]) -> ScoreField {
        Grid::from_vec(h, w, v.to_vec()).unwrap()
    }

    #[test]
    fn confidence_gathers_sampled_logit() {
        let mut state = GridState::all_masked(1, 2);
        let logits = Logits::from_vec(1, 2, 2, vec![2.0, 0.5, 1.0, 3.0]).unwrap();
        let sampled = Grid::from_vec(1, 2, vec![0, 1]).unwrap();
        let fc = confidence_scores(&logits, &sampled, &state).unwrap();
        assert_eq!(fc.as_slice(), &[2.0, 3.0]);

        state.commit(Pos::new(0, 1), 1).unwrap();
        let fc = confidence_scores(&logits, &sampled, &state).unwrap();
        assert_eq!(fc[Pos::new(0, 1)], f64::NEG_INFINITY);
    }

    #[test]
    fn confidence_gather_matches_elementwise_oracle() {
        let state = GridState::all_masked(2, 2);
        let expected = [1.7, -0.3, 0.0, 4.2];
        let vocab = 3;
        let sampled = Grid::from_vec(2, 2, vec![2, 0, 1, 2]).unwrap();
        let mut data = vec![-9.0; 4 * vocab];
        for (i, id) in sampled.as_slice().iter().enumerate() {
            data[i * vocab + *id as usize] = expected[i];
        }
        let logits = Logits::from_vec(2, 2, vocab, data).unwrap();
        let fc = confidence_scores(&logits, &sampled, &state).unwrap();
        assert_eq!(fc.as_slice(), &expected);
    }

    #[test]
    fn confidence_rejects_shape_mismatch() {
        let state = GridState::all_masked(2, 2);
        let logits = Logits::zeros(2, 3, 2);
        let sampled = Grid::filled(2, 2, 0);
        assert!(confidence_scores(&logits, &sampled, &state).is_err());
        let logits = Logits::zeros(2, 2, 2);
        let sampled = Grid::filled(2, 2, 5);
        assert!(confidence_scores(&logits, &sampled, &state).is_err());
    }

    #[test]
    fn gumbel_zero_temperature_and_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = gumbel_noise(3, 3, 0.0, &mut rng);
        assert!(g.as_slice().iter().all(|v| *v == 0.0));
        assert_eq!(gumbel_from_uniform((-1.0f64).exp(), 1.0), 0.0);
    }

    #[test]
    fn gumbel_is_reproducible() {
        let a = gumbel_noise(8, 8, 0.7, &mut ChaCha8Rng::seed_from_u64(9));
        let b = gumbel_noise(8, 8, 0.7, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn gumbel_mean_is_euler_mascheroni() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let g = gumbel_noise(100, 1000, 1.0, &mut rng);
        let mean = g.as_slice().iter().sum::<f64>() / g.len() as f64;
        assert!((mean - 0.577_215_664_9).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn combine_arithmetic_and_window() {
        let fc = field(1, 1, &[1.0]);
        let fg = field(1, 1, &[0.5]);
        let fa = field(1, 1, &[0.2]);
        let f = combine_scores(&fc, &fg, Some(&fa), 3.0, 1, 16).unwrap();
        assert!((f[Pos::new(0, 0)] - 2.1).abs() < 1e-12);
        let f = combine_scores(&fc, &fg, Some(&fa), 3.0, 17, 16).unwrap();
        assert_eq!(f[Pos::new(0, 0)], 1.5);
    }

    #[test]
    fn combine_zero_weight_is_bitwise_baseline() {
        let fc = field(1, 3, &[0.1, -0.0, f64::NEG_INFINITY]);
        let fg = field(1, 3, &[0.2, -0.0, 0.3]);
        let fa = field(1, 3, &[0.9, 0.4, 0.1]);
        let base = combine_scores(&fc, &fg, None, 0.0, 1, 16).unwrap();
        let off = combine_scores(&fc, &fg, Some(&fa), 0.0, 1, 16).unwrap();
        let bits = |f: &ScoreField| f.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&base), bits(&off));
        assert_eq!(base[Pos::new(0, 2)], f64::NEG_INFINITY);
    }

    #[test]
    fn combine_rejects_mismatch_and_nonfinite_guidance() {
        let fc = field(1, 2, &[0.0, 0.0]);
        let fg = field(2, 1, &[0.0, 0.0]);
        assert!(combine_scores(&fc, &fg, None, 0.0, 1, 1).is_err());
        let fa = field(1, 2, &[f64::NAN, 0.0]);
        assert!(combine_scores(&fc, &fc, Some(&fa), 1.0, 1, 1).is_err());
    }

    #[test]
    fn topk_examples() {
        let state = GridState::all_masked(2, 2);
        let f = field(2, 2, &[3.0, 1.0, 2.0, 0.0]);
        assert_eq!(
            select_topk(&f, &state, 2).unwrap(),
            vec![Pos::new(0, 0), Pos::new(1, 0)]
        );
        let c = field(2, 2, &[1.0; 4]);
        assert_eq!(
            select_topk(&c, &state, 2).unwrap(),
            vec![Pos::new(0, 0), Pos::new(0, 1)]
        );
        assert_eq!(select_topk(&c, &state, 4).unwrap().len(), 4);
        assert!(select_topk(&c, &state, 5).is_err());
    }

    #[test]
    fn topk_skips_unmasked_even_with_high_scores() {
        let mut state = GridState::all_masked(2, 2);
        state.commit(Pos::new(0, 0), 1).unwrap();
        let f = field(2, 2, &[100.0, 1.0, 2.0, 0.0]);
        let picked = select_topk(&f, &state, 3).unwrap();
        assert_eq!(picked, vec![Pos::new(1, 0), Pos::new(0, 1), Pos::new(1, 1)]);
        assert!(select_topk(&f, &state, 4).is_err());
    }

    #[test]
    fn commit_is_one_shot() {
        let mut state = GridState::all_masked(1, 1);
        state.commit(Pos::new(0, 0), 3).unwrap();
        assert!(state.commit(Pos::new(0, 0), 4).is_err());
        assert_eq!(state.tokens[Pos::new(0, 0)], 3);
    }
}
