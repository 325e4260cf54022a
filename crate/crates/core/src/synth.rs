//! Procedural stand-in for a masked generative transformer.
//!
//! A scene is a set of disc-shaped entities, each an object with one bound
//! attribute. The mock model predicts composite tokens (object with its own
//! attribute, or object with a wrong attribute) plus background, and makes
//! unmasking order matter through an anchoring vote: committed neighbours
//! pull the logits of masked cells towards their own token. Cross-attention
//! leakage `overlap` blurs which entity a cell belongs to, both in the
//! attention maps and in the logits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::grid::{Grid, Pos};
use crate::guidance::{rescale_unit, AttentionSlice};
use crate::prompt::{build_prompt_spec, ObjectEntry, PromptSpec, SubjectId, SubjectKind};
use crate::sampler::{MaskedModel, ModelOutput};
use crate::scoring::{GridState, Logits, TokenId};

pub const BACKGROUND: TokenId = 0;

const OBJECT_LABELS: [&str; 8] = [
    "cat", "dog", "car", "apple", "bird", "horse", "balloon", "turtle",
];
const ATTRIBUTE_LABELS: [&str; 8] = [
    "red", "blue", "pink", "green", "yellow", "purple", "white", "black",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub object: SubjectId,
    pub attribute: Option<SubjectId>,
    pub object_label: String,
    pub attribute_label: Option<String>,
    /// `(row, col)` in cell units.
    pub center: (f64, f64),
    pub radius: f64,
}

impl Entity {
    pub fn distance_sq(&self, pos: Pos) -> f64 {
        let dr = pos.row as f64 - self.center.0;
        let dc = pos.col as f64 - self.center.1;
        dr * dr + dc * dc
    }

    pub fn contains(&self, pos: Pos) -> bool {
        self.distance_sq(pos) <= self.radius * self.radius
    }
}

/// What a token id denotes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenMeaning {
    Background,
    /// Entity `entity`'s object, with its own attribute when `correct`.
    Composite {
        entity: usize,
        correct: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub height: usize,
    pub width: usize,
    pub entities: Vec<Entity>,
    /// Cross-attention leakage λ in `[0, 1]`.
    pub overlap: f64,
    pub attn_sigma: f64,
    pub anchor_radius: usize,
    pub anchor_weight: f64,
    /// Logit margin of the ground-truth token over background.
    pub margin: f64,
    /// Logit of the background token on background cells.
    pub background_margin: f64,
    /// Gain on the ambiguity margin given to competing tokens.
    pub leak_gain: f64,
    pub noise_sigma: f64,
    /// Attention slices emitted per query (`blocks * heads`).
    pub blocks: usize,
    pub heads: usize,
    /// Relative spread of per-head attention widths around `attn_sigma`.
    pub head_spread: f64,
}

impl SceneSpec {
    pub fn vocab_size(&self) -> usize {
        1 + 2 * self.entities.len()
    }

    pub fn correct_token(&self, entity: usize) -> TokenId {
        (1 + 2 * entity) as TokenId
    }

    pub fn wrong_token(&self, entity: usize) -> TokenId {
        (2 + 2 * entity) as TokenId
    }

    pub fn meaning(&self, token: TokenId) -> TokenMeaning {
        if token == BACKGROUND {
            return TokenMeaning::Background;
        }
        let t = token as usize - 1;
        TokenMeaning::Composite {
            entity: t / 2,
            correct: t.is_multiple_of(2),
        }
    }

    /// Entity owning `pos`: inside its disc, nearest centre on overlap.
    pub fn owner(&self, pos: Pos) -> Option<usize> {
        self.entities
            .iter()
            .enumerate()
            .filter(|(_, e)| e.contains(pos))
            .min_by(|(_, a), (_, b)| a.distance_sq(pos).total_cmp(&b.distance_sq(pos)))
            .map(|(i, _)| i)
    }

    pub fn ground_truth(&self) -> Grid<TokenId> {
        Grid::from_fn(self.height, self.width, |p| match self.owner(p) {
            Some(e) => self.correct_token(e),
            None => BACKGROUND,
        })
    }

    /// Cells in entity `e`'s disc.
    pub fn region(&self, e: usize) -> Vec<Pos> {
        let ent = &self.entities[e];
        (0..self.height)
            .flat_map(|r| (0..self.width).map(move |c| Pos::new(r, c)))
            .filter(|p| ent.contains(*p))
            .collect()
    }

    /// Unnormalized Gaussian bump of entity `e` at `pos`.
    pub fn bump(&self, e: usize, pos: Pos, sigma: f64) -> f64 {
        (-self.entities[e].distance_sq(pos) / (2.0 * sigma * sigma)).exp()
    }

    /// Prompt whose objects are this scene's entities, in order.
    pub fn prompt(&self) -> Result<PromptSpec> {
        let entries: Vec<ObjectEntry> = self
            .entities
            .iter()
            .map(|e| ObjectEntry {
                label: e.object_label.clone(),
                attributes: e.attribute_label.iter().cloned().collect(),
            })
            .collect();
        let spec = build_prompt_spec(&entries)?;
        for (i, e) in self.entities.iter().enumerate() {
            if spec.objects.get(i) != Some(&e.object)
                || spec.attributes_of(e.object).first().copied() != e.attribute
            {
                return Err(contract(format!("entity {i} ids disagree with its labels")));
            }
        }
        Ok(spec)
    }

    /// Entity a subject belongs to.
    pub fn entity_of(&self, spec: &PromptSpec, subject: SubjectId) -> Option<usize> {
        let object = match spec.subject(subject)?.kind {
            SubjectKind::Object => subject,
            SubjectKind::Attribute { object } => object,
        };
        self.entities.iter().position(|e| e.object == object)
    }

    pub fn check(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 {
            return Err(contract("scene grid is empty"));
        }
        if self.entities.is_empty() {
            return Err(contract("scene has no entities"));
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return Err(contract(format!("overlap {} outside [0, 1]", self.overlap)));
        }
        if !(self.attn_sigma > 0.0) {
            return Err(contract("attn_sigma must be > 0"));
        }
        if self.blocks == 0 || self.heads == 0 {
            return Err(contract(
                "at least one attention block and head is required",
            ));
        }
        for (i, e) in self.entities.iter().enumerate() {
            let (r, c) = e.center;
            if !(0.0..self.height as f64).contains(&r) || !(0.0..self.width as f64).contains(&c) {
                return Err(contract(format!("entity {i} centre outside the grid")));
            }
            if !(e.radius > 0.0) {
                return Err(contract(format!("entity {i} radius must be > 0")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let scene: SceneSpec = serde_json::from_str(text)?;
        scene.check()?;
        Ok(scene)
    }
}

/// Scene generation knobs. Defaults are the desk-scale benchmark setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneParams {
    pub height: usize,
    pub width: usize,
    pub n_objects: usize,
    #[serde(rename = "lambda")]
    pub overlap: f64,
    /// Minimum centre distance as a fraction of `min(height, width)`.
    pub spacing: f64,
    /// Entity radius as a fraction of `min(height, width)`.
    pub radius: f64,
    pub attn_sigma: f64,
    pub anchor_radius: usize,
    pub anchor_weight: f64,
    pub margin: f64,
    /// Background-cell margin as a multiple of `margin`.
    pub background: f64,
    pub leak_gain: f64,
    /// Logit noise as a multiple of `margin`.
    pub noise: f64,
    pub blocks: usize,
    pub heads: usize,
    pub head_spread: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            height: 16,
            width: 16,
            n_objects: 2,
            overlap: 0.7,
            spacing: 0.45,
            radius: 0.2,
            attn_sigma: 6.0,
            anchor_radius: 2,
            anchor_weight: 12.0,
            margin: 2.0,
            background: 1.0,
            leak_gain: 1.5,
            noise: 0.5,
            blocks: 4,
            heads: 8,
            head_spread: 0.2,
        }
    }
}

impl SceneParams {
    pub fn noise_sigma(&self) -> f64 {
        self.noise * self.margin
    }
}

const PLACEMENT_ATTEMPTS: usize = 10_000;

/// Places `n_objects` entities with pairwise centre distance at least
/// `spacing * min(H, W)` and returns the scene with its prompt.
pub fn gen_scene<R: Rng + ?Sized>(
    rng: &mut R,
    params: &SceneParams,
) -> Result<(SceneSpec, PromptSpec)> {
    let (h, w) = (params.height, params.width);
    if params.n_objects == 0 {
        return Err(Error::Placement("at least one object is required".into()));
    }
    if h < 2 || w < 2 {
        return Err(Error::Placement(format!("grid {h}x{w} is too small")));
    }
    let side = h.min(w) as f64;
    let min_dist = params.spacing * side;
    let radius = (params.radius * side).max(0.5);
    if params.n_objects > 1 && 2.0 * radius > min_dist {
        // Overlapping discs would make the ground truth itself look mixed.
        return Err(Error::Placement(format!(
            "radius {radius:.2} is more than half the spacing {min_dist:.2}"
        )));
    }

    let mut centers: Vec<(f64, f64)> = Vec::with_capacity(params.n_objects);
    let mut attempts = 0;
    while centers.len() < params.n_objects {
        attempts += 1;
        if attempts > PLACEMENT_ATTEMPTS {
            return Err(Error::Placement(format!(
                "could not place {} objects {min_dist:.2} apart on {h}x{w} after {PLACEMENT_ATTEMPTS} draws",
                params.n_objects
            )));
        }
        let c = (rng.random_range(0..h) as f64, rng.random_range(0..w) as f64);
        if centers
            .iter()
            .all(|o| ((o.0 - c.0).powi(2) + (o.1 - c.1).powi(2)).sqrt() >= min_dist)
        {
            centers.push(c);
        } else if !centers.is_empty() && attempts % 200 == 0 {
            // Restart from scratch so an unlucky early centre cannot block the rest.
            centers.clear();
        }
    }

    let entries: Vec<ObjectEntry> = (0..params.n_objects)
        .map(|i| ObjectEntry {
            label: label(&OBJECT_LABELS, i),
            attributes: vec![label(&ATTRIBUTE_LABELS, i)],
        })
        .collect();
    let prompt = build_prompt_spec(&entries)?;

    let entities = centers
        .into_iter()
        .enumerate()
        .map(|(i, center)| {
            let object = prompt.objects[i];
            Entity {
                object,
                attribute: prompt.attributes_of(object).first().copied(),
                object_label: entries[i].label.clone(),
                attribute_label: entries[i].attributes.first().cloned(),
                center,
                radius,
            }
        })
        .collect();

    let scene = SceneSpec {
        height: h,
        width: w,
        entities,
        overlap: params.overlap,
        attn_sigma: params.attn_sigma,
        anchor_radius: params.anchor_radius,
        anchor_weight: params.anchor_weight,
        margin: params.margin,
        leak_gain: params.leak_gain,
        noise_sigma: params.noise_sigma(),
        blocks: params.blocks,
        heads: params.heads,
        head_spread: params.head_spread,
        background_margin: params.background * params.margin,
    };
    scene.check()?;
    Ok((scene, prompt))
}

fn label(pool: &[&str], i: usize) -> String {
    if i < pool.len() {
        pool[i].to_string()
    } else {
        format!("{}{}", pool[i % pool.len()], i / pool.len())
    }
}

fn entity_attention(scene: &SceneSpec, own: usize, sigma: f64) -> Grid<f64> {
    let mut values = Vec::with_capacity(scene.height * scene.width);
    for r in 0..scene.height {
        for c in 0..scene.width {
            let p = Pos::new(r, c);
            let mut v = scene.bump(own, p, sigma);
            for e in (0..scene.entities.len()).filter(|e| *e != own) {
                v += scene.overlap * scene.bump(e, p, sigma);
            }
            values.push(v);
        }
    }
    rescale_unit(&mut values);
    Grid::from_vec(scene.height, scene.width, values).expect("dims match by construction")
}

/// Attention of image tokens to `subject`: its own entity's bump plus
/// `overlap` times every other entity's bump, min-max rescaled.
pub fn mock_attention(
    scene: &SceneSpec,
    spec: &PromptSpec,
    subject: SubjectId,
) -> Result<Grid<f64>> {
    let own = scene
        .entity_of(spec, subject)
        .ok_or_else(|| contract(format!("subject {subject} is not part of the scene")))?;
    Ok(entity_attention(scene, own, scene.attn_sigma))
}

/// Per-(block, head) raw attention. Each slice uses its own bump width,
/// spread evenly over `attn_sigma * (1 ± head_spread)`.
pub fn mock_attention_slices(scene: &SceneSpec, spec: &PromptSpec) -> Result<Vec<AttentionSlice>> {
    let owners = spec
        .subjects
        .iter()
        .map(|s| {
            scene
                .entity_of(spec, s.id)
                .ok_or_else(|| contract(format!("subject {} is not part of the scene", s.id)))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = scene.blocks * scene.heads;
    Ok((0..n)
        .map(|i| {
            let u = if n == 1 {
                0.0
            } else {
                2.0 * i as f64 / (n - 1) as f64 - 1.0
            };
            let sigma = scene.attn_sigma * (1.0 + scene.head_spread * u);
            owners
                .iter()
                .map(|&e| entity_attention(scene, e, sigma))
                .collect()
        })
        .collect())
}

/// Logits of the mock model for the current grid state.
///
/// `base + anchor + noise`, where `base` gives the ground-truth token a margin
/// `m`, and competing tokens (other entities, and this entity's
/// wrong-attribute variant) `leak_gain * overlap * m * bump_e(p)` for every
/// other entity `e`. `anchor(p, v)` is `anchor_weight` times the fraction of
/// the Chebyshev neighbourhood already committed to `v`.
pub fn mock_logits<R: Rng + ?Sized>(
    scene: &SceneSpec,
    state: &GridState,
    rng: &mut R,
) -> Result<Logits> {
    let (h, w) = (scene.height, scene.width);
    state.tokens.ensure_dims(h, w, "grid state")?;
    let vocab = scene.vocab_size();
    let mut logits = Logits::zeros(h, w, vocab);
    let leak = scene.leak_gain * scene.overlap * scene.margin;
    let r = scene.anchor_radius as isize;
    let hood = ((2 * r + 1) * (2 * r + 1) - 1).max(1) as f64;
    let noise = if scene.noise_sigma > 0.0 {
        Some(Normal::new(0.0, scene.noise_sigma).map_err(|e| contract(e.to_string()))?)
    } else {
        None
    };

    for row in 0..h {
        for col in 0..w {
            let p = Pos::new(row, col);
            let owner = scene.owner(p);
            let cell = logits.at_mut(p);

            match owner {
                Some(o) => cell[scene.correct_token(o) as usize] += scene.margin,
                None => cell[BACKGROUND as usize] += scene.background_margin,
            }
            for e in 0..scene.entities.len() {
                if Some(e) == owner {
                    continue;
                }
                let amb = leak * scene.bump(e, p, scene.attn_sigma);
                cell[scene.correct_token(e) as usize] += amb;
                if let Some(o) = owner {
                    cell[scene.wrong_token(o) as usize] += amb;
                }
            }

            if scene.anchor_weight != 0.0 && r > 0 {
                for dr in -r..=r {
                    for dc in -r..=r {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let (nr, nc) = (row as isize + dr, col as isize + dc);
                        if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                            continue;
                        }
                        let q = Pos::new(nr as usize, nc as usize);
                        if !state.masked[q] {
                            cell[state.tokens[q] as usize] += scene.anchor_weight / hood;
                        }
                    }
                }
            }

            if let Some(dist) = &noise {
                for v in cell.iter_mut() {
                    *v += dist.sample(rng);
                }
            }
        }
    }
    Ok(logits)
}

/// The mock model bound to one scene and noise seed.
#[derive(Clone, Debug)]
pub struct SynthModel {
    pub scene: SceneSpec,
    pub seed: u64,
}

impl SynthModel {
    pub fn new(scene: SceneSpec, seed: u64) -> Result<Self> {
        scene.check()?;
        Ok(Self { scene, seed })
    }
}

impl MaskedModel for SynthModel {
    fn dims(&self) -> (usize, usize) {
        (self.scene.height, self.scene.width)
    }

    fn query(&self, spec: &PromptSpec, state: &GridState, t: usize) -> Result<ModelOutput> {
        // Noise depends only on (seed, t) so repeated queries agree.
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(t as u64);
        let logits = mock_logits(&self.scene, state, &mut rng)?;
        let attention = mock_attention_slices(&self.scene, spec)?;
        Ok(ModelOutput { logits, attention })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guidance::aggregate_attention;

    fn quiet(params: SceneParams) -> SceneParams {
        SceneParams {
            overlap: 0.0,
            noise: 0.0,
            ..params
        }
    }

    fn scene(seed: u64, params: &SceneParams) -> (SceneSpec, PromptSpec) {
        gen_scene(&mut ChaCha8Rng::seed_from_u64(seed), params).unwrap()
    }

    #[test]
    fn single_object_scene_has_no_negatives() {
        let params = SceneParams {
            n_objects: 1,
            ..SceneParams::default()
        };
        let (scene, prompt) = scene(3, &params);
        assert_eq!(scene.entities.len(), 1);
        assert!(prompt.negative_pairs[&prompt.objects[0]].is_empty());
        assert_eq!(scene.prompt().unwrap(), prompt);
    }

    #[test]
    fn placement_respects_spacing() {
        let params = SceneParams::default();
        for seed in 0..100 {
            let (scene, _) = scene(seed, &params);
            let (a, b) = (&scene.entities[0], &scene.entities[1]);
            let d = ((a.center.0 - b.center.0).powi(2) + (a.center.1 - b.center.1).powi(2)).sqrt();
            assert!(d >= params.spacing * 16.0, "seed {seed}: distance {d}");
        }
    }

    #[test]
    fn infeasible_placement_errors() {
        let params = SceneParams {
            n_objects: 5,
            spacing: 0.9,
            ..SceneParams::default()
        };
        let err = gen_scene(&mut ChaCha8Rng::seed_from_u64(0), &params);
        assert!(matches!(err, Err(Error::Placement(_))));
    }

    #[test]
    fn overlapping_discs_are_rejected() {
        let params = SceneParams {
            spacing: 0.3,
            radius: 0.2,
            ..SceneParams::default()
        };
        let err = gen_scene(&mut ChaCha8Rng::seed_from_u64(0), &params);
        assert!(matches!(err, Err(Error::Placement(_))));
    }

    #[test]
    fn generation_is_deterministic() {
        let params = SceneParams::default();
        assert_eq!(scene(42, &params), scene(42, &params));
    }

    #[test]
    fn scene_json_round_trip() {
        let (s, _) = scene(5, &SceneParams::default());
        assert_eq!(SceneSpec::from_json(&s.to_json().unwrap()).unwrap(), s);
    }

    #[test]
    fn attention_without_leakage_peaks_at_own_centre() {
        let (scene, prompt) = scene(1, &quiet(SceneParams::default()));
        for (i, e) in scene.entities.iter().enumerate() {
            let m = mock_attention(&scene, &prompt, e.object).unwrap();
            let (best, _) = m
                .as_slice()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap();
            let p = m.pos_of(best);
            assert_eq!((p.row as f64, p.col as f64), e.center, "entity {i}");
            assert!(m.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn full_leakage_is_symmetric_between_centres() {
        let params = SceneParams {
            overlap: 1.0,
            ..SceneParams::default()
        };
        let (scene, prompt) = scene(2, &params);
        let m = mock_attention(&scene, &prompt, scene.entities[0].object).unwrap();
        let at = |e: &Entity| m[Pos::new(e.center.0 as usize, e.center.1 as usize)];
        assert!((at(&scene.entities[0]) - at(&scene.entities[1])).abs() < 1e-12);
    }

    #[test]
    fn half_leakage_at_other_centre() {
        // Centres 8 apart, sigma 2: bump(8) = exp(-8), tiny next to the
        // leaked 0.5, so the other centre sees ~half the own-centre value.
        let mut s = scene(0, &SceneParams::default()).0;
        s.overlap = 0.5;
        s.attn_sigma = 2.0;
        s.entities[0].center = (4.0, 4.0);
        s.entities[1].center = (4.0, 12.0);
        let own = s.bump(0, Pos::new(4, 4), 2.0) + 0.5 * s.bump(1, Pos::new(4, 4), 2.0);
        let other = s.bump(0, Pos::new(4, 12), 2.0) + 0.5 * s.bump(1, Pos::new(4, 12), 2.0);
        assert!((other / own - 0.5).abs() < 1e-3, "{}", other / own);
    }

    #[test]
    fn noise_free_logits_favour_ground_truth() {
        let (scene, _) = scene(4, &quiet(SceneParams::default()));
        let state = GridState::all_masked(16, 16);
        let logits = mock_logits(&scene, &state, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let gt = scene.ground_truth();
        for p in gt.positions() {
            let row = logits.at(p);
            let best = (0..row.len())
                .max_by(|a, b| row[*a].total_cmp(&row[*b]))
                .unwrap();
            assert_eq!(best as TokenId, gt[p], "{p:?}");
        }
    }

    #[test]
    fn anchor_vote_counts_neighbours() {
        let (scene, _) = scene(
            4,
            &quiet(SceneParams {
                anchor_radius: 1,
                ..SceneParams::default()
            }),
        );
        let mut state = GridState::all_masked(16, 16);
        let target = Pos::new(8, 8);
        let v = 3;
        let before = mock_logits(&scene, &state, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for p in [Pos::new(7, 7), Pos::new(7, 8), Pos::new(9, 9)] {
            state.commit(p, v).unwrap();
        }
        let after = mock_logits(&scene, &state, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let delta = after.at(target)[v as usize] - before.at(target)[v as usize];
        assert!((delta - scene.anchor_weight * 3.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn model_query_is_deterministic() {
        let (scene, prompt) = scene(9, &SceneParams::default());
        let model = SynthModel::new(scene, 17).unwrap();
        let state = GridState::all_masked(16, 16);
        let a = model.query(&prompt, &state, 3).unwrap();
        let b = model.query(&prompt, &state, 3).unwrap();
        assert_eq!(a.logits, b.logits);
        assert_eq!(a.attention.len(), 32);
        assert_eq!(a.attention, b.attention);
        let c = model.query(&prompt, &state, 4).unwrap();
        assert_ne!(a.logits, c.logits);
    }

    #[test]
    fn uniform_heads_aggregate_to_canonical_map() {
        let mut s = scene(6, &SceneParams::default()).0;
        s.head_spread = 0.0;
        let prompt = s.prompt().unwrap();
        let maps = aggregate_attention(&mock_attention_slices(&s, &prompt).unwrap(), 1).unwrap();
        for subject in &prompt.subjects {
            let direct = mock_attention(&s, &prompt, subject.id).unwrap();
            let agg = &maps.maps[subject.id.0];
            for (a, b) in agg.as_slice().iter().zip(direct.as_slice()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unknown_subject_is_rejected() {
        let (scene, prompt) = scene(1, &SceneParams::default());
        assert!(mock_attention(&scene, &prompt, SubjectId(99)).is_err());
    }
}
