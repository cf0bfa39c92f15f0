//! Synthetic sensory environments with a known, finite set of external states.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, shape, Result};
use crate::infotheory::ProbabilityVector;
use crate::models::EncoderModel;
use crate::rng::{self, Stream};

/// One labeled observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub obs: Vec<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoolFunction {
    Xor,
    And,
    Or,
    Nand,
    /// Constant false: a single-label world.
    False,
}

impl BoolFunction {
    pub fn eval(self, a: bool, b: bool) -> bool {
        match self {
            BoolFunction::Xor => a ^ b,
            BoolFunction::And => a && b,
            BoolFunction::Or => a || b,
            BoolFunction::Nand => !(a && b),
            BoolFunction::False => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Circle,
    Triangle,
    Square,
}

/// World definitions. Interval worlds sample a scalar position uniformly
/// over `domain`; label 1 is habitable ("friendly"), label 0 hostile, so the
/// class prior is the habitable fraction of the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WorldKind {
    TwoState { domain: (f64, f64), habitable: (f64, f64) },
    MultiInterval { domain: (f64, f64), habitable: Vec<(f64, f64)> },
    Logic {
        function: BoolFunction,
        #[serde(default)]
        jitter: f64,
        #[serde(default)]
        exhaustive_corners: bool,
    },
    GaussianMixture { means: Vec<Vec<f64>>, std_dev: f64, priors: Vec<f64> },
    Shape {
        #[serde(default = "default_raster")]
        size: usize,
        classes: Vec<ShapeKind>,
        #[serde(default)]
        jitter: bool,
    },
}

fn default_raster() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    #[serde(flatten)]
    pub kind: WorldKind,
    #[serde(default)]
    pub seed: u64,
}

impl World {
    pub fn new(kind: WorldKind, seed: u64) -> Result<Self> {
        let w = Self { kind, seed };
        w.validate()?;
        Ok(w)
    }

    /// Two-state world on a habitable interval `[0, 1]` whose habitable share
    /// of the domain is `p_habitable`; the hostile remainder is split evenly
    /// on both sides.
    pub fn two_state(p_habitable: f64, seed: u64) -> Result<Self> {
        if !(p_habitable > 0.0 && p_habitable <= 1.0) {
            return Err(invalid("habitable share must lie in (0, 1]"));
        }
        let margin = (1.0 / p_habitable - 1.0) / 2.0;
        Self::new(WorldKind::TwoState { domain: (-margin, 1.0 + margin), habitable: (0.0, 1.0) }, seed)
    }

    pub fn xor(exhaustive_corners: bool, jitter: f64, seed: u64) -> Result<Self> {
        Self::new(WorldKind::Logic { function: BoolFunction::Xor, jitter, exhaustive_corners }, seed)
    }

    /// Two isotropic Gaussians at `-offset` and `+offset` in every coordinate.
    pub fn two_gaussians(dim: usize, offset: f64, seed: u64) -> Result<Self> {
        Self::new(
            WorldKind::GaussianMixture {
                means: alloc::vec![alloc::vec![-offset; dim], alloc::vec![offset; dim]],
                std_dev: 1.0,
                priors: alloc::vec![0.5, 0.5],
            },
            seed,
        )
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            WorldKind::TwoState { domain, habitable } => {
                check_intervals(*domain, core::slice::from_ref(habitable))
            }
            WorldKind::MultiInterval { domain, habitable } => check_intervals(*domain, habitable),
            WorldKind::Logic { jitter, .. } => {
                if !(jitter.is_finite() && *jitter >= 0.0) {
                    return Err(invalid("jitter must be finite and non-negative"));
                }
                Ok(())
            }
            WorldKind::GaussianMixture { means, std_dev, priors } => {
                let dim = means.first().map_or(0, Vec::len);
                if means.is_empty() || dim == 0 || means.iter().any(|m| m.len() != dim) {
                    return Err(shape("mixture means must share one positive dimension"));
                }
                if priors.len() != means.len() {
                    return Err(shape("one prior per mixture component"));
                }
                if !(std_dev.is_finite() && *std_dev > 0.0) {
                    return Err(invalid("std_dev must be positive"));
                }
                ProbabilityVector::new(priors.clone()).map(|_| ())
            }
            WorldKind::Shape { size, classes, .. } => {
                if *size < 6 || classes.is_empty() {
                    return Err(invalid("shape world needs size >= 6 and at least one class"));
                }
                Ok(())
            }
        }
    }

    pub fn observation_dim(&self) -> usize {
        match &self.kind {
            WorldKind::TwoState { .. } | WorldKind::MultiInterval { .. } => 1,
            WorldKind::Logic { .. } => 2,
            WorldKind::GaussianMixture { means, .. } => means[0].len(),
            WorldKind::Shape { size, .. } => size * size,
        }
    }

    pub fn label_count(&self) -> usize {
        match &self.kind {
            WorldKind::TwoState { .. } | WorldKind::MultiInterval { .. } | WorldKind::Logic { .. } => 2,
            WorldKind::GaussianMixture { means, .. } => means.len(),
            WorldKind::Shape { classes, .. } => classes.len(),
        }
    }

    /// Prior over external states, indexed by label.
    pub fn class_priors(&self) -> ProbabilityVector {
        let p = match &self.kind {
            WorldKind::TwoState { domain, habitable } => {
                let h = habitable_share(*domain, core::slice::from_ref(habitable));
                alloc::vec![1.0 - h, h]
            }
            WorldKind::MultiInterval { domain, habitable } => {
                let h = habitable_share(*domain, habitable);
                alloc::vec![1.0 - h, h]
            }
            WorldKind::Logic { function, .. } => {
                let t = [(false, false), (false, true), (true, false), (true, true)]
                    .iter()
                    .filter(|(a, b)| function.eval(*a, *b))
                    .count() as f64
                    / 4.0;
                alloc::vec![1.0 - t, t]
            }
            WorldKind::GaussianMixture { priors, .. } => priors.clone(),
            WorldKind::Shape { classes, .. } => {
                alloc::vec![1.0 / classes.len() as f64; classes.len()]
            }
        };
        ProbabilityVector::new(p).expect("validated world priors")
    }

    /// External state of a scalar position (interval worlds only).
    pub fn is_habitable(&self, x: f64) -> Option<bool> {
        let inside = |iv: &(f64, f64)| iv.0 <= x && x <= iv.1;
        match &self.kind {
            WorldKind::TwoState { habitable, .. } => Some(inside(habitable)),
            WorldKind::MultiInterval { habitable, .. } => Some(habitable.iter().any(inside)),
            _ => None,
        }
    }

    pub fn sample(&self, n: usize) -> Vec<Sample> {
        sample_world(self, n, self.seed)
    }
}

fn check_intervals(domain: (f64, f64), habitable: &[(f64, f64)]) -> Result<()> {
    let ok = |iv: (f64, f64)| iv.0.is_finite() && iv.1.is_finite() && iv.0 < iv.1;
    if !ok(domain) || habitable.is_empty() || !habitable.iter().all(|&iv| ok(iv)) {
        return Err(invalid("intervals must be finite with lo < hi"));
    }
    if habitable.iter().any(|iv| iv.0 < domain.0 || iv.1 > domain.1) {
        return Err(invalid("habitable intervals must lie inside the domain"));
    }
    let mut sorted = habitable.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if sorted.windows(2).any(|w| w[1].0 < w[0].1) {
        return Err(invalid("habitable intervals must not overlap"));
    }
    Ok(())
}

fn habitable_share(domain: (f64, f64), habitable: &[(f64, f64)]) -> f64 {
    habitable.iter().map(|iv| iv.1 - iv.0).sum::<f64>() / (domain.1 - domain.0)
}

fn draw_label(s: &mut Stream, priors: &[f64]) -> usize {
    let u: f64 = s.random();
    let mut acc = 0.0;
    for (i, p) in priors.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    priors.len() - 1
}

/// `n` i.i.d. labeled draws; deterministic in `seed`.
///
/// With `exhaustive_corners`, a logic world cycles through the truth table
/// `(0,0), (0,1), (1,0), (1,1)` instead of drawing corners at random.
pub fn sample_world(w: &World, n: usize, seed: u64) -> Vec<Sample> {
    let mut s = rng::stream(rng::split(seed, "sample", 0));
    (0..n)
        .map(|i| match &w.kind {
            WorldKind::TwoState { domain, .. } | WorldKind::MultiInterval { domain, .. } => {
                let x = s.random_range(domain.0..=domain.1);
                let label = usize::from(w.is_habitable(x).unwrap_or(false));
                Sample { obs: alloc::vec![x], label }
            }
            WorldKind::Logic { function, jitter, exhaustive_corners } => {
                let corner = if *exhaustive_corners { i % 4 } else { s.random_range(0..4) };
                let (a, b) = (corner & 2 != 0, corner & 1 != 0);
                let mut obs = alloc::vec![f64::from(u8::from(a)), f64::from(u8::from(b))];
                if *jitter > 0.0 {
                    for o in &mut obs {
                        let z: f64 = StandardNormal.sample(&mut s);
                        *o += jitter * z;
                    }
                }
                Sample { obs, label: usize::from(function.eval(a, b)) }
            }
            WorldKind::GaussianMixture { means, std_dev, priors } => {
                let label = draw_label(&mut s, priors);
                let obs = means[label]
                    .iter()
                    .map(|m| {
                        let z: f64 = StandardNormal.sample(&mut s);
                        m + std_dev * z
                    })
                    .collect();
                Sample { obs, label }
            }
            WorldKind::Shape { size, classes, jitter } => {
                let label = s.random_range(0..classes.len());
                Sample { obs: render_shape(classes[label], *size, *jitter, &mut s), label }
            }
        })
        .collect()
}

/// Binary raster, flattened row-major.
fn render_shape(kind: ShapeKind, size: usize, jitter: bool, s: &mut Stream) -> Vec<f64> {
    let half = size as f64 / 2.0 - 0.5;
    let (dy, dx, scale) = if jitter {
        (s.random_range(-1.0..=1.0), s.random_range(-1.0..=1.0), s.random_range(0.8..=1.0))
    } else {
        (0.0, 0.0, 1.0)
    };
    let (cy, cx) = (half + dy, half + dx);
    let r = (size as f64 * 0.3) * scale;
    let mut img = alloc::vec![0.0; size * size];
    for row in 0..size {
        for col in 0..size {
            let (y, x) = (row as f64 - cy, col as f64 - cx);
            let inside = match kind {
                ShapeKind::Circle => x * x + y * y <= r * r,
                ShapeKind::Square => x.abs() <= r * 0.6 && y.abs() <= r * 0.6,
                // apex at the top, base at the bottom
                ShapeKind::Triangle => y >= -r && y <= r && x.abs() <= (y + r) / 2.0,
            };
            if inside {
                img[row * size + col] = 1.0;
            }
        }
    }
    img
}

/// Episode parameters for the survival simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalParams {
    /// Consecutive hostile steps tolerated; one more is fatal.
    pub endurance: usize,
    /// A move is uniform in `[-move_range, move_range]`.
    pub move_range: f64,
}

impl Default for SurvivalParams {
    fn default() -> Self {
        Self { endurance: 3, move_range: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalOutcome {
    pub steps_survived: usize,
    pub alive_at_end: bool,
    pub trajectory_length: f64,
}

fn reflect(mut x: f64, lo: f64, hi: f64) -> f64 {
    for _ in 0..8 {
        if x < lo {
            x = 2.0 * lo - x;
        } else if x > hi {
            x = 2.0 * hi - x;
        } else {
            return x;
        }
    }
    x.clamp(lo, hi)
}

/// One episode of the response policy "friendly: stay; else move a random
/// distance in a random direction".
///
/// The agent starts at a uniform position in the domain. After each step it
/// dies once it has spent more than `endurance` consecutive steps in hostile
/// ground; `steps_survived` counts the steps completed before that.
pub fn survival_sim(
    w: &World,
    model: &EncoderModel,
    max_steps: usize,
    seed: u64,
    params: &SurvivalParams,
) -> Result<SurvivalOutcome> {
    let domain = match &w.kind {
        WorldKind::TwoState { domain, .. } => *domain,
        _ => return Err(invalid("survival runs on a two-state world")),
    };
    if model.state_count() != 2 || model.arch.input_dim != 1 {
        return Err(shape(format!(
            "survival needs a binary model over a scalar observation, got {} states over {} inputs",
            model.state_count(),
            model.arch.input_dim
        )));
    }
    let mut s = rng::stream(rng::split(seed, "survival", 0));
    let mut x = s.random_range(domain.0..=domain.1);
    let mut hostile_run = 0;
    let mut travelled = 0.0;
    for step in 0..max_steps {
        let friendly = model.encode(&[x], rng::split(seed, "survival-encode", step as u64))? == 1;
        if !friendly {
            let d = s.random_range(-1.0..=1.0) * params.move_range;
            let next = reflect(x + d, domain.0, domain.1);
            travelled += (next - x).abs();
            x = next;
        }
        if w.is_habitable(x) == Some(true) {
            hostile_run = 0;
        } else {
            hostile_run += 1;
            if hostile_run > params.endurance {
                return Ok(SurvivalOutcome {
                    steps_survived: step,
                    alive_at_end: false,
                    trajectory_length: travelled,
                });
            }
        }
    }
    Ok(SurvivalOutcome { steps_survived: max_steps, alive_at_end: true, trajectory_length: travelled })
}

/// Outcomes of `episodes` seeded episodes; episode `i` uses
/// `split(seed, "episode", i)`.
pub fn survival_batch(
    w: &World,
    model: &EncoderModel,
    episodes: usize,
    max_steps: usize,
    seed: u64,
    params: &SurvivalParams,
) -> Result<Vec<SurvivalOutcome>> {
    (0..episodes as u64)
        .map(|i| survival_sim(w, model, max_steps, rng::split(seed, "episode", i), params))
        .collect()
}

/// Mean `steps_survived`; `0` for no episodes.
pub fn mean_survival(outcomes: &[SurvivalOutcome]) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    outcomes.iter().map(|o| o.steps_survived as f64).sum::<f64>() / outcomes.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn two_state_priors_match_geometry() {
        let w = World::two_state(0.7, 1).unwrap();
        let p = w.class_priors();
        assert!((p.probs()[1] - 0.7).abs() < 1e-12);
        let samples = w.sample(100_000);
        let hab = samples.iter().filter(|s| s.label == 1).count() as f64 / 1e5;
        assert!((hab - 0.7).abs() < 0.01, "habitable frequency {hab}");
    }

    #[test]
    fn xor_corners_truth_table() {
        let w = World::xor(true, 0.0, 3).unwrap();
        let s = w.sample(4);
        let obs: Vec<_> = s.iter().map(|s| s.obs.clone()).collect();
        assert_eq!(obs, vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(s.iter().map(|s| s.label).collect::<Vec<_>>(), vec![0, 1, 1, 0]);
    }

    #[test]
    fn sampling_is_deterministic() {
        let w = World::two_gaussians(3, 1.0, 5).unwrap();
        assert_eq!(sample_world(&w, 50, 9), sample_world(&w, 50, 9));
        assert_ne!(sample_world(&w, 50, 9), sample_world(&w, 50, 10));
    }

    #[test]
    fn shape_rasters_differ_by_class() {
        let w = World::new(
            WorldKind::Shape {
                size: 8,
                classes: vec![ShapeKind::Circle, ShapeKind::Triangle, ShapeKind::Square],
                jitter: false,
            },
            0,
        )
        .unwrap();
        let s = w.sample(60);
        assert!(s.iter().all(|s| s.obs.len() == 64));
        let mass = |label: usize| s.iter().find(|s| s.label == label).map(|s| s.obs.iter().sum::<f64>());
        let (c, t, q) = (mass(0).unwrap(), mass(1).unwrap(), mass(2).unwrap());
        assert!(c != t && t != q && c != q, "{c} {t} {q}");
    }

    #[test]
    fn invalid_worlds_rejected() {
        assert!(World::new(WorldKind::TwoState { domain: (0.0, 1.0), habitable: (0.5, 2.0) }, 0).is_err());
        assert!(World::new(
            WorldKind::MultiInterval { domain: (0.0, 10.0), habitable: vec![(1.0, 3.0), (2.0, 4.0)] },
            0
        )
        .is_err());
        assert!(World::new(
            WorldKind::GaussianMixture { means: vec![vec![0.0]], std_dev: 1.0, priors: vec![0.5] },
            0
        )
        .is_err());
    }

    #[test]
    fn survival_examples() {
        let w = World::two_state(0.7, 0).unwrap();
        let fit = EncoderModel::threshold(&[(0.0, 1.0)], 1, 0.0).unwrap();
        let out = survival_sim(&w, &fit, 0, 1, &SurvivalParams::default()).unwrap();
        assert_eq!(out.steps_survived, 0);
        assert!(out.alive_at_end);

        // find a seed whose start is habitable: a fit agent never moves again
        let seed = (0..100)
            .find(|&sd| {
                let mut s = rng::stream(rng::split(sd, "survival", 0));
                let x: f64 = s.random_range(-0.2142857142857143..=1.2142857142857142);
                (0.0..=1.0).contains(&x)
            })
            .unwrap();
        let out = survival_sim(&w, &fit, 200, seed, &SurvivalParams::default()).unwrap();
        assert!(out.alive_at_end);
        assert_eq!(out.steps_survived, 200);
        assert_eq!(out.trajectory_length, 0.0);
    }

    #[test]
    fn survival_rejects_wrong_inputs() {
        let xor = World::xor(false, 0.0, 0).unwrap();
        let fit = EncoderModel::threshold(&[(0.0, 1.0)], 1, 0.0).unwrap();
        assert!(survival_sim(&xor, &fit, 10, 0, &SurvivalParams::default()).is_err());
        let w = World::two_state(0.7, 0).unwrap();
        let wide = EncoderModel::threshold(&[(0.0, 1.0), (0.0, 1.0)], 1, 0.0).unwrap();
        assert!(matches!(
            survival_sim(&w, &wide, 10, 0, &SurvivalParams::default()),
            Err(crate::Error::Shape(_))
        ));
    }

    #[test]
    fn reflect_stays_in_domain() {
        for x in [-3.0, -0.1, 0.5, 1.2, 7.9] {
            let r = reflect(x, 0.0, 1.0);
            assert!((0.0..=1.0).contains(&r), "{x} -> {r}");
        }
    }
}
