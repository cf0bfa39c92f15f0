//! Latent maps and the grid estimate of the strong-intersection region.
//!
//! The latent bounding box is cut into `resolution` cells per axis. A cell is
//! mixed when the share of samples outside its majority class reaches the
//! threshold, and `mu_X` is mixed occupied cells over occupied cells.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{degenerate, invalid, shape, Error, Result};
use crate::exec::Executor;
use crate::models::{Architecture, EncoderModel, GenerativeModel};
use crate::rng;
use crate::training::{generative_accuracy, initialize_generative, train_local_search, Objective, TrainBudget, Trainable};
use crate::worlds::{sample_world, Sample, World};

pub const DEFAULT_RESOLUTION: usize = 32;
pub const DEFAULT_BETA_RATIO: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentSample {
    pub coords: Vec<f64>,
    pub label: usize,
}

/// Latent image of every sample, order preserved.
pub fn latent_map(encoder: &EncoderModel, samples: &[Sample]) -> Result<Vec<LatentSample>> {
    if samples.is_empty() {
        return Err(Error::EmptyEvidence);
    }
    samples
        .iter()
        .map(|s| Ok(LatentSample { coords: encoder.latent(&s.obs)?, label: s.label }))
        .collect()
}

/// Cell grid over latent space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub resolution: usize,
    /// Explicit `(lower, upper)` corners; the sample bounding box otherwise.
    #[serde(default)]
    pub bounds: Option<(Vec<f64>, Vec<f64>)>,
}

impl GridSpec {
    pub fn new(resolution: usize) -> Self {
        Self { resolution, bounds: None }
    }

    pub fn with_bounds(resolution: usize, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self { resolution, bounds: Some((lower, upper)) }
    }
}

type Cell = Vec<usize>;

struct Gridded {
    /// Per-cell class counts.
    cells: BTreeMap<Cell, BTreeMap<usize, usize>>,
    /// Cell of each sample, in input order.
    assignment: Vec<Cell>,
}

fn grid(latents: &[LatentSample], spec: &GridSpec) -> Result<Gridded> {
    if spec.resolution < 2 {
        return Err(invalid("grid resolution must be at least 2"));
    }
    let dim = latents.first().ok_or(Error::EmptyEvidence)?.coords.len();
    if dim == 0 || latents.iter().any(|l| l.coords.len() != dim) {
        return Err(shape("latent samples must share one positive dimension"));
    }
    if latents.iter().any(|l| l.coords.iter().any(|c| !c.is_finite())) {
        return Err(Error::Numerical("non-finite latent coordinate".into()));
    }
    let (lo, hi) = match &spec.bounds {
        Some((lo, hi)) if lo.len() == dim && hi.len() == dim => (lo.clone(), hi.clone()),
        Some(_) => return Err(shape("grid bounds must match latent dimension")),
        None => {
            let mut lo = alloc::vec![f64::INFINITY; dim];
            let mut hi = alloc::vec![f64::NEG_INFINITY; dim];
            for l in latents {
                for (d, &c) in l.coords.iter().enumerate() {
                    lo[d] = lo[d].min(c);
                    hi[d] = hi[d].max(c);
                }
            }
            (lo, hi)
        }
    };
    let r = spec.resolution;
    let index = |c: f64, d: usize| -> usize {
        let span = hi[d] - lo[d];
        if span <= 0.0 {
            return 0;
        }
        let i = ((c - lo[d]) / span * r as f64).floor();
        if i < 0.0 {
            0
        } else {
            (i as usize).min(r - 1)
        }
    };
    let mut cells: BTreeMap<Cell, BTreeMap<usize, usize>> = BTreeMap::new();
    let mut assignment = Vec::with_capacity(latents.len());
    for l in latents {
        let cell: Cell = l.coords.iter().enumerate().map(|(d, &c)| index(c, d)).collect();
        *cells.entry(cell.clone()).or_default().entry(l.label).or_default() += 1;
        assignment.push(cell);
    }
    Ok(Gridded { cells, assignment })
}

/// Majority class of a cell; ties go to the smallest label.
fn majority(counts: &BTreeMap<usize, usize>) -> (usize, usize) {
    counts.iter().fold((0, 0), |best, (&label, &n)| if n > best.1 { (label, n) } else { best })
}

fn require_classes(latents: &[LatentSample]) -> Result<()> {
    let first = latents.first().ok_or(Error::EmptyEvidence)?.label;
    if latents.iter().all(|l| l.label == first) {
        return Err(degenerate("at least two classes are required"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntermixRegion {
    pub grid_resolution: usize,
    pub mixed_cells: Vec<Vec<usize>>,
    pub occupied_cells: usize,
    pub mu_x: f64,
    pub beta_ratio_threshold: f64,
}

/// Grid estimate of the strong-intersection region and its relative measure.
pub fn intermix_region(
    latents: &[LatentSample],
    spec: &GridSpec,
    beta_ratio_threshold: f64,
) -> Result<IntermixRegion> {
    require_classes(latents)?;
    if !(beta_ratio_threshold > 0.0 && beta_ratio_threshold <= 1.0) {
        return Err(invalid("beta ratio threshold must lie in (0, 1]"));
    }
    let g = grid(latents, spec)?;
    let mixed_cells: Vec<Cell> = g
        .cells
        .iter()
        .filter(|(_, counts)| {
            let total: usize = counts.values().sum();
            let minority = total - majority(counts).1;
            minority as f64 / total as f64 >= beta_ratio_threshold
        })
        .map(|(cell, _)| cell.clone())
        .collect();
    let occupied = g.cells.len();
    Ok(IntermixRegion {
        grid_resolution: spec.resolution,
        mu_x: mixed_cells.len() as f64 / occupied as f64,
        mixed_cells,
        occupied_cells: occupied,
        beta_ratio_threshold,
    })
}

/// `mu_X <= beta (1 - A_min)`.
pub fn lemma_bound_check(mu_x: f64, a_min: f64, beta: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&mu_x) || !(0.0..=1.0).contains(&a_min) || !(beta > 0.0) {
        return Err(invalid("need mu_X, A_min in [0, 1] and beta > 0"));
    }
    Ok(mu_x <= beta * (1.0 - a_min))
}

/// Lower bound `(c / 2) mu_X` on the generative error.
pub fn generative_error_floor(mu_x: f64, c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mu_x) || !(c > 0.0) {
        return Err(invalid("need mu_X in [0, 1] and c > 0"));
    }
    Ok(c / 2.0 * mu_x)
}

/// Cluster purity: the fraction of samples whose cell majority equals their label.
pub fn separation_score(latents: &[LatentSample], k: usize, spec: &GridSpec) -> Result<f64> {
    if k < 2 {
        return Err(degenerate("separation needs at least two classes"));
    }
    require_classes(latents)?;
    let g = grid(latents, spec)?;
    let agree: usize = g.cells.values().map(|counts| majority(counts).1).sum();
    Ok(agree as f64 / latents.len() as f64)
}

/// Decoder that maps each latent grid cell to one class.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLookup {
    spec: GridSpec,
    table: BTreeMap<Cell, usize>,
}

impl CellLookup {
    /// Majority class per occupied cell; the best any lookup decoder can do.
    pub fn majority(latents: &[LatentSample], spec: &GridSpec) -> Result<Self> {
        let g = grid(latents, spec)?;
        let table = g.cells.iter().map(|(c, counts)| (c.clone(), majority(counts).0)).collect();
        Ok(Self { spec: spec.clone(), table })
    }

    pub fn from_table(spec: GridSpec, table: BTreeMap<Vec<usize>, usize>) -> Self {
        Self { spec, table }
    }

    /// Fraction of samples whose cell decodes to a different class.
    pub fn generative_error(&self, latents: &[LatentSample]) -> Result<f64> {
        let g = grid(latents, &self.spec)?;
        let wrong = g
            .assignment
            .iter()
            .zip(latents)
            .filter(|(cell, l)| self.table.get(*cell) != Some(&l.label))
            .count();
        Ok(wrong as f64 / latents.len() as f64)
    }
}

/// Fractional ranks, ties averaged.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = alloc::vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (Pearson correlation of fractional ranks).
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(shape("spearman needs two equal-length series of length >= 2"));
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb) * (y - mb)).sum();
    if va == 0.0 || vb == 0.0 {
        return Err(degenerate("a constant series has no rank correlation"));
    }
    Ok(cov / (va * vb).sqrt())
}

/// Accuracy and conceptualization quality of a trained system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConceptProfile {
    pub accuracy: f64,
    pub conceptualization: f64,
}

/// Share of correct responses when responses are tied to identified types
/// and each type's response is itself correct: the conceptualization score.
pub fn response_correctness(p: &ConceptProfile) -> f64 {
    p.conceptualization
}

/// True when `a` yields at least as many correct responses as `b`.
pub fn prefer(a: &ConceptProfile, b: &ConceptProfile) -> bool {
    response_correctness(a) >= response_correctness(b)
}

/// An ensemble of small autoencoders trained with staggered budgets, so that
/// members span a range of reconstruction quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleConfig {
    pub members: usize,
    pub hidden: Vec<usize>,
    pub latent_dim: usize,
    pub train_samples: usize,
    pub eval_samples: usize,
    /// Member `k` trains for `base_budget + k * budget_step` evaluations.
    pub base_budget: usize,
    pub budget_step: usize,
    pub step_scale: f64,
    pub grid: GridSpec,
    pub beta_ratio: f64,
    /// `beta` of the bound `mu_X <= beta (1 - A)`.
    pub beta: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            members: 20,
            hidden: alloc::vec![4],
            latent_dim: 2,
            train_samples: 200,
            eval_samples: 5000,
            base_budget: 20,
            budget_step: 100,
            step_scale: 0.5,
            grid: GridSpec::new(DEFAULT_RESOLUTION),
            beta_ratio: DEFAULT_BETA_RATIO,
            beta: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub member: usize,
    pub budget: usize,
    pub accuracy: f64,
    pub mu_x: f64,
    pub bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub members: Vec<EnsembleMember>,
    /// Spearman correlation of accuracy against `mu_X`.
    pub correlation: f64,
}

/// Training and evaluation samples shared by every ensemble member.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleData {
    pub arch: Architecture,
    pub train: Vec<Sample>,
    pub eval: Vec<Sample>,
}

impl EnsembleData {
    pub fn new(world: &World, cfg: &EnsembleConfig, seed: u64) -> Result<Self> {
        world.validate()?;
        let arch = Architecture::multilayer(world.observation_dim(), cfg.hidden.clone(), cfg.latent_dim);
        arch.validate()?;
        let train = sample_world(world, cfg.train_samples, rng::split(seed, "ensemble-train", 0));
        let eval = sample_world(world, cfg.eval_samples, rng::split(seed, "ensemble-eval", 0));
        let first = eval.first().ok_or(Error::EmptyEvidence)?.label;
        if eval.iter().all(|s| s.label == first) {
            return Err(degenerate("at least two classes are required"));
        }
        Ok(Self { arch, train, eval })
    }
}

/// Trained autoencoder of member `k`.
pub fn ensemble_member_model(data: &EnsembleData, cfg: &EnsembleConfig, seed: u64, k: usize) -> Result<GenerativeModel> {
    let member_seed = rng::split(seed, "member", k as u64);
    let budget = TrainBudget::new(cfg.base_budget + k * cfg.budget_step, cfg.step_scale, member_seed)?;
    let start = initialize_generative(&data.arch, &data.train, member_seed)?;
    let (trained, _) = train_local_search(&Trainable::Generative(start), &data.train, Objective::GenerativeAccuracy, &budget)?;
    match trained {
        Trainable::Generative(g) => Ok(g),
        Trainable::Encoder(_) => Err(invalid("training changed the model kind")),
    }
}

/// Train every member on one training sample and measure accuracy and
/// `mu_X` on a shared evaluation sample.
pub fn autoencoder_ensemble<E: Executor>(
    world: &World,
    cfg: &EnsembleConfig,
    seed: u64,
    exec: &E,
) -> Result<EnsembleReport> {
    if cfg.members < 2 {
        return Err(invalid("an ensemble needs at least two members"));
    }
    let data = EnsembleData::new(world, cfg, seed)?;
    let xs: Vec<Vec<f64>> = data.eval.iter().map(|s| s.obs.clone()).collect();
    let results = exec.map((0..cfg.members).collect(), |k| -> Result<EnsembleMember> {
        let g = ensemble_member_model(&data, cfg, seed, k)?;
        let accuracy = generative_accuracy(&g, &xs)?;
        let mu_x = intermix_region(&latent_map(&g.encoder, &data.eval)?, &cfg.grid, cfg.beta_ratio)?.mu_x;
        let bound_holds = lemma_bound_check(mu_x, accuracy, cfg.beta)?;
        Ok(EnsembleMember { member: k, budget: cfg.base_budget + k * cfg.budget_step, accuracy, mu_x, bound_holds })
    });
    let members = results.into_iter().collect::<Result<Vec<_>>>()?;
    let acc: Vec<f64> = members.iter().map(|m| m.accuracy).collect();
    let mu: Vec<f64> = members.iter().map(|m| m.mu_x).collect();
    let correlation = spearman(&acc, &mu)?;
    Ok(EnsembleReport { members, correlation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::GenerativeModel;
    use alloc::vec;

    fn ls(c: &[f64], label: usize) -> LatentSample {
        LatentSample { coords: c.to_vec(), label }
    }

    #[test]
    fn identity_latent_map() {
        let g = GenerativeModel::identity(2);
        let s = vec![Sample { obs: vec![0.5, -1.0], label: 0 }, Sample { obs: vec![2.0, 3.0], label: 1 }];
        let l = latent_map(&g.encoder, &s).unwrap();
        assert_eq!(l[0].coords, vec![0.5, -1.0]);
        assert_eq!(l[1].coords, vec![2.0, 3.0]);
        assert_eq!(l[1].label, 1);
    }

    #[test]
    fn disjoint_halves_have_no_intermix() {
        let mut l = Vec::new();
        for i in 0..40 {
            let y = (i % 10) as f64;
            l.push(ls(&[-1.0 - (i as f64) * 0.1, y], 0));
            l.push(ls(&[1.0 + (i as f64) * 0.1, y], 1));
        }
        let r = intermix_region(&l, &GridSpec::new(8), 0.25).unwrap();
        assert_eq!(r.mu_x, 0.0);
        assert!(r.mixed_cells.is_empty());
        assert_eq!(separation_score(&l, 2, &GridSpec::new(8)).unwrap(), 1.0);
    }

    #[test]
    fn half_overlap_grid_is_exactly_half() {
        // 4x4 grid on [0,1]^2: 4 cells pure class 0, 4 pure class 1, 8 mixed 50/50
        let spec = GridSpec::with_bounds(4, vec![0.0, 0.0], vec![1.0, 1.0]);
        let mut l = Vec::new();
        for cx in 0..4 {
            for cy in 0..4 {
                let p = [(cx as f64 + 0.5) / 4.0, (cy as f64 + 0.5) / 4.0];
                match cx {
                    0 => l.extend([ls(&p, 0), ls(&p, 0)]),
                    1 => l.extend([ls(&p, 1), ls(&p, 1)]),
                    _ => l.extend([ls(&p, 0), ls(&p, 1)]),
                }
            }
        }
        let r = intermix_region(&l, &spec, 0.25).unwrap();
        assert_eq!(r.occupied_cells, 16);
        assert_eq!(r.mu_x, 0.5);
    }

    #[test]
    fn single_class_is_degenerate() {
        let l = vec![ls(&[0.0], 1), ls(&[1.0], 1)];
        assert!(matches!(intermix_region(&l, &GridSpec::new(4), 0.25), Err(Error::DegenerateInput(_))));
        assert!(matches!(separation_score(&l, 2, &GridSpec::new(4)), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn lemma_bound_examples() {
        assert!(lemma_bound_check(0.0, 0.99, 0.1).unwrap());
        assert!(!lemma_bound_check(0.1, 1.0, 10.0).unwrap());
        assert!(lemma_bound_check(0.3, 0.8, 2.0).unwrap());
        assert!(lemma_bound_check(0.3, 0.8, 0.0).is_err());
    }

    #[test]
    fn error_floor_examples() {
        assert_eq!(generative_error_floor(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(generative_error_floor(1.0, 1.0).unwrap(), 0.5);
        assert!((generative_error_floor(0.4, 1.0).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn worked_preference_example() {
        let a = ConceptProfile { accuracy: 0.70, conceptualization: 0.80 };
        let b = ConceptProfile { accuracy: 0.95, conceptualization: 0.70 };
        assert_eq!(response_correctness(&a), 0.80);
        assert_eq!(response_correctness(&b), 0.70);
        assert!(prefer(&a, &b) && !prefer(&b, &a));
    }

    #[test]
    fn spearman_matches_hand_values() {
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 30.0, 40.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        // ranks (1,2,3) vs (1.5,1.5,3): r = 0.866...
        let r = spearman(&[1.0, 2.0, 3.0], &[5.0, 5.0, 9.0]).unwrap();
        assert!((r - 0.866_025_403_784_438_6).abs() < 1e-12);
        assert!(spearman(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn majority_lookup_error_counts_minorities() {
        let spec = GridSpec::with_bounds(2, vec![0.0], vec![1.0]);
        let l = vec![ls(&[0.1], 0), ls(&[0.2], 0), ls(&[0.3], 1), ls(&[0.8], 1)];
        let dec = CellLookup::majority(&l, &spec).unwrap();
        assert_eq!(dec.generative_error(&l).unwrap(), 0.25);
    }
}
