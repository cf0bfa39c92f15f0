//! Architecture evolution by incremental variation and selection.
//!
//! A generation proposes at most one single-step variation per parent, trains
//! every child on the world's sample set, and selects the next population
//! from parents and children. The effect of a variation on fitness is never
//! assumed: it is measured by training and recorded in an
//! [`AdaptationRecord`].

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constraints::{feasible, ConstraintSet};
use crate::error::{degenerate, invalid, Error, Result};
use crate::exec::Executor;
use crate::models::{resource_costs, Architecture, CostModel, EncoderModel, Family, TrainableParams};
use crate::rng;
use crate::training::{
    initialize_encoder, median_mad_interval, train_local_search, Objective, TrainBudget, Trainable,
};
use crate::models::edge_summary;
use crate::worlds::{sample_world, Sample, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationKind {
    AddUnit,
    RemoveUnit,
    AddLayer,
    WidenLayer,
    ChangeLatentDim,
    AddPreprocessing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VariationOp {
    pub kind: VariationKind,
    pub magnitude: i32,
}

impl VariationOp {
    pub const fn new(kind: VariationKind, magnitude: i32) -> Self {
        Self { kind, magnitude }
    }
}

/// Architecture after one variation, or `None` when the variation does not
/// apply to this family or shape.
pub fn apply_variation(arch: &Architecture, op: VariationOp) -> Option<Architecture> {
    use VariationKind::*;
    let mut a = arch.clone();
    let layers = a.units_per_layer.len();
    match (a.family, op.kind, op.magnitude) {
        (Family::ThresholdUnit, AddUnit, 1) => {
            a.units_per_layer[0] += 1;
            a.latent_dim += 1;
        }
        (Family::ThresholdUnit, RemoveUnit, -1) if a.units_per_layer[0] > 1 => {
            a.units_per_layer[0] -= 1;
            a.latent_dim -= 1;
        }
        (Family::Tabular, AddUnit, 1) => a.units_per_layer[0] += 1,
        (Family::Tabular, RemoveUnit, -1) if a.units_per_layer[0] > 1 => a.units_per_layer[0] -= 1,
        (Family::MultiLayer, AddUnit, 1) if layers > 0 => a.units_per_layer[0] += 1,
        (Family::MultiLayer, RemoveUnit, -1) if layers > 0 => {
            let last = layers - 1;
            a.units_per_layer[last] -= 1;
            if a.units_per_layer[last] == 0 {
                a.units_per_layer.pop();
            }
        }
        (Family::MultiLayer, AddLayer, 1) => a.units_per_layer.push(1),
        (Family::MultiLayer, WidenLayer, 1) if layers >= 2 => a.units_per_layer[layers - 1] += 1,
        (Family::MultiLayer, ChangeLatentDim, 1) => a.latent_dim += 1,
        (Family::MultiLayer, ChangeLatentDim, -1) if a.latent_dim > 1 => a.latent_dim -= 1,
        (_, AddPreprocessing, 1) if !a.preprocessing => {
            a.preprocessing = true;
            if a.family == Family::Tabular {
                a.latent_dim = a.effective_input_dim();
            }
        }
        _ => return None,
    }
    a.validate().ok().map(|_| a)
}

const ALL_OPS: [VariationOp; 7] = [
    VariationOp::new(VariationKind::AddUnit, 1),
    VariationOp::new(VariationKind::RemoveUnit, -1),
    VariationOp::new(VariationKind::AddLayer, 1),
    VariationOp::new(VariationKind::WidenLayer, 1),
    VariationOp::new(VariationKind::ChangeLatentDim, 1),
    VariationOp::new(VariationKind::ChangeLatentDim, -1),
    VariationOp::new(VariationKind::AddPreprocessing, 1),
];

/// All single-step variations whose result is still feasible. An empty list
/// marks a point with no room to adapt.
pub fn enumerate_variations(arch: &Architecture, cs: &ConstraintSet, costs: &CostModel) -> Vec<VariationOp> {
    ALL_OPS
        .iter()
        .copied()
        .filter(|&op| apply_variation(arch, op).is_some_and(|child| feasible(&child, cs, costs).feasible))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Selection {
    /// Keep the top `N` of the ranked pool.
    #[default]
    Truncation,
    /// Fill `N - 1` slots by repeated seeded tournaments of `size` entrants.
    Tournament { size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub population_size: usize,
    /// Probability `q` that a parent proposes a variation.
    pub variation_prob: f64,
    #[serde(default)]
    pub selection: Selection,
    /// Fitness differences below this are treated as ties.
    pub noise_margin: f64,
    /// Training budget per individual; its seed is replaced per individual.
    pub budget: TrainBudget,
    /// Size of the world sample every individual trains and is scored on.
    pub sample_count: usize,
    /// Fixed energy overhead added to every variation.
    #[serde(default)]
    pub transition_cost: f64,
    #[serde(default)]
    pub costs: CostModel,
    /// Prototype count for MultiLayer encoders.
    #[serde(default = "default_states")]
    pub internal_states: usize,
    /// Variation kinds this run may propose; empty allows all.
    #[serde(default)]
    pub allowed_variations: Vec<VariationKind>,
}

fn default_states() -> usize {
    2
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population_size: 8,
            variation_prob: 0.5,
            selection: Selection::Truncation,
            noise_margin: 0.02,
            budget: TrainBudget { max_evaluations: 200, step_scale: 0.5, seed: 0 },
            sample_count: 200,
            transition_cost: 0.0,
            costs: CostModel::default(),
            internal_states: 2,
            allowed_variations: Vec::new(),
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(invalid("population_size must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.variation_prob) {
            return Err(invalid("variation_prob must lie in [0, 1]"));
        }
        if !(self.noise_margin.is_finite() && self.noise_margin > 0.0) {
            return Err(invalid("noise_margin must be positive"));
        }
        if self.sample_count == 0 {
            return Err(invalid("sample_count must be at least 1"));
        }
        if !(self.transition_cost.is_finite() && self.transition_cost >= 0.0) {
            return Err(invalid("transition_cost must be non-negative"));
        }
        if let Selection::Tournament { size } = self.selection {
            if size == 0 {
                return Err(invalid("tournament size must be at least 1"));
            }
        }
        self.budget.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub model: EncoderModel,
    /// Information fitness in bits on the run's sample set.
    pub fitness: f64,
    /// Energy `rho` of the architecture.
    pub energy: f64,
    pub lineage_id: u64,
}

impl Individual {
    pub fn arch(&self) -> &Architecture {
        &self.model.arch
    }

    pub fn params(&self) -> &TrainableParams {
        &self.model.params
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationState {
    pub generation: u64,
    /// In selection order: the leader first.
    pub individuals: Vec<Individual>,
    pub rng_root_seed: u64,
    pub next_lineage: u64,
}

impl PopulationState {
    pub fn best(&self) -> &Individual {
        self.individuals
            .iter()
            .reduce(|a, b| if strictly_better(b, a) { b } else { a })
            .expect("populations are non-empty")
    }

    pub fn best_fitness(&self) -> f64 {
        self.best().fitness
    }

    pub fn mean_fitness(&self) -> f64 {
        self.individuals.iter().map(|i| i.fitness).sum::<f64>() / self.individuals.len() as f64
    }
}

/// Strict order: fitness desc, energy asc, lineage asc.
fn strictly_better(a: &Individual, b: &Individual) -> bool {
    strict_cmp(a, b) == core::cmp::Ordering::Less
}

fn strict_cmp(a: &Individual, b: &Individual) -> core::cmp::Ordering {
    b.fitness
        .total_cmp(&a.fitness)
        .then(a.energy.total_cmp(&b.energy))
        .then(a.lineage_id.cmp(&b.lineage_id))
}

/// Selection order of a pool.
///
/// Individuals are sorted by fitness; runs whose fitness lies within
/// `margin` of the run's leader form a tie group, ordered by energy
/// (then fitness, then lineage). Among near-equal children the cheaper
/// variation therefore ranks first.
pub fn rank(pool: &[Individual], margin: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.sort_by(|&a, &b| strict_cmp(&pool[a], &pool[b]));
    let mut out = Vec::with_capacity(idx.len());
    let mut start = 0;
    while start < idx.len() {
        let lead = pool[idx[start]].fitness;
        let mut end = start + 1;
        while end < idx.len() && lead - pool[idx[end]].fitness < margin {
            end += 1;
        }
        let mut group = idx[start..end].to_vec();
        group.sort_by(|&a, &b| {
            let (x, y) = (&pool[a], &pool[b]);
            x.energy.total_cmp(&y.energy).then(strict_cmp(x, y))
        });
        out.extend(group);
        start = end;
    }
    out
}

/// Selection `K`: pick `n` pool members. The fittest individual is always
/// kept, so the best fitness never decreases.
pub fn select(pool: &[Individual], n: usize, config: &EvolutionConfig, seed: u64) -> Vec<usize> {
    let order = rank(pool, config.noise_margin);
    let elite = order
        .iter()
        .copied()
        .reduce(|a, b| if strictly_better(&pool[b], &pool[a]) { b } else { a })
        .expect("non-empty pool");
    let mut chosen: Vec<usize> = match config.selection {
        Selection::Truncation => order.iter().copied().take(n).collect(),
        Selection::Tournament { size } => {
            let mut s = rng::stream(seed);
            let mut remaining: Vec<usize> = order.iter().copied().filter(|&i| i != elite).collect();
            let mut picked = alloc::vec![elite];
            while picked.len() < n && !remaining.is_empty() {
                // positions in `remaining` follow rank order; the lowest position wins
                let winner = (0..size.min(remaining.len()))
                    .map(|_| s.random_range(0..remaining.len()))
                    .min()
                    .expect("tournament size >= 1");
                picked.push(remaining.remove(winner));
            }
            order.iter().copied().filter(|i| picked.contains(i)).collect()
        }
    };
    if !chosen.contains(&elite) {
        chosen.pop();
        chosen.push(elite);
        chosen.sort_by_key(|i| order.iter().position(|o| o == i));
    }
    chosen
}

/// One observed variation and its measured effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationRecord {
    pub generation: u64,
    pub parent_lineage: u64,
    pub child_lineage: u64,
    pub op: VariationOp,
    pub parent_arch: Architecture,
    pub child_arch: Architecture,
    pub delta_f: f64,
    /// Energy of the transition: `rho(child) - rho(parent) + overhead`.
    pub delta_h: f64,
    pub edit_size: usize,
    /// `edit_size / delta_h`; absent when `delta_h <= 0`.
    pub g_h: Option<f64>,
    /// `delta_f / delta_h`; absent when `delta_h <= 0`.
    pub gain_per_energy: Option<f64>,
    pub accepted: bool,
    /// Set when training the child failed; the child was discarded.
    #[serde(default)]
    pub failure: Option<alloc::string::String>,
}

/// `(G_H, gain per energy) = (edit_size / dH, dF / dH)`.
pub fn efficiency_scores(rec: &AdaptationRecord) -> Result<(f64, f64)> {
    if !(rec.delta_h > 0.0) {
        return Err(degenerate(format!("variation energy {} is not positive", rec.delta_h)));
    }
    Ok((rec.edit_size as f64 / rec.delta_h, rec.delta_f / rec.delta_h))
}

/// Everything a generation needs besides the population: the world's
/// sample set, configuration and constraints.
#[derive(Debug, Clone)]
pub struct EvolutionContext {
    pub world: World,
    pub samples: Vec<Sample>,
    pub config: EvolutionConfig,
    pub constraints: ConstraintSet,
}

impl EvolutionContext {
    pub fn new(world: World, config: EvolutionConfig, constraints: ConstraintSet) -> Result<Self> {
        config.validate()?;
        constraints.validate()?;
        world.validate()?;
        let samples = sample_world(&world, config.sample_count, world.seed);
        Ok(Self { world, samples, config, constraints })
    }

    /// [`enumerate_variations`] restricted to the configured kinds.
    pub fn variations(&self, arch: &Architecture) -> Vec<VariationOp> {
        let allowed = &self.config.allowed_variations;
        enumerate_variations(arch, &self.constraints, &self.config.costs)
            .into_iter()
            .filter(|op| allowed.is_empty() || allowed.contains(&op.kind))
            .collect()
    }

    /// Individuals in selection order.
    fn ranked(&self, individuals: Vec<Individual>) -> Vec<Individual> {
        rank(&individuals, self.config.noise_margin).into_iter().map(|i| individuals[i].clone()).collect()
    }

    fn energy(&self, arch: &Architecture) -> f64 {
        resource_costs(arch, &self.config.costs).energy_rho
    }

    fn check_feasible(&self, arch: &Architecture) -> Result<()> {
        let f = feasible(arch, &self.constraints, &self.config.costs);
        if f.feasible {
            Ok(())
        } else {
            Err(invalid(format!("architecture violates {:?}", f.violations)))
        }
    }

    /// Train `start` with the budget re-seeded to `seed`; returns the model
    /// and its information fitness.
    pub fn train(&self, start: EncoderModel, seed: u64) -> Result<(EncoderModel, f64)> {
        let budget = self.config.budget.with_seed(seed);
        let (m, r) = train_local_search(&Trainable::Encoder(start), &self.samples, Objective::InformationFitness, &budget)?;
        Ok((m.into_encoder(), r.best()))
    }

    /// Fresh initialization of `arch` followed by training.
    pub fn train_fresh(&self, arch: &Architecture, seed: u64) -> Result<(EncoderModel, f64)> {
        let start = initialize_encoder(arch, &self.samples, self.config.internal_states, rng::split(seed, "init", 0))?;
        self.train(start, seed)
    }

    /// Starting point for a child: threshold units keep their parent's
    /// intervals and new units start at median +- MAD of their channel;
    /// other changes start from a fresh initialization.
    fn inherit(&self, parent: &EncoderModel, child: &Architecture, seed: u64) -> Result<EncoderModel> {
        let fresh = || initialize_encoder(child, &self.samples, self.config.internal_states, seed);
        if child.family != Family::ThresholdUnit || child.preprocessing != parent.arch.preprocessing {
            return fresh();
        }
        let units = child.units_per_layer[0];
        let dim = child.effective_input_dim();
        let mut p: Vec<f64> = parent.params.values().iter().copied().take(2 * units).collect();
        for k in p.len() / 2..units {
            let values: Vec<f64> = self
                .samples
                .iter()
                .map(|s| if child.preprocessing { edge_summary(&s.obs)[k % dim] } else { s.obs[k % dim] })
                .collect();
            let (lo, hi) = median_mad_interval(&values);
            p.extend([lo, hi]);
        }
        EncoderModel::new(child.clone(), TrainableParams(p), parent.noise_rate, Vec::new())
    }

    fn individual(&self, model: EncoderModel, fitness: f64, lineage_id: u64) -> Individual {
        let energy = self.energy(&model.arch);
        Individual { model, fitness, energy, lineage_id }
    }
}

/// Generation 0: `N` trained individuals of one architecture.
pub fn init_population<E: Executor>(
    arch: &Architecture,
    ctx: &EvolutionContext,
    root_seed: u64,
    exec: &E,
) -> Result<PopulationState> {
    arch.validate()?;
    ctx.check_feasible(arch)?;
    let n = ctx.config.population_size as u64;
    let trained = exec.map((0..n).collect(), |lineage| {
        ctx.train_fresh(arch, rng::split2(root_seed, "train", 0, lineage))
    });
    let individuals = trained
        .into_iter()
        .zip(0..n)
        .map(|(r, lineage)| r.map(|(m, f)| ctx.individual(m, f, lineage)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PopulationState { generation: 0, individuals: ctx.ranked(individuals), rng_root_seed: root_seed, next_lineage: n })
}

/// Re-train an existing population's architectures on a new world, keeping
/// lineage ids.
pub fn carry_population<E: Executor>(
    pop: &PopulationState,
    ctx: &EvolutionContext,
    exec: &E,
) -> Result<PopulationState> {
    let dim = ctx.world.observation_dim();
    let jobs: Vec<(Architecture, u64)> =
        pop.individuals.iter().map(|i| (i.arch().retarget(dim), i.lineage_id)).collect();
    for (a, _) in &jobs {
        a.validate()?;
        ctx.check_feasible(a)?;
    }
    let root = pop.rng_root_seed;
    let generation = pop.generation;
    let trained = exec.map(jobs, |(arch, lineage)| {
        ctx.train_fresh(&arch, rng::split2(root, "carry", generation, lineage)).map(|r| (r, lineage))
    });
    let individuals = trained
        .into_iter()
        .map(|r| r.map(|((m, f), lineage)| ctx.individual(m, f, lineage)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PopulationState { individuals: ctx.ranked(individuals), ..pop.clone() })
}

struct ChildJob {
    parent: usize,
    op: VariationOp,
    child_arch: Architecture,
    lineage: u64,
}

/// One generation of variation, training and selection.
pub fn evolve_step<E: Executor>(
    pop: &PopulationState,
    ctx: &EvolutionContext,
    exec: &E,
) -> Result<(PopulationState, Vec<AdaptationRecord>)> {
    if pop.individuals.is_empty() {
        return Err(Error::EmptyEvidence);
    }
    let cfg = &ctx.config;
    let generation = pop.generation + 1;
    let root = pop.rng_root_seed;

    let mut next_lineage = pop.next_lineage;
    let mut jobs = Vec::new();
    for (i, parent) in pop.individuals.iter().enumerate() {
        let mut s = rng::stream(rng::split2(root, "vary", generation, parent.lineage_id));
        if s.random::<f64>() >= cfg.variation_prob {
            continue;
        }
        let ops = ctx.variations(parent.arch());
        if ops.is_empty() {
            continue;
        }
        let op = ops[s.random_range(0..ops.len())];
        let child_arch = apply_variation(parent.arch(), op).expect("enumerated variations apply");
        jobs.push(ChildJob { parent: i, op, child_arch, lineage: next_lineage });
        next_lineage += 1;
    }

    let outcomes = exec.map(jobs.iter().map(|j| (j.parent, j.child_arch.clone(), j.lineage)).collect(), |(p, arch, lineage)| {
        let seed = rng::split2(root, "train", generation, lineage);
        ctx.inherit(&pop.individuals[p].model, &arch, rng::split(seed, "init", 0))
            .and_then(|start| ctx.train(start, seed))
    });

    let mut pool: Vec<Individual> = pop.individuals.clone();
    let mut records = Vec::with_capacity(jobs.len());
    for (job, outcome) in jobs.iter().zip(outcomes) {
        let parent = &pop.individuals[job.parent];
        let delta_h = ctx.energy(&job.child_arch) - parent.energy + cfg.transition_cost;
        let edit_size = parent.arch().edit_distance(&job.child_arch).unwrap_or(usize::MAX);
        let mut rec = AdaptationRecord {
            generation,
            parent_lineage: parent.lineage_id,
            child_lineage: job.lineage,
            op: job.op,
            parent_arch: parent.arch().clone(),
            child_arch: job.child_arch.clone(),
            delta_f: 0.0,
            delta_h,
            edit_size,
            g_h: None,
            gain_per_energy: None,
            accepted: false,
            failure: None,
        };
        match outcome {
            Ok((model, fitness)) => {
                rec.delta_f = fitness - parent.fitness;
                if let Ok((g, e)) = efficiency_scores(&rec) {
                    rec.g_h = Some(g);
                    rec.gain_per_energy = Some(e);
                }
                pool.push(ctx.individual(model, fitness, job.lineage));
            }
            Err(e) => rec.failure = Some(format!("{e}")),
        }
        records.push(rec);
    }

    let chosen = select(&pool, cfg.population_size, cfg, rng::split(root, "select", generation));
    let individuals: Vec<Individual> = chosen.iter().map(|&i| pool[i].clone()).collect();
    for rec in &mut records {
        rec.accepted = rec.failure.is_none() && individuals.iter().any(|i| i.lineage_id == rec.child_lineage);
    }
    Ok((PopulationState { generation, individuals, rng_root_seed: root, next_lineage }, records))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    #[serde(default)]
    pub stage: usize,
    pub generation: u64,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_arch: Architecture,
    pub best_units: usize,
    pub best_energy: f64,
    pub population_size: usize,
    pub accepted_variations: usize,
}

/// `best_fitness` is the population maximum; the `best_*` architecture
/// fields describe the leader of the selection order, which among
/// near-equal fitness is the cheapest.
fn summarize(stage: usize, pop: &PopulationState, accepted: usize) -> GenerationSummary {
    let best = &pop.individuals[0];
    GenerationSummary {
        stage,
        generation: pop.generation,
        best_fitness: pop.best_fitness(),
        mean_fitness: pop.mean_fitness(),
        best_arch: best.arch().clone(),
        best_units: best.arch().total_units(),
        best_energy: best.energy,
        population_size: pop.individuals.len(),
        accepted_variations: accepted,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Generation 0 followed by one entry per step.
    pub summaries: Vec<GenerationSummary>,
    pub records: Vec<AdaptationRecord>,
    pub final_population: PopulationState,
}

/// Evolve `generations` steps from a population of `initial`.
pub fn run_evolution<E: Executor>(
    initial: &Architecture,
    ctx: &EvolutionContext,
    generations: u64,
    seed: u64,
    exec: &E,
) -> Result<Trajectory> {
    if generations == 0 {
        return Err(invalid("generations must be at least 1"));
    }
    let pop = init_population(initial, ctx, seed, exec)?;
    let mut t = Trajectory { summaries: alloc::vec![summarize(0, &pop, 0)], records: Vec::new(), final_population: pop };
    continue_evolution(&mut t, ctx, 0, generations, exec)?;
    Ok(t)
}

fn continue_evolution<E: Executor>(
    t: &mut Trajectory,
    ctx: &EvolutionContext,
    stage: usize,
    generations: u64,
    exec: &E,
) -> Result<()> {
    for _ in 0..generations {
        let (next, records) = evolve_step(&t.final_population, ctx, exec)?;
        let accepted = records.iter().filter(|r| r.accepted).count();
        t.summaries.push(summarize(stage, &next, accepted));
        t.records.extend(records);
        t.final_population = next;
    }
    Ok(())
}

/// Run a chain of worlds. Each stage starts from the previous stage's
/// population, re-trained on the new world.
pub fn run_stages<E: Executor>(
    initial: &Architecture,
    stages: &[(EvolutionContext, u64)],
    seed: u64,
    exec: &E,
) -> Result<Trajectory> {
    let ((first, g0), rest) = stages.split_first().ok_or_else(|| invalid("at least one stage is required"))?;
    let mut t = run_evolution(&initial.retarget(first.world.observation_dim()), first, *g0, seed, exec)?;
    for (k, (ctx, g)) in rest.iter().enumerate() {
        if *g == 0 {
            return Err(invalid("generations must be at least 1"));
        }
        let pop = carry_population(&t.final_population, ctx, exec)?;
        t.summaries.push(summarize(k + 1, &pop, 0));
        t.final_population = pop;
        continue_evolution(&mut t, ctx, k + 1, *g, exec)?;
    }
    Ok(t)
}

/// Best fitness over `trials` seeded trainings of `arch`.
fn best_attainable<E: Executor>(arch: &Architecture, ctx: &EvolutionContext, trials: usize, label: &str, exec: &E) -> Result<f64> {
    let seed = ctx.config.budget.seed;
    let results = exec.map((0..trials as u64).collect(), |t| ctx.train_fresh(arch, rng::split(seed, label, t)));
    results.into_iter().try_fold(f64::NEG_INFINITY, |best, r| r.map(|(_, f)| best.max(f)))
}

/// True when some feasible variation, trained over `trials` seeds, beats the
/// parent's best attainable fitness (same budget, same trials) by more than
/// the noise margin.
pub fn is_adaptable<E: Executor>(arch: &Architecture, ctx: &EvolutionContext, trials: usize, exec: &E) -> Result<bool> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let ops = ctx.variations(arch);
    if ops.is_empty() {
        return Ok(false);
    }
    let parent_best = best_attainable(arch, ctx, trials, "adapt-parent", exec)?;
    for op in ops {
        let child = apply_variation(arch, op).expect("enumerated variations apply");
        let child_best = best_attainable(&child, ctx, trials, "adapt-child", exec)?;
        if child_best > parent_best + ctx.config.noise_margin {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Fraction of seeded trials in which the trained child reaches the
/// parent's best attainable fitness plus the noise margin.
pub fn transition_rate<E: Executor>(
    parent: &Architecture,
    child: &Architecture,
    ctx: &EvolutionContext,
    trials: usize,
    exec: &E,
) -> Result<f64> {
    match parent.edit_distance(child) {
        Some(1) => {}
        d => return Err(Error::NotIncremental(d.unwrap_or(usize::MAX))),
    }
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let target = best_attainable(parent, ctx, trials, "rate-parent", exec)? + ctx.config.noise_margin;
    let seed = ctx.config.budget.seed;
    let hits = exec
        .map((0..trials as u64).collect(), |t| ctx.train_fresh(child, rng::split(seed, "rate-child", t)))
        .into_iter()
        .map(|r| r.map(|(_, f)| f >= target))
        .collect::<Result<Vec<bool>>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / trials as f64)
}

/// Normalized histogram of individual fitness. Bins span the population's
/// fitness range; a single-valued population fills one bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessHistogram {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
}

pub fn fitness_histogram(values: &[f64], bins: usize, range: Option<(f64, f64)>) -> Result<FitnessHistogram> {
    if bins == 0 {
        return Err(invalid("bins must be at least 1"));
    }
    if values.is_empty() {
        return Err(Error::EmptyEvidence);
    }
    let (lo, hi) = range.unwrap_or_else(|| {
        values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
    });
    let hi = if hi > lo { hi } else { lo + 1.0 };
    let width = (hi - lo) / bins as f64;
    let bin_edges = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = alloc::vec![0usize; bins];
    for &v in values {
        let i = ((v - lo) / width) as isize;
        counts[i.clamp(0, bins as isize - 1) as usize] += 1;
    }
    let n = values.len() as f64;
    Ok(FitnessHistogram { bin_edges, densities: counts.iter().map(|&c| c as f64 / n).collect() })
}

/// Histogram of a population's fitness values.
pub fn population_histogram(pop: &PopulationState, bins: usize) -> Result<FitnessHistogram> {
    let values: Vec<f64> = pop.individuals.iter().map(|i| i.fitness).collect();
    fitness_histogram(&values, bins, None)
}

/// Empirical edit distance between successive accepted architectures of the
/// best lineage (a descriptive scale of the extrema network).
pub fn characteristic_scale(summaries: &[GenerationSummary]) -> Option<f64> {
    let steps: Vec<usize> = summaries
        .windows(2)
        .filter_map(|w| w[0].best_arch.edit_distance(&w[1].best_arch))
        .filter(|&d| d > 0)
        .collect();
    if steps.is_empty() {
        None
    } else {
        Some(steps.iter().sum::<usize>() as f64 / steps.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use alloc::vec;

    fn ind(fitness: f64, energy: f64, lineage_id: u64) -> Individual {
        let model = EncoderModel::threshold(&[(0.0, 1.0)], 1, 0.0).unwrap();
        Individual { model, fitness, energy, lineage_id }
    }

    fn roomy() -> ConstraintSet {
        ConstraintSet::new(100.0, 100.0, 100.0).unwrap()
    }

    #[test]
    fn one_unit_threshold_variations() {
        let ops = enumerate_variations(&Architecture::threshold(1, 1), &roomy(), &CostModel::default());
        let kinds: Vec<_> = ops.iter().map(|o| o.kind).collect();
        assert!(kinds.contains(&VariationKind::AddUnit));
        assert!(kinds.contains(&VariationKind::AddPreprocessing));
        assert!(!kinds.contains(&VariationKind::RemoveUnit));
    }

    #[test]
    fn memory_bound_excludes_growth() {
        let cs = ConstraintSet::new(4.0, 100.0, 100.0).unwrap();
        let ops = enumerate_variations(&Architecture::threshold(2, 1), &cs, &CostModel::default());
        assert!(!ops.iter().any(|o| o.kind == VariationKind::AddUnit));
        assert!(ops.iter().any(|o| o.kind == VariationKind::RemoveUnit));
    }

    #[test]
    fn every_variation_is_one_edit() {
        let archs = [
            Architecture::threshold(2, 2),
            Architecture::tabular(3, 1),
            Architecture::multilayer(4, vec![3, 2], 2),
            Architecture::multilayer(4, vec![], 2),
        ];
        for a in &archs {
            for op in enumerate_variations(a, &roomy(), &CostModel::default()) {
                let c = apply_variation(a, op).unwrap();
                assert_eq!(a.edit_distance(&c), Some(1), "{a:?} {op:?}");
            }
        }
    }

    #[test]
    fn efficiency_examples() {
        let mut rec = AdaptationRecord {
            generation: 1,
            parent_lineage: 0,
            child_lineage: 1,
            op: VariationOp::new(VariationKind::AddUnit, 1),
            parent_arch: Architecture::threshold(1, 1),
            child_arch: Architecture::threshold(2, 1),
            delta_f: 0.3,
            delta_h: 0.5,
            edit_size: 1,
            g_h: None,
            gain_per_energy: None,
            accepted: true,
            failure: None,
        };
        assert_eq!(efficiency_scores(&rec).unwrap().0, 2.0);
        rec.delta_h = 0.1;
        assert!((efficiency_scores(&rec).unwrap().1 - 3.0).abs() < 1e-12);
        rec.delta_h = 0.0;
        assert!(matches!(efficiency_scores(&rec), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn near_ties_rank_cheaper_first() {
        let pool = vec![ind(0.50, 1.0, 0), ind(0.81, 2.0, 1), ind(0.80, 1.1, 2)];
        assert_eq!(rank(&pool, 0.02), vec![2, 1, 0]);
        assert_eq!(rank(&pool, 0.001), vec![1, 2, 0]);
    }

    #[test]
    fn selection_keeps_the_fittest() {
        let pool = vec![ind(0.81, 2.0, 1), ind(0.80, 1.1, 2)];
        let cfg = EvolutionConfig { population_size: 1, ..EvolutionConfig::default() };
        assert_eq!(select(&pool, 1, &cfg, 0), vec![0]);
        assert_eq!(select(&pool, 2, &cfg, 0), vec![1, 0]);
        let t = EvolutionConfig { selection: Selection::Tournament { size: 2 }, ..cfg };
        for seed in 0..20 {
            assert!(select(&pool, 1, &t, seed).contains(&0));
        }
    }

    #[test]
    fn histogram_examples() {
        let h = fitness_histogram(&[0.4; 5], 3, None).unwrap();
        assert_eq!(h.densities.iter().filter(|&&d| d > 0.0).count(), 1);
        assert_eq!(h.densities.iter().sum::<f64>(), 1.0);
        let h = fitness_histogram(&[0.2, 0.2, 0.8, 0.8], 2, Some((0.0, 1.0))).unwrap();
        assert_eq!(h.densities, vec![0.5, 0.5]);
        assert!(fitness_histogram(&[0.1], 0, None).is_err());
    }

    #[test]
    fn zero_variation_keeps_population() {
        let w = World::two_state(0.7, 3).unwrap();
        let cfg = EvolutionConfig { variation_prob: 0.0, population_size: 3, ..EvolutionConfig::default() };
        let ctx = EvolutionContext::new(w, cfg, roomy()).unwrap();
        let pop = init_population(&Architecture::threshold(1, 1), &ctx, 5, &Sequential).unwrap();
        let (next, recs) = evolve_step(&pop, &ctx, &Sequential).unwrap();
        assert!(recs.is_empty());
        assert_eq!(next.best_fitness(), pop.best_fitness());
        assert_eq!(next.generation, 1);
    }

    #[test]
    fn generations_must_be_positive() {
        let w = World::two_state(0.7, 3).unwrap();
        let ctx = EvolutionContext::new(w, EvolutionConfig::default(), roomy()).unwrap();
        assert!(run_evolution(&Architecture::threshold(1, 1), &ctx, 0, 1, &Sequential).is_err());
    }

    #[test]
    fn identical_architectures_are_not_incremental() {
        let w = World::xor(true, 0.0, 1).unwrap();
        let ctx = EvolutionContext::new(w, EvolutionConfig::default(), roomy()).unwrap();
        let a = Architecture::threshold(1, 2);
        assert_eq!(transition_rate(&a, &a, &ctx, 3, &Sequential), Err(Error::NotIncremental(0)));
    }
}
