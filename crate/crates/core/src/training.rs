//! Within-lifetime training: fit trainable parameters of a fixed architecture
//! to maximize a fitness estimate on a finite sample set.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{degenerate, invalid, Error, Result};
use crate::infotheory::fitness_of_model;
use crate::models::{edge_summary, Architecture, EncoderModel, Family, GenerativeModel, TrainableParams};
use crate::rng;
use crate::worlds::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainBudget {
    pub max_evaluations: usize,
    pub step_scale: f64,
    pub seed: u64,
}

impl TrainBudget {
    pub fn new(max_evaluations: usize, step_scale: f64, seed: u64) -> Result<Self> {
        let b = Self { max_evaluations, step_scale, seed };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_evaluations == 0 {
            return Err(invalid("max_evaluations must be at least 1"));
        }
        if !(self.step_scale.is_finite() && self.step_scale > 0.0) {
            return Err(invalid("step_scale must be positive"));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    InformationFitness,
    GenerativeAccuracy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptedStep {
    pub evaluation: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    /// Best flat parameter vector found (see [`Trainable::flatten`]).
    pub params: TrainableParams,
    /// Objective after the initial evaluation and after every accepted step.
    pub fitness_trace: Vec<f64>,
    pub evaluations_used: usize,
    pub accepted: Vec<AcceptedStep>,
}

impl TrainResult {
    pub fn best(&self) -> f64 {
        *self.fitness_trace.last().expect("trace holds the initial evaluation")
    }
}

/// A model whose parameters can be searched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trainable {
    Encoder(EncoderModel),
    Generative(GenerativeModel),
}

impl Trainable {
    fn encoder(&self) -> &EncoderModel {
        match self {
            Trainable::Encoder(e) => e,
            Trainable::Generative(g) => &g.encoder,
        }
    }

    /// Encoder parameters, then flattened prototypes, then decoder parameters.
    pub fn flatten(&self) -> Vec<f64> {
        let e = self.encoder();
        let mut v = e.params.0.clone();
        v.extend(e.prototypes.iter().flatten());
        if let Trainable::Generative(g) = self {
            v.extend_from_slice(g.decoder.values());
        }
        v
    }

    /// Inverse of [`Trainable::flatten`].
    pub fn with_flat(&self, flat: &[f64]) -> Trainable {
        let mut out = self.clone();
        let e = match &mut out {
            Trainable::Encoder(e) => e,
            Trainable::Generative(g) => &mut g.encoder,
        };
        let n = e.params.len();
        e.params.0.copy_from_slice(&flat[..n]);
        let mut off = n;
        for p in &mut e.prototypes {
            let k = p.len();
            p.copy_from_slice(&flat[off..off + k]);
            off += k;
        }
        if let Trainable::Generative(g) = &mut out {
            let k = g.decoder.len();
            g.decoder.0.copy_from_slice(&flat[off..off + k]);
        }
        out
    }

    pub fn into_encoder(self) -> EncoderModel {
        match self {
            Trainable::Encoder(e) => e,
            Trainable::Generative(g) => g.encoder,
        }
    }
}

/// Result of the exhaustive interval scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub params: TrainableParams,
    pub agreement: f64,
}

/// Exhaustive scan over intervals whose endpoints fall between consecutive
/// distinct sample values (plus one point beyond either end and one empty
/// interval past the maximum). Ties go to the smallest left endpoint, then
/// the smallest width.
pub fn fit_threshold_exact(samples: &[(f64, bool)]) -> Result<ThresholdFit> {
    if samples.is_empty() {
        return Err(Error::EmptyEvidence);
    }
    if samples.iter().any(|(x, _)| !x.is_finite()) {
        return Err(invalid("observations must be finite"));
    }
    let mut values: Vec<f64> = samples.iter().map(|s| s.0).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let min_gap = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let delta = if min_gap.is_finite() { min_gap / 2.0 } else { 0.5 };
    let last = *values.last().expect("non-empty");

    let mut cuts = Vec::with_capacity(values.len() + 2);
    cuts.push(values[0] - delta);
    cuts.extend(values.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    cuts.push(last + delta);
    cuts.push(last + 2.0 * delta);

    // trues[i] / falses[i]: labels strictly below cut i
    let count_below = |c: f64, want: bool| samples.iter().filter(|s| s.1 == want && s.0 < c).count();
    let trues: Vec<usize> = cuts.iter().map(|&c| count_below(c, true)).collect();
    let falses: Vec<usize> = cuts.iter().map(|&c| count_below(c, false)).collect();
    let total_false = samples.iter().filter(|s| !s.1).count();

    let mut best = (0usize, 0usize, 0usize);
    let mut found = false;
    for i in 0..cuts.len() {
        for j in i + 1..cuts.len() {
            let agree = (trues[j] - trues[i]) + total_false - (falses[j] - falses[i]);
            if !found || agree > best.0 {
                best = (agree, i, j);
                found = true;
            }
        }
    }
    Ok(ThresholdFit {
        params: TrainableParams(alloc::vec![cuts[best.1], cuts[best.2]]),
        agreement: best.0 as f64 / samples.len() as f64,
    })
}

/// `F_g = 1 - MSE(S, G(E(S))) / Var(S)`, clamped to `[0, 1]`; `Var` is the
/// per-coordinate variance averaged over coordinates.
pub fn generative_accuracy(gen: &GenerativeModel, samples: &[Vec<f64>]) -> Result<f64> {
    Ok(reconstruction_score(gen, samples)?.clamp(0.0, 1.0))
}

/// Unclamped `1 - MSE / Var`; the training objective, since clamping would
/// flatten the landscape below zero.
fn reconstruction_score(gen: &GenerativeModel, samples: &[Vec<f64>]) -> Result<f64> {
    let first = samples.first().ok_or(Error::EmptyEvidence)?;
    let dim = first.len();
    let n = samples.len() as f64;
    let mut mean = alloc::vec![0.0; dim];
    for x in samples {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    let var: f64 = samples.iter().map(|x| sq(x, &mean)).sum::<f64>();
    if var <= 0.0 {
        return Err(degenerate("sample set has zero variance"));
    }
    let mut mse = 0.0;
    for x in samples {
        mse += sq(x, &gen.reconstruct(x)?);
    }
    let f = 1.0 - mse / var;
    if !f.is_finite() {
        return Err(Error::Numerical(format!("generative accuracy is {f}")));
    }
    Ok(f)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn channel(samples: &[Sample], arch: &Architecture, c: usize) -> Vec<f64> {
    samples
        .iter()
        .map(|s| if arch.preprocessing { edge_summary(&s.obs)[c] } else { s.obs[c] })
        .collect()
}

/// Starting interval for one threshold unit: median +- MAD of its channel.
pub fn median_mad_interval(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    let med = median(&mut v);
    let mut dev: Vec<f64> = values.iter().map(|x| (x - med).abs()).collect();
    let mut mad = median(&mut dev);
    if mad <= 0.0 {
        let spread = v.last().copied().unwrap_or(med) - v.first().copied().unwrap_or(med);
        mad = if spread > 0.0 { spread / 4.0 } else { 0.5 };
    }
    (med - mad, med + mad)
}

/// Fresh parameters for `arch`.
///
/// ThresholdUnit intervals start at median +- MAD of their channel; Tabular
/// cuts sit at channel quantiles; MultiLayer weights are uniform in
/// `[-0.5, 0.5]` and the `states` prototypes are latent images of randomly
/// chosen samples.
pub fn initialize_encoder(
    arch: &Architecture,
    samples: &[Sample],
    states: usize,
    seed: u64,
) -> Result<EncoderModel> {
    arch.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptyEvidence);
    }
    let dim = arch.effective_input_dim();
    let mut s = rng::stream(rng::split(seed, "init", 0));
    let params: Vec<f64> = match arch.family {
        Family::ThresholdUnit => (0..arch.units_per_layer[0])
            .flat_map(|k| {
                let (lo, hi) = median_mad_interval(&channel(samples, arch, k % dim));
                [lo, hi]
            })
            .collect(),
        Family::Tabular => {
            let bins = arch.units_per_layer[0];
            (0..dim)
                .flat_map(|c| {
                    let mut v = channel(samples, arch, c);
                    v.sort_by(f64::total_cmp);
                    let n = v.len();
                    (1..bins).map(move |i| v[(i * n / bins).min(n - 1)]).collect::<Vec<_>>()
                })
                .collect()
        }
        Family::MultiLayer => (0..arch.param_count()).map(|_| s.random_range(-0.5..=0.5)).collect(),
    };
    let mut enc = EncoderModel::new(arch.clone(), TrainableParams(params), 0.0, Vec::new())?;
    if arch.family == Family::MultiLayer && states > 0 {
        let mut protos = Vec::with_capacity(states);
        for _ in 0..states {
            let i = s.random_range(0..samples.len());
            protos.push(enc.latent(&samples[i].obs)?);
        }
        enc.prototypes = protos;
    }
    Ok(enc)
}

/// Encoder from [`initialize_encoder`] (no prototypes) plus a uniform
/// `[-0.5, 0.5]` mirror decoder whose output biases start at the sample mean.
pub fn initialize_generative(arch: &Architecture, samples: &[Sample], seed: u64) -> Result<GenerativeModel> {
    let encoder = initialize_encoder(arch, samples, 0, seed)?;
    let mut s = rng::stream(rng::split(seed, "init-decoder", 0));
    let mut decoder: Vec<f64> = (0..arch.decoder_param_count()).map(|_| s.random_range(-0.5..=0.5)).collect();
    let width = samples[0].obs.len();
    if arch.decoder_dims().last() == Some(&width) {
        let n = samples.len() as f64;
        let start = decoder.len() - width;
        for (k, b) in decoder[start..].iter_mut().enumerate() {
            *b = samples.iter().map(|x| x.obs[k]).sum::<f64>() / n;
        }
    }
    GenerativeModel::new(encoder, TrainableParams(decoder))
}

fn evaluate(model: &Trainable, samples: &[Sample], objective: Objective, seed: u64) -> Result<f64> {
    let value = match (objective, model) {
        (Objective::InformationFitness, m) => fitness_of_model(m.encoder(), samples, seed)?.1.bits(),
        (Objective::GenerativeAccuracy, Trainable::Generative(g)) => {
            let xs: Vec<Vec<f64>> = samples.iter().map(|s| s.obs.clone()).collect();
            reconstruction_score(g, &xs)?
        }
        (Objective::GenerativeAccuracy, Trainable::Encoder(_)) => {
            return Err(invalid("generative accuracy needs a generative model"))
        }
    };
    if !value.is_finite() {
        return Err(Error::Numerical(format!("objective evaluated to {value}")));
    }
    Ok(value)
}

/// Seeded stochastic hill climbing.
///
/// Each step perturbs either one coordinate or all of them with Gaussian
/// noise of scale `step_scale * 10^-u`, `u ~ U[0, 2]`, and keeps the
/// candidate only if the objective strictly improves. Readout noise uses one
/// fixed stream for every evaluation, so the objective is deterministic.
pub fn train_local_search(
    model: &Trainable,
    samples: &[Sample],
    objective: Objective,
    budget: &TrainBudget,
) -> Result<(Trainable, TrainResult)> {
    budget.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptyEvidence);
    }
    let eval_seed = rng::split(budget.seed, "objective", 0);
    let mut s = rng::stream(rng::split(budget.seed, "search", 0));

    let mut best = model.clone();
    let mut flat = model.flatten();
    let mut best_value = evaluate(model, samples, objective, eval_seed)?;
    let mut trace = alloc::vec![best_value];
    let mut accepted = alloc::vec![AcceptedStep { evaluation: 0, objective: best_value }];
    let mut used = 1;

    while used < budget.max_evaluations && !flat.is_empty() {
        let u: f64 = s.random();
        let sigma = budget.step_scale * 10.0.powf(-2.0 * u);
        let mut cand = flat.clone();
        if s.random::<bool>() {
            let i = s.random_range(0..cand.len());
            let z: f64 = StandardNormal.sample(&mut s);
            cand[i] += sigma * z;
        } else {
            for c in &mut cand {
                let z: f64 = StandardNormal.sample(&mut s);
                *c += sigma * z;
            }
        }
        let trial = best.with_flat(&cand);
        let value = evaluate(&trial, samples, objective, eval_seed)?;
        used += 1;
        if value > best_value {
            best_value = value;
            best = trial;
            flat = cand;
            trace.push(value);
            accepted.push(AcceptedStep { evaluation: used - 1, objective: value });
        }
    }
    let result = TrainResult {
        params: TrainableParams(flat),
        fitness_trace: trace,
        evaluations_used: used,
        accepted,
    };
    Ok((best, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worlds::World;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_fit_separable() {
        let fit = fit_threshold_exact(&[(0.2, true), (0.8, true), (1.5, false)]).unwrap();
        let (lo, hi) = (fit.params.0[0], fit.params.0[1]);
        assert_eq!(fit.agreement, 1.0);
        assert!(lo <= 0.2 && 0.8 <= hi && hi < 1.5);
    }

    #[test]
    fn exact_fit_single_point_is_canonical() {
        let fit = fit_threshold_exact(&[(0.5, true)]).unwrap();
        assert_eq!(fit.params.0, vec![0.0, 1.0]);
        assert_eq!(fit.agreement, 1.0);
    }

    #[test]
    fn exact_fit_all_false_picks_empty_interval() {
        let fit = fit_threshold_exact(&[(0.1, false), (0.4, false)]).unwrap();
        assert_eq!(fit.agreement, 1.0);
    }

    #[test]
    fn exact_fit_empty() {
        assert_eq!(fit_threshold_exact(&[]), Err(Error::EmptyEvidence));
    }

    #[test]
    fn generative_accuracy_examples() {
        let xs: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 * 0.1, (i % 7) as f64]).collect();
        let id = GenerativeModel::identity(2);
        assert_eq!(generative_accuracy(&id, &xs).unwrap(), 1.0);

        let n = xs.len() as f64;
        let mean: Vec<f64> = (0..2).map(|d| xs.iter().map(|x| x[d]).sum::<f64>() / n).collect();
        let flat = GenerativeModel::linear_decoder(&[vec![0.0, 0.0], vec![0.0, 0.0]], &mean).unwrap();
        assert_abs_diff_eq!(generative_accuracy(&flat, &xs).unwrap(), 0.0, epsilon = 1e-12);

        let constant = vec![vec![1.0, 1.0]; 4];
        assert!(matches!(generative_accuracy(&id, &constant), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn budget_of_one_returns_initial() {
        let w = World::two_state(0.7, 1).unwrap();
        let s = w.sample(200);
        let enc = initialize_encoder(&Architecture::threshold(1, 1), &s, 2, 3).unwrap();
        let b = TrainBudget::new(1, 0.5, 4).unwrap();
        let (m, r) = train_local_search(&Trainable::Encoder(enc.clone()), &s, Objective::InformationFitness, &b)
            .unwrap();
        assert_eq!(r.fitness_trace.len(), 1);
        assert_eq!(r.evaluations_used, 1);
        assert_eq!(m, Trainable::Encoder(enc));
    }

    #[test]
    fn identity_autoencoder_stays_perfect() {
        let w = World::two_gaussians(2, 1.0, 2).unwrap();
        let s = w.sample(100);
        let b = TrainBudget::new(50, 0.1, 1).unwrap();
        let (_, r) = train_local_search(
            &Trainable::Generative(GenerativeModel::identity(2)),
            &s,
            Objective::GenerativeAccuracy,
            &b,
        )
        .unwrap();
        assert_eq!(r.fitness_trace, vec![1.0]);
        assert_eq!(r.evaluations_used, 50);
    }

    #[test]
    fn trace_is_monotone_and_deterministic() {
        let w = World::two_state(0.7, 5).unwrap();
        let s = w.sample(300);
        let enc = initialize_encoder(&Architecture::threshold(1, 1), &s, 2, 3).unwrap();
        let b = TrainBudget::new(300, 0.5, 11).unwrap();
        let t = Trainable::Encoder(enc);
        let (m1, r1) = train_local_search(&t, &s, Objective::InformationFitness, &b).unwrap();
        let (m2, r2) = train_local_search(&t, &s, Objective::InformationFitness, &b).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(m1, m2);
        assert!(r1.fitness_trace.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn flatten_round_trips() {
        let w = World::two_gaussians(3, 1.0, 2).unwrap();
        let s = w.sample(20);
        let g = initialize_generative(&Architecture::multilayer(3, vec![2], 2), &s, 5).unwrap();
        let mut g2 = g.clone();
        g2.encoder.prototypes = vec![vec![0.1, 0.2], vec![0.3, 0.4]];
        let t = Trainable::Generative(g2);
        assert_eq!(t.with_flat(&t.flatten()), t);
    }

    #[test]
    fn median_mad_handles_constant_channel() {
        assert_eq!(median_mad_interval(&[2.0, 2.0, 2.0]), (1.5, 2.5));
        assert_eq!(median_mad_interval(&[0.0, 1.0, 2.0, 3.0, 4.0]), (1.0, 3.0));
    }
}
