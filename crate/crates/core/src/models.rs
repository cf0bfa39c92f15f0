//! Model families: architecture descriptors, encoders `D -> L`, mirror
//! decoders `L -> D`, and their resource costs.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{degenerate, invalid, shape, Error, Result};
use crate::rng;

/// Width of the fixed edge-summary feature map.
pub const FEATURE_DIM: usize = 4;

/// Cap on the number of discrete internal states a model may expose.
pub const MAX_STATES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Interval detectors; unit `k` watches input channel `k mod dim`.
    ThresholdUnit,
    /// Per-channel bin lookup.
    Tabular,
    /// Dense network with a linear latent layer and nearest-prototype states.
    MultiLayer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    #[default]
    Dense,
}

/// Structural descriptor of a model.
///
/// For `ThresholdUnit`, `units_per_layer = [units]` and `latent_dim = units`.
/// For `Tabular`, `units_per_layer = [bins]` and `latent_dim` equals the
/// effective input width. For `MultiLayer`, `units_per_layer` lists the hidden
/// widths; an empty list is a purely linear map.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Architecture {
    pub family: Family,
    pub units_per_layer: Vec<usize>,
    pub latent_dim: usize,
    pub input_dim: usize,
    #[serde(default)]
    pub connectivity: Connectivity,
    #[serde(default)]
    pub preprocessing: bool,
}

impl Architecture {
    pub fn threshold(units: usize, input_dim: usize) -> Self {
        Self {
            family: Family::ThresholdUnit,
            units_per_layer: alloc::vec![units],
            latent_dim: units,
            input_dim,
            connectivity: Connectivity::Dense,
            preprocessing: false,
        }
    }

    pub fn tabular(bins: usize, input_dim: usize) -> Self {
        Self {
            family: Family::Tabular,
            units_per_layer: alloc::vec![bins],
            latent_dim: input_dim,
            input_dim,
            connectivity: Connectivity::Dense,
            preprocessing: false,
        }
    }

    pub fn multilayer(input_dim: usize, hidden: Vec<usize>, latent_dim: usize) -> Self {
        Self {
            family: Family::MultiLayer,
            units_per_layer: hidden,
            latent_dim,
            input_dim,
            connectivity: Connectivity::Dense,
            preprocessing: false,
        }
    }

    /// Width of the vector the model actually reads.
    pub fn effective_input_dim(&self) -> usize {
        if self.preprocessing {
            FEATURE_DIM
        } else {
            self.input_dim
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.latent_dim == 0 {
            return Err(invalid("input_dim and latent_dim must be positive"));
        }
        if self.units_per_layer.iter().any(|&u| u == 0) {
            return Err(invalid("layer widths must be positive"));
        }
        match self.family {
            Family::ThresholdUnit => {
                if self.units_per_layer.len() != 1 || self.latent_dim != self.units_per_layer[0] {
                    return Err(invalid("threshold architecture is [units] with latent_dim = units"));
                }
            }
            Family::Tabular => {
                if self.units_per_layer.len() != 1 || self.latent_dim != self.effective_input_dim()
                {
                    return Err(invalid("tabular architecture is [bins] with latent_dim = input width"));
                }
            }
            Family::MultiLayer => {}
        }
        if self.family != Family::MultiLayer {
            let states = self.discrete_state_count();
            if states.is_none_or(|s| s > MAX_STATES) {
                return Err(invalid("architecture exposes too many internal states"));
            }
        }
        Ok(())
    }

    /// Unit count used by the energy model and by structural gradients.
    pub fn total_units(&self) -> usize {
        match self.family {
            Family::ThresholdUnit | Family::Tabular => self.units_per_layer[0],
            Family::MultiLayer => self.units_per_layer.iter().sum::<usize>() + self.latent_dim,
        }
    }

    /// Layer widths from input to latent (MultiLayer only).
    fn layer_dims(&self) -> Vec<usize> {
        let mut dims = alloc::vec![self.effective_input_dim()];
        dims.extend_from_slice(&self.units_per_layer);
        dims.push(self.latent_dim);
        dims
    }

    /// Layer widths of the mirror decoder, latent to observation.
    pub(crate) fn decoder_dims(&self) -> Vec<usize> {
        let mut dims = alloc::vec![self.latent_dim];
        dims.extend(self.units_per_layer.iter().rev());
        dims.push(self.input_dim);
        dims
    }

    fn discrete_state_count(&self) -> Option<usize> {
        match self.family {
            Family::ThresholdUnit => 1usize.checked_shl(self.units_per_layer[0] as u32),
            Family::Tabular => {
                self.units_per_layer[0].checked_pow(self.effective_input_dim() as u32)
            }
            Family::MultiLayer => None,
        }
    }

    /// Exact number of trainable parameters the family stores.
    pub fn param_count(&self) -> usize {
        match self.family {
            Family::ThresholdUnit => 2 * self.units_per_layer[0],
            Family::Tabular => self.effective_input_dim() * (self.units_per_layer[0] - 1),
            Family::MultiLayer => dense_param_count(&self.layer_dims()),
        }
    }

    pub fn decoder_param_count(&self) -> usize {
        dense_param_count(&self.decoder_dims())
    }

    /// Number of single structural changes separating two architectures, or
    /// `None` when they differ in family or input width.
    pub fn edit_distance(&self, other: &Architecture) -> Option<usize> {
        if self.family != other.family || self.input_dim != other.input_dim {
            return None;
        }
        let mut d = usize::from(self.preprocessing != other.preprocessing);
        let (a, b) = (&self.units_per_layer, &other.units_per_layer);
        let common = a.len().min(b.len());
        d += a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).sum::<usize>();
        // an added layer starts at width 1; every unit beyond that is a further edit
        d += a[common..].iter().chain(&b[common..]).sum::<usize>();
        if self.family == Family::MultiLayer {
            d += self.latent_dim.abs_diff(other.latent_dim);
        }
        Some(d)
    }

    /// Same structure over a different observation width.
    pub fn retarget(&self, input_dim: usize) -> Architecture {
        let mut a = self.clone();
        a.input_dim = input_dim;
        if a.family == Family::Tabular {
            a.latent_dim = a.effective_input_dim();
        }
        a
    }
}

fn dense_param_count(dims: &[usize]) -> usize {
    dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

/// Flat trainable parameter vector; layout fixed by the architecture.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrainableParams(pub Vec<f64>);

impl TrainableParams {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Fixed edge-count summary: `[mass, horizontal edges, vertical edges,
/// diagonal edges]`. Square inputs are read as rasters, anything else as a
/// 1-D signal.
pub fn edge_summary(x: &[f64]) -> [f64; FEATURE_DIM] {
    let n = x.len();
    let side = libm::sqrt(n as f64) as usize;
    let mass = x.iter().sum();
    if side >= 2 && side * side == n {
        let at = |r: usize, c: usize| x[r * side + c];
        let (mut h, mut v, mut d) = (0.0, 0.0, 0.0);
        for r in 0..side {
            for c in 0..side {
                if c + 1 < side {
                    h += (at(r, c + 1) - at(r, c)).abs();
                }
                if r + 1 < side {
                    v += (at(r + 1, c) - at(r, c)).abs();
                }
                if r + 1 < side && c + 1 < side {
                    d += (at(r + 1, c + 1) - at(r, c)).abs();
                }
            }
        }
        [mass, h, v, d]
    } else {
        let tv = x.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        [mass, tv, 0.0, 0.0]
    }
}

/// Encoder `e: D -> L` with a discrete internal-state readout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderModel {
    pub arch: Architecture,
    pub params: TrainableParams,
    /// Probability that the readout is replaced by a different state.
    #[serde(default)]
    pub noise_rate: f64,
    /// Latent-space state prototypes (MultiLayer only).
    #[serde(default)]
    pub prototypes: Vec<Vec<f64>>,
}

impl EncoderModel {
    pub fn new(
        arch: Architecture,
        params: TrainableParams,
        noise_rate: f64,
        prototypes: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let m = Self { arch, params, noise_rate, prototypes };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.arch.validate()?;
        if self.params.len() != self.arch.param_count() {
            return Err(shape(format!(
                "architecture needs {} parameters, got {}",
                self.arch.param_count(),
                self.params.len()
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(invalid("noise_rate must lie in [0, 1]"));
        }
        match self.arch.family {
            Family::MultiLayer => {
                if self.prototypes.len() > MAX_STATES {
                    return Err(invalid("too many prototypes"));
                }
                if self.prototypes.iter().any(|p| p.len() != self.arch.latent_dim) {
                    return Err(shape("prototype width must equal latent_dim"));
                }
            }
            _ if !self.prototypes.is_empty() => {
                return Err(invalid("only MultiLayer encoders carry prototypes"));
            }
            _ => {}
        }
        Ok(())
    }

    /// Threshold encoder with explicit intervals `[(lo, hi), ...]`.
    pub fn threshold(intervals: &[(f64, f64)], input_dim: usize, noise_rate: f64) -> Result<Self> {
        let params = intervals.iter().flat_map(|&(lo, hi)| [lo, hi]).collect();
        Self::new(
            Architecture::threshold(intervals.len(), input_dim),
            TrainableParams(params),
            noise_rate,
            Vec::new(),
        )
    }

    /// Number of distinct internal states `t`.
    pub fn state_count(&self) -> usize {
        match self.arch.family {
            Family::MultiLayer => self.prototypes.len().max(1),
            _ => self.arch.discrete_state_count().unwrap_or(1),
        }
    }

    fn features(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.arch.input_dim {
            return Err(shape(format!(
                "observation has {} components, model expects {}",
                x.len(),
                self.arch.input_dim
            )));
        }
        Ok(if self.arch.preprocessing { edge_summary(x).to_vec() } else { x.to_vec() })
    }

    /// Continuous latent coordinates of `x`.
    ///
    /// ThresholdUnit: one 0/1 coordinate per unit. Tabular: bin index per
    /// channel. MultiLayer: the linear latent layer.
    pub fn latent(&self, x: &[f64]) -> Result<Vec<f64>> {
        let f = self.features(x)?;
        let p = self.params.values();
        Ok(match self.arch.family {
            Family::ThresholdUnit => (0..self.arch.units_per_layer[0])
                .map(|k| {
                    let v = f[k % f.len()];
                    if p[2 * k] <= v && v <= p[2 * k + 1] {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
            Family::Tabular => {
                let cuts = self.arch.units_per_layer[0] - 1;
                f.iter()
                    .enumerate()
                    .map(|(c, &v)| p[c * cuts..(c + 1) * cuts].iter().filter(|&&e| e <= v).count() as f64)
                    .collect()
            }
            Family::MultiLayer => forward(&self.arch.layer_dims(), p, &f),
        })
    }

    fn deterministic_state(&self, x: &[f64]) -> Result<usize> {
        let z = self.latent(x)?;
        Ok(match self.arch.family {
            Family::ThresholdUnit => {
                z.iter().enumerate().map(|(k, &b)| usize::from(b > 0.5) << k).sum()
            }
            Family::Tabular => {
                let bins = self.arch.units_per_layer[0];
                z.iter().rev().fold(0, |acc, &b| acc * bins + b as usize)
            }
            Family::MultiLayer => {
                if self.prototypes.is_empty() {
                    return Err(degenerate("MultiLayer encoder has no state prototypes"));
                }
                nearest(&self.prototypes, &z)
            }
        })
    }

    /// Internal state of `x`. The stream `seed` drives readout noise only.
    pub fn encode(&self, x: &[f64], seed: u64) -> Result<usize> {
        let t = self.deterministic_state(x)?;
        if self.noise_rate <= 0.0 {
            return Ok(t);
        }
        let mut s = rng::stream(seed);
        match self.arch.family {
            Family::ThresholdUnit => Ok((0..self.arch.units_per_layer[0]).fold(t, |acc, k| {
                if s.random::<f64>() < self.noise_rate {
                    acc ^ (1 << k)
                } else {
                    acc
                }
            })),
            _ => {
                let n = self.state_count();
                if n > 1 && s.random::<f64>() < self.noise_rate {
                    let other = s.random_range(0..n - 1);
                    Ok(if other >= t { other + 1 } else { other })
                } else {
                    Ok(t)
                }
            }
        }
    }
}

fn nearest(prototypes: &[Vec<f64>], z: &[f64]) -> usize {
    let dist = |p: &Vec<f64>| p.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let mut best = (0, f64::INFINITY);
    for (i, p) in prototypes.iter().enumerate() {
        let d = dist(p);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Hidden layers use `tanh`; the final layer is linear.
fn forward(dims: &[usize], params: &[f64], input: &[f64]) -> Vec<f64> {
    let mut cur = input.to_vec();
    let mut off = 0;
    let layers = dims.len() - 1;
    for (l, w) in dims.windows(2).enumerate() {
        let (n_in, n_out) = (w[0], w[1]);
        let weights = &params[off..off + n_in * n_out];
        let biases = &params[off + n_in * n_out..off + n_in * n_out + n_out];
        off += n_in * n_out + n_out;
        cur = (0..n_out)
            .map(|o| {
                let row = &weights[o * n_in..(o + 1) * n_in];
                let a = row.iter().zip(&cur).map(|(w, x)| w * x).sum::<f64>() + biases[o];
                if l + 1 < layers {
                    a.tanh()
                } else {
                    a
                }
            })
            .collect();
    }
    cur
}

/// Encoder plus a mirror-architecture decoder `G: L -> D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerativeModel {
    pub encoder: EncoderModel,
    pub decoder: TrainableParams,
}

impl GenerativeModel {
    pub fn new(encoder: EncoderModel, decoder: TrainableParams) -> Result<Self> {
        encoder.validate()?;
        if encoder.arch.family != Family::MultiLayer {
            return Err(invalid("generative models use the MultiLayer family"));
        }
        if decoder.len() != encoder.arch.decoder_param_count() {
            return Err(shape(format!(
                "decoder needs {} parameters, got {}",
                encoder.arch.decoder_param_count(),
                decoder.len()
            )));
        }
        Ok(Self { encoder, decoder })
    }

    /// Linear autoencoder with identity encoder and decoder.
    pub fn identity(dim: usize) -> Self {
        let arch = Architecture::multilayer(dim, Vec::new(), dim);
        let p = linear_params(&identity_matrix(dim, 1.0), &alloc::vec![0.0; dim]);
        let encoder = EncoderModel::new(arch, p.clone(), 0.0, Vec::new()).expect("identity encoder");
        Self { encoder, decoder: p }
    }

    /// Identity encoder with a linear decoder `t -> W t + b`.
    pub fn linear_decoder(weights: &[Vec<f64>], bias: &[f64]) -> Result<Self> {
        let dim = bias.len();
        let latent = weights.first().map_or(0, Vec::len);
        if weights.len() != dim || weights.iter().any(|r| r.len() != latent) {
            return Err(shape("decoder weights must be input_dim x latent_dim"));
        }
        let arch = Architecture::multilayer(dim, Vec::new(), latent);
        let enc_w: Vec<Vec<f64>> =
            (0..latent).map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let encoder = EncoderModel::new(
            arch,
            linear_params(&enc_w, &alloc::vec![0.0; latent]),
            0.0,
            Vec::new(),
        )?;
        Self::new(encoder, linear_params(weights, bias))
    }

    pub fn latent_dim(&self) -> usize {
        self.encoder.arch.latent_dim
    }

    pub fn decode(&self, t: &[f64]) -> Result<Vec<f64>> {
        if t.len() != self.latent_dim() {
            return Err(shape(format!(
                "latent point has {} coordinates, decoder expects {}",
                t.len(),
                self.latent_dim()
            )));
        }
        Ok(forward(&self.encoder.arch.decoder_dims(), self.decoder.values(), t))
    }

    /// `G(E(x))`.
    pub fn reconstruct(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.decode(&self.encoder.latent(x)?)
    }
}

pub fn identity_matrix(n: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { scale } else { 0.0 }).collect()).collect()
}

/// Pack one dense layer `out x in` plus biases into the flat layout.
pub fn linear_params(weights: &[Vec<f64>], bias: &[f64]) -> TrainableParams {
    let mut v: Vec<f64> = weights.iter().flatten().copied().collect();
    v.extend_from_slice(bias);
    TrainableParams(v)
}

/// Coefficients of the affine energy model plus the fixed preprocessing cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub alpha_unit: f64,
    pub alpha_weight: f64,
    pub preprocessing_energy: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self { alpha_unit: 1.0, alpha_weight: 0.01, preprocessing_energy: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceCost {
    /// Stored parameter count.
    pub memory_d: f64,
    /// Multiply-accumulates (or comparisons) per encode.
    pub compute_c: f64,
    /// Abstract energy units.
    pub energy_rho: f64,
}

pub fn resource_costs(arch: &Architecture, cost: &CostModel) -> ResourceCost {
    let (memory, compute, weights) = match arch.family {
        Family::ThresholdUnit => {
            let u = arch.units_per_layer[0];
            (2 * u, 2 * u, 0)
        }
        Family::Tabular => {
            let n = arch.param_count();
            (n, n, 0)
        }
        Family::MultiLayer => {
            let w: usize = arch.layer_dims().windows(2).map(|w| w[0] * w[1]).sum();
            (arch.param_count(), w, w)
        }
    };
    let mut c = ResourceCost {
        memory_d: memory as f64,
        compute_c: compute as f64,
        energy_rho: cost.alpha_unit * arch.total_units() as f64 + cost.alpha_weight * weights as f64,
    };
    if arch.preprocessing {
        c.compute_c += arch.input_dim as f64;
        c.energy_rho += cost.preprocessing_energy;
    }
    c
}

/// `max ||G(y) - G(x)|| / ||y - x||` over the supplied latent pairs.
pub fn lipschitz_lower_bound(gen: &GenerativeModel, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    let norm = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let mut best: Option<f64> = None;
    for (x, y) in pairs {
        let dz = norm(x, y);
        if dz == 0.0 {
            continue;
        }
        let ratio = norm(&gen.decode(x)?, &gen.decode(y)?) / dz;
        if !ratio.is_finite() {
            return Err(Error::Numerical(format!("non-finite Lipschitz ratio {ratio}")));
        }
        best = Some(best.map_or(ratio, |b| b.max(ratio)));
    }
    best.ok_or_else(|| degenerate("every latent pair is identical"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn threshold_interval_membership() {
        let m = EncoderModel::threshold(&[(0.0, 1.0)], 1, 0.0).unwrap();
        assert_eq!(m.encode(&[0.5], 1).unwrap(), 1);
        assert_eq!(m.encode(&[2.0], 1).unwrap(), 0);
        assert_eq!(m.encode(&[1.0], 1).unwrap(), 1);
    }

    #[test]
    fn threshold_noise_flip_rate() {
        let m = EncoderModel::threshold(&[(0.0, 1.0)], 1, 0.1).unwrap();
        let flips = (0..10_000u64).filter(|&i| m.encode(&[0.5], rng::split(9, "t", i)).unwrap() == 0).count();
        let rate = flips as f64 / 10_000.0;
        assert!((rate - 0.1).abs() < 0.01, "flip rate {rate}");
    }

    #[test]
    fn noise_one_always_inverts() {
        let m = EncoderModel::threshold(&[(0.0, 1.0)], 1, 1.0).unwrap();
        assert!((0..50).all(|s| m.encode(&[0.5], s).unwrap() == 0));
    }

    #[test]
    fn encode_checks_dimension() {
        let m = EncoderModel::threshold(&[(0.0, 1.0)], 1, 0.0).unwrap();
        assert!(matches!(m.encode(&[0.5, 0.1], 0), Err(Error::Shape(_))));
    }

    #[test]
    fn units_watch_channels_round_robin() {
        let m = EncoderModel::threshold(&[(0.5, 2.0), (0.5, 2.0)], 2, 0.0).unwrap();
        assert_eq!(m.encode(&[1.0, 0.0], 0).unwrap(), 0b01);
        assert_eq!(m.encode(&[0.0, 1.0], 0).unwrap(), 0b10);
        assert_eq!(m.state_count(), 4);
    }

    #[test]
    fn tabular_bins() {
        let arch = Architecture::tabular(3, 1);
        let m = EncoderModel::new(arch, TrainableParams(vec![1.0, 0.0]), 0.0, vec![]).unwrap();
        assert_eq!(m.encode(&[-1.0], 0).unwrap(), 0);
        assert_eq!(m.encode(&[0.5], 0).unwrap(), 1);
        assert_eq!(m.encode(&[3.0], 0).unwrap(), 2);
    }

    #[test]
    fn multilayer_nearest_prototype() {
        let g = GenerativeModel::identity(2);
        let mut e = g.encoder.clone();
        e.prototypes = vec![vec![0.0, 0.0], vec![5.0, 5.0]];
        assert_eq!(e.encode(&[4.0, 4.5], 0).unwrap(), 1);
        e.prototypes.clear();
        assert!(matches!(e.encode(&[4.0, 4.5], 0), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn decode_examples() {
        let id = GenerativeModel::identity(2);
        assert_eq!(id.decode(&[0.3, -1.2]).unwrap(), vec![0.3, -1.2]);

        let constant = GenerativeModel::linear_decoder(&[vec![0.0, 0.0], vec![0.0, 0.0]], &[1.5, -2.0]).unwrap();
        assert_eq!(constant.decode(&[7.0, 3.0]).unwrap(), vec![1.5, -2.0]);

        let twice = GenerativeModel::linear_decoder(&identity_matrix(2, 2.0), &[0.0, 0.0]).unwrap();
        assert_eq!(twice.decode(&[1.0, 1.0]).unwrap(), vec![2.0, 2.0]);
        assert!(matches!(twice.decode(&[1.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn resource_cost_examples() {
        let cm = CostModel { alpha_unit: 1.0, alpha_weight: 0.01, preprocessing_energy: 0.5 };
        assert_eq!(resource_costs(&Architecture::threshold(1, 1), &cm).memory_d, 2.0);
        let ml = Architecture::multilayer(10, vec![4], 2);
        let c = resource_costs(&ml, &cm);
        assert_eq!(c.memory_d, 54.0);
        assert_eq!(c.compute_c, 48.0);
        // 6 units, 48 connection weights (biases are not weights)
        assert_abs_diff_eq!(c.energy_rho, 6.48, epsilon = 1e-12);
    }

    #[test]
    fn adding_a_unit_costs_memory() {
        let cm = CostModel::default();
        for u in 1..6 {
            let a = resource_costs(&Architecture::threshold(u, 1), &cm);
            let b = resource_costs(&Architecture::threshold(u + 1, 1), &cm);
            assert!(b.memory_d > a.memory_d);
            let a = resource_costs(&Architecture::multilayer(5, vec![u], 2), &cm);
            let b = resource_costs(&Architecture::multilayer(5, vec![u + 1], 2), &cm);
            assert!(b.memory_d > a.memory_d);
        }
    }

    #[test]
    fn lipschitz_examples() {
        let pairs = vec![(vec![0.0, 0.0], vec![1.0, 2.0]), (vec![3.0, -1.0], vec![0.5, 0.5])];
        let id = GenerativeModel::identity(2);
        assert_abs_diff_eq!(lipschitz_lower_bound(&id, &pairs).unwrap(), 1.0, epsilon = 1e-12);
        let c = GenerativeModel::linear_decoder(&[vec![0.0, 0.0], vec![0.0, 0.0]], &[1.0, 1.0]).unwrap();
        assert_eq!(lipschitz_lower_bound(&c, &pairs).unwrap(), 0.0);
        let two = GenerativeModel::linear_decoder(&identity_matrix(2, 2.0), &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(lipschitz_lower_bound(&two, &pairs).unwrap(), 2.0, epsilon = 1e-9);
        let same = vec![(vec![1.0, 1.0], vec![1.0, 1.0])];
        assert!(matches!(lipschitz_lower_bound(&two, &same), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn edit_distance_counts_single_changes() {
        let a = Architecture::threshold(1, 1);
        assert_eq!(a.edit_distance(&Architecture::threshold(2, 1)), Some(1));
        assert_eq!(a.edit_distance(&a), Some(0));
        let mut p = a.clone();
        p.preprocessing = true;
        assert_eq!(a.edit_distance(&p), Some(1));
        let m = Architecture::multilayer(3, vec![2], 2);
        assert_eq!(m.edit_distance(&Architecture::multilayer(3, vec![2, 1], 2)), Some(1));
        assert_eq!(m.edit_distance(&Architecture::multilayer(3, vec![2], 3)), Some(1));
        assert_eq!(a.edit_distance(&m), None);
    }

    #[test]
    fn edge_summary_raster_and_signal() {
        let mut img = vec![0.0; 16];
        img[5] = 1.0;
        let f = edge_summary(&img);
        assert_eq!(f, [1.0, 2.0, 2.0, 2.0]);
        assert_eq!(edge_summary(&[0.7]), [0.7, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn param_count_is_checked() {
        let arch = Architecture::threshold(2, 1);
        assert!(EncoderModel::new(arch, TrainableParams(vec![0.0; 3]), 0.0, vec![]).is_err());
    }
}
