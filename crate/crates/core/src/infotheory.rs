//! Discrete information measures over empirical joint tables.
//!
//! All logarithms are base 2, so entropies and mutual information are in
//! bits. Cells with zero probability contribute nothing (`0 log 0 = 0`).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{degenerate, invalid, shape, Error, Result};
use crate::models::EncoderModel;
use crate::rng;
use crate::worlds::Sample;

/// Tolerance for "sums to one".
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A discrete distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyEvidence);
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(invalid("probabilities must be finite and non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self(probs))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(p: ProbabilityVector) -> Self {
        p.0
    }
}

/// Mutual information in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FitnessValue(f64);

impl FitnessValue {
    pub const ZERO: FitnessValue = FitnessValue(0.0);

    pub fn bits(self) -> f64 {
        self.0
    }
}

/// `-p log2 p`, zero at `p = 0`.
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits.
pub fn entropy(p: &ProbabilityVector) -> f64 {
    p.probs().iter().map(|&x| plogp(x)).sum::<f64>().max(0.0)
}

/// Rectangular table of non-negative trial counts, rows = internal states,
/// columns = external states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
}

impl CountTable {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, counts: alloc::vec![0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(Error::EmptyEvidence);
        }
        if rows.iter().any(|r| r.len() != cols) {
            return Err(shape("count table is not rectangular"));
        }
        Ok(Self { rows: rows.len(), cols, counts: rows.iter().flatten().copied().collect() })
    }

    pub fn increment(&mut self, t: usize, x: usize) {
        self.counts[t * self.cols + x] += 1;
    }

    pub fn get(&self, t: usize, x: usize) -> u64 {
        self.counts[t * self.cols + x]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

/// The information model: a normalized joint table `P(t, x)` with rows
/// indexed by internal state `t` and columns by external state `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointModel {
    rows: usize,
    cols: usize,
    table: Vec<f64>,
    t_labels: Vec<String>,
    x_labels: Vec<String>,
}

fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

impl JointModel {
    /// Build from row-major probabilities; validates non-negativity and unit mass.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(Error::EmptyEvidence);
        }
        if rows.iter().any(|r| r.len() != cols) {
            return Err(shape("joint table is not rectangular"));
        }
        let table: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_flat(rows.len(), cols, table)
    }

    fn from_flat(rows: usize, cols: usize, table: Vec<f64>) -> Result<Self> {
        if table.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(invalid("joint cells must be finite and non-negative"));
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(invalid(format!("joint table sums to {total}, not 1")));
        }
        Ok(Self {
            rows,
            cols,
            table,
            t_labels: default_labels("t", rows),
            x_labels: default_labels("x", cols),
        })
    }

    /// Joint of an external prior `P(x)` pushed through a channel `P(t | x)`,
    /// given as `channel[x][t]`.
    pub fn from_channel(prior: &ProbabilityVector, channel: &[Vec<f64>]) -> Result<Self> {
        if channel.len() != prior.len() {
            return Err(shape("channel needs one row per external state"));
        }
        let states = channel.first().map_or(0, Vec::len);
        if states == 0 || channel.iter().any(|c| c.len() != states) {
            return Err(shape("channel rows must share one internal-state count"));
        }
        let mut table = alloc::vec![0.0; states * prior.len()];
        for (x, (&px, row)) in prior.probs().iter().zip(channel).enumerate() {
            for (t, &ptx) in row.iter().enumerate() {
                table[t * prior.len() + x] = px * ptx;
            }
        }
        Self::from_flat(states, prior.len(), table)
    }

    /// Binary system that reports the external state correctly with
    /// probability `correctness` in either state.
    pub fn binary_channel(prior: &ProbabilityVector, correctness: f64) -> Result<Self> {
        if prior.len() != 2 || !(0.0..=1.0).contains(&correctness) {
            return Err(invalid("binary channel needs two states and correctness in [0,1]"));
        }
        let c = correctness;
        Self::from_channel(prior, &[alloc::vec![c, 1.0 - c], alloc::vec![1.0 - c, c]])
    }

    pub fn with_labels(mut self, t_labels: Vec<String>, x_labels: Vec<String>) -> Result<Self> {
        if t_labels.len() != self.rows || x_labels.len() != self.cols {
            return Err(shape("label count does not match table"));
        }
        self.t_labels = t_labels;
        self.x_labels = x_labels;
        Ok(self)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, t: usize, x: usize) -> f64 {
        self.table[t * self.cols + x]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.table[t * self.cols..(t + 1) * self.cols]
    }

    pub fn t_labels(&self) -> &[String] {
        &self.t_labels
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }

    pub fn transpose(&self) -> Self {
        let mut table = alloc::vec![0.0; self.table.len()];
        for t in 0..self.rows {
            for x in 0..self.cols {
                table[x * self.rows + t] = self.get(t, x);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            table,
            t_labels: self.x_labels.clone(),
            x_labels: self.t_labels.clone(),
        }
    }

    // Row sums accumulate over columns in index order and column sums over
    // rows in index order, so the marginals of a transpose are bit-identical.
    fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|t| (0..self.cols).fold(0.0, |acc, x| acc + self.get(t, x))).collect()
    }

    fn col_sums(&self) -> Vec<f64> {
        (0..self.cols).map(|x| (0..self.rows).fold(0.0, |acc, t| acc + self.get(t, x))).collect()
    }

    /// `P_i(t)`.
    pub fn t_marginal(&self) -> ProbabilityVector {
        ProbabilityVector(self.row_sums())
    }

    /// `P_s(x)`.
    pub fn x_marginal(&self) -> ProbabilityVector {
        ProbabilityVector(self.col_sums())
    }
}

/// Turn raw trial counts into a joint model.
pub fn normalize_counts(counts: &CountTable) -> Result<JointModel> {
    normalize_counts_smoothed(counts, 0.0)
}

/// Add-`alpha` smoothing before normalizing; `alpha = 0` is raw frequencies.
pub fn normalize_counts_smoothed(counts: &CountTable, alpha: f64) -> Result<JointModel> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(invalid("smoothing alpha must be finite and non-negative"));
    }
    if counts.total() == 0 {
        return Err(Error::EmptyEvidence);
    }
    let total = counts.total() as f64 + alpha * counts.counts.len() as f64;
    let table = counts.counts.iter().map(|&c| (c as f64 + alpha) / total).collect();
    JointModel::from_flat(counts.rows, counts.cols, table)
}

/// Information fitness of a joint model: `sum P(t,x) log2(P(t,x) / (P(t) P(x)))`.
///
/// Cell terms are summed in sorted order so the result is invariant, bit for
/// bit, under transposing the table.
pub fn mutual_information(m: &JointModel) -> FitnessValue {
    let pt = m.row_sums();
    let px = m.col_sums();
    let mut terms: Vec<f64> = Vec::with_capacity(m.table.len());
    for (t, &p_t) in pt.iter().enumerate() {
        for (x, &p_x) in px.iter().enumerate() {
            let p = m.get(t, x);
            if p > 0.0 {
                terms.push(p * (p / (p_t * p_x)).log2());
            }
        }
    }
    terms.sort_by(f64::total_cmp);
    FitnessValue(terms.iter().sum::<f64>().max(0.0))
}

/// Encode every labeled sample, tally `(t, x)` and return the empirical joint
/// together with its mutual information.
///
/// Sample `i` is encoded with the stream `split(seed, "encode", i)`.
pub fn fitness_of_model(
    encoder: &EncoderModel,
    samples: &[Sample],
    seed: u64,
) -> Result<(JointModel, FitnessValue)> {
    if samples.is_empty() {
        return Err(Error::EmptyEvidence);
    }
    let states = encoder.state_count();
    let labels = samples.iter().map(|s| s.label).max().unwrap_or(0) + 1;
    let mut counts = CountTable::zeros(states, labels);
    for (i, s) in samples.iter().enumerate() {
        let t = encoder.encode(&s.obs, rng::split(seed, "encode", i as u64))?;
        counts.increment(t, s.label);
    }
    let joint = normalize_counts(&counts)?;
    let f = mutual_information(&joint);
    Ok((joint, f))
}

/// Upper bound check `MI <= min(H(t), H(x)) + tol`.
pub fn within_entropy_bound(m: &JointModel, tol: f64) -> bool {
    let f = mutual_information(m).bits();
    f <= entropy(&m.t_marginal()).min(entropy(&m.x_marginal())) + tol
}

/// Convenience for callers that already hold a count table and need to make
/// sure at least two external states are present.
pub fn require_two_labels(samples: &[Sample]) -> Result<()> {
    let first = samples.first().ok_or(Error::EmptyEvidence)?.label;
    if samples.iter().all(|s| s.label == first) {
        return Err(degenerate("only one external state present"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let c = CountTable::from_rows(&[vec![9, 1], vec![1, 9]]).unwrap();
        let m = normalize_counts(&c).unwrap();
        assert_eq!(m.row(0), &[0.45, 0.05]);
        assert_eq!(m.row(1), &[0.05, 0.45]);

        let c = CountTable::from_rows(&[vec![63, 7], vec![3, 27]]).unwrap();
        let m = normalize_counts(&c).unwrap();
        assert_eq!(m.row(0), &[0.63, 0.07]);
        assert_eq!(m.row(1), &[0.03, 0.27]);
    }

    #[test]
    fn all_zero_counts_are_empty_evidence() {
        let c = CountTable::from_rows(&[vec![0, 0], vec![0, 0]]).unwrap();
        assert_eq!(normalize_counts(&c), Err(Error::EmptyEvidence));
    }

    #[test]
    fn ragged_counts_rejected() {
        assert!(matches!(
            CountTable::from_rows(&[vec![1, 2], vec![3]]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn smoothing_is_opt_in() {
        let c = CountTable::from_rows(&[vec![2, 0], vec![0, 2]]).unwrap();
        let raw = normalize_counts(&c).unwrap();
        assert_eq!(raw.get(0, 1), 0.0);
        let smooth = normalize_counts_smoothed(&c, 1.0).unwrap();
        assert_abs_diff_eq!(smooth.get(0, 1), 1.0 / 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(smooth.get(0, 0), 3.0 / 8.0, epsilon = 1e-15);
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&pv(&[0.5, 0.5])), 1.0, epsilon = 1e-15);
        assert_eq!(entropy(&pv(&[1.0, 0.0])), 0.0);
        assert_abs_diff_eq!(entropy(&pv(&[0.7, 0.3])), 0.881_290_899_230_692_7, epsilon = 1e-12);
    }

    #[test]
    fn zero_log_zero_is_zero() {
        assert_eq!(plogp(0.0), 0.0);
        let m = JointModel::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_abs_diff_eq!(mutual_information(&m).bits(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn probability_vector_invariants() {
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbabilityVector::new(vec![]).is_err());
    }

    #[test]
    fn mi_examples() {
        let prod = JointModel::from_rows(&[vec![0.7 * 0.4, 0.3 * 0.4], vec![0.7 * 0.6, 0.3 * 0.6]])
            .unwrap();
        assert!(mutual_information(&prod).bits() < 1e-12);

        let diag = JointModel::from_rows(&[vec![0.7, 0.0], vec![0.0, 0.3]]).unwrap();
        assert_abs_diff_eq!(mutual_information(&diag).bits(), 0.881_290_899_230_692_6, epsilon = 1e-12);

        let m1 = JointModel::from_rows(&[vec![0.63, 0.07], vec![0.03, 0.27]]).unwrap();
        assert_abs_diff_eq!(mutual_information(&m1).bits(), 0.455_823_111_383_748_65, epsilon = 1e-12);
    }

    #[test]
    fn binary_channel_builds_the_two_state_models() {
        let prior = pv(&[0.7, 0.3]);
        let mp = JointModel::binary_channel(&prior, 1.0).unwrap();
        let m1 = JointModel::binary_channel(&prior, 0.9).unwrap();
        let m2 = JointModel::binary_channel(&prior, 0.5).unwrap();
        assert_abs_diff_eq!(m1.get(0, 0), 0.63, epsilon = 1e-15);
        assert_abs_diff_eq!(m1.get(1, 0), 0.07, epsilon = 1e-15);
        let (fp, f1, f2) =
            (mutual_information(&mp), mutual_information(&m1), mutual_information(&m2));
        assert!(fp > f1 && f1 > f2);
        assert!(f2.bits() < 1e-12);
    }

    #[test]
    fn transpose_is_exactly_symmetric() {
        let m = JointModel::from_rows(&[vec![0.1, 0.2, 0.05], vec![0.3, 0.15, 0.2]]).unwrap();
        assert_eq!(mutual_information(&m), mutual_information(&m.transpose()));
        assert!(within_entropy_bound(&m, 1e-9));
    }

    #[test]
    fn labels_must_match() {
        let m = JointModel::from_rows(&[vec![0.5, 0.5]]).unwrap();
        assert!(m.clone().with_labels(vec!["a".into()], vec!["b".into()]).is_err());
        let m = m.with_labels(vec!["T".into()], vec!["x".into(), "y".into()]).unwrap();
        assert_eq!(m.t_labels()[0], "T");
    }
}
