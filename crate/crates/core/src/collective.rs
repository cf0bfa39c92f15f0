//! Population fitness accounting and communication between individuals.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, shape, Error, Result};

/// Individual fitness values of a population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FitnessRoster(Vec<f64>);

impl FitnessRoster {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyEvidence);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("fitness values must be finite"));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `F_x`.
    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `F_a`.
    pub fn mean(&self) -> f64 {
        total_fitness(self) / self.0.len() as f64
    }
}

impl TryFrom<Vec<f64>> for FitnessRoster {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FitnessRoster> for Vec<f64> {
    fn from(r: FitnessRoster) -> Self {
        r.0
    }
}

/// `F_t = sum F(x) = N F_a`, with compensated summation so that totals of
/// repeated values are exact where the true sum is representable.
pub fn total_fitness(r: &FitnessRoster) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for &v in &r.0 {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + carry
}

/// Instruction from the best individual: `F(x) <- F(x) + tau (F_x - F(x))`.
/// `tau = 1` copies the best fitness to everyone.
pub fn communicate(r: &FitnessRoster, tau: f64) -> Result<FitnessRoster> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(invalid("tau must lie in [0, 1]"));
    }
    let best = r.max();
    let values = r
        .0
        .iter()
        .map(|&f| {
            if tau == 1.0 {
                best
            } else {
                (f + tau * (best - f)).clamp(f, best)
            }
        })
        .collect();
    Ok(FitnessRoster(values))
}

/// Average per-individual gain `G_com = (F_t(after) - F_t(before)) / N`.
pub fn communication_gain(before: &FitnessRoster, after: &FitnessRoster) -> Result<f64> {
    if before.len() != after.len() {
        return Err(shape("rosters differ in population size"));
    }
    Ok((total_fitness(after) - total_fitness(before)) / before.len() as f64)
}
