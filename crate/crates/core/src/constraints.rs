//! Resource constraints on an architecture: feasibility, the Lagrangian of
//! the constrained fitness problem, KKT residuals and the unit-addition
//! fitness-gain bound.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::models::{resource_costs, Architecture, CostModel};

/// How the conceptualization requirement `c >= c_min` is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConceptualizationMode {
    /// Replace it by the dimensionality bound `latent_dim <= d_con`.
    #[default]
    Dimensionality,
    /// Compare a measured separation score against `c_min`.
    SeparationScore,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    /// Memory bound on stored parameters.
    pub d_max: f64,
    /// Combined compression + conceptualization bound on latent width.
    pub d_con: f64,
    /// Energy bound.
    pub rho_max: f64,
    #[serde(default)]
    pub c_min: Option<f64>,
    #[serde(default)]
    pub mode: ConceptualizationMode,
}

impl ConstraintSet {
    pub fn new(d_max: f64, d_con: f64, rho_max: f64) -> Result<Self> {
        let cs = Self { d_max, d_con, rho_max, c_min: None, mode: ConceptualizationMode::Dimensionality };
        cs.validate()?;
        Ok(cs)
    }

    /// Bounds large enough never to bind.
    pub fn unbounded() -> Self {
        Self { d_max: 1e12, d_con: 1e12, rho_max: 1e12, c_min: None, mode: ConceptualizationMode::Dimensionality }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.d_max) && ok(self.d_con) && ok(self.rho_max)) || self.c_min.is_some_and(|c| !ok(c)) {
            return Err(invalid("constraint bounds must be finite and positive"));
        }
        if self.mode == ConceptualizationMode::SeparationScore && self.c_min.is_none() {
            return Err(invalid("separation-score mode needs c_min"));
        }
        Ok(())
    }
}

/// Named violated constraint.
pub type ConstraintName = &'static str;

pub const MEMORY: ConstraintName = "memory";
pub const CONCEPTUALIZATION: ConstraintName = "conceptualization";
pub const ENERGY: ConstraintName = "energy";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub violations: Vec<ConstraintName>,
}

/// Closed inequalities: a value exactly on its bound is feasible.
pub fn feasible(arch: &Architecture, cs: &ConstraintSet, costs: &CostModel) -> Feasibility {
    feasible_with_score(arch, cs, costs, None)
}

/// As [`feasible`]; in separation-score mode a missing score counts as a
/// conceptualization violation.
pub fn feasible_with_score(
    arch: &Architecture,
    cs: &ConstraintSet,
    costs: &CostModel,
    separation: Option<f64>,
) -> Feasibility {
    let rc = resource_costs(arch, costs);
    let mut violations = Vec::new();
    if rc.memory_d > cs.d_max {
        violations.push(MEMORY);
    }
    let concept_ok = match cs.mode {
        ConceptualizationMode::Dimensionality => arch.latent_dim as f64 <= cs.d_con,
        ConceptualizationMode::SeparationScore => {
            separation.zip(cs.c_min).is_some_and(|(s, c)| s >= c)
        }
    };
    if !concept_ok {
        violations.push(CONCEPTUALIZATION);
    }
    if rc.energy_rho > cs.rho_max {
        violations.push(ENERGY);
    }
    Feasibility { feasible: violations.is_empty(), violations }
}

/// Lagrange multipliers; all must be non-negative.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Multipliers {
    /// Multiplier of the dimensionality bound `d(lambda) <= d_con`.
    pub eta_con: f64,
    /// Remaining multipliers: `[energy, memory]`; missing entries are zero.
    pub mu_k: Vec<f64>,
}

impl Multipliers {
    pub fn new(eta_con: f64, mu_k: Vec<f64>) -> Result<Self> {
        let m = Self { eta_con, mu_k };
        if !m.dual_feasible() {
            return Err(invalid("multipliers must be finite and non-negative"));
        }
        Ok(m)
    }

    pub fn energy(&self) -> f64 {
        self.mu_k.first().copied().unwrap_or(0.0)
    }

    pub fn memory(&self) -> f64 {
        self.mu_k.get(1).copied().unwrap_or(0.0)
    }

    pub fn dual_feasible(&self) -> bool {
        core::iter::once(&self.eta_con).chain(&self.mu_k).all(|m| m.is_finite() && *m >= 0.0)
    }
}

/// Signed constraint values `g(lambda) - bound`; non-positive means satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintValues {
    pub dimensionality: f64,
    pub energy: f64,
    pub memory: f64,
}

pub fn constraint_values(arch: &Architecture, cs: &ConstraintSet, costs: &CostModel) -> ConstraintValues {
    let rc = resource_costs(arch, costs);
    ConstraintValues {
        dimensionality: arch.latent_dim as f64 - cs.d_con,
        energy: rc.energy_rho - cs.rho_max,
        memory: rc.memory_d - cs.d_max,
    }
}

/// `F - eta (d - d_con) - mu_rho (rho - rho_max) - mu_d (memory - d_max)`
/// with unclamped signed slacks.
pub fn lagrangian(fitness: f64, g: &ConstraintValues, m: &Multipliers) -> f64 {
    fitness - m.eta_con * g.dimensionality - m.energy() * g.energy - m.memory() * g.memory
}

/// Convenience form of [`lagrangian`] evaluated at an architecture.
pub fn lagrangian_at(
    fitness: f64,
    arch: &Architecture,
    cs: &ConstraintSet,
    costs: &CostModel,
    m: &Multipliers,
) -> f64 {
    lagrangian(fitness, &constraint_values(arch, cs, costs), m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub stationarity_residual: f64,
    pub complementary_slackness_residual: f64,
    pub primal_feasible: bool,
    pub dual_feasible: bool,
}

impl KktReport {
    pub fn total_residual(&self) -> f64 {
        self.stationarity_residual + self.complementary_slackness_residual
    }
}

/// Residuals of the extremum conditions along a scalar structural coordinate.
///
/// `gradients = (dd/dlambda, dp/dlambda)`; `slacks = (memory, energy)` are
/// `bound - value`, so a negative slack is a violated constraint. `eta_con`
/// pairs with the resource gradient and the energy multiplier with the
/// physical-cost gradient.
pub fn kkt_check(
    objective_gradient: f64,
    gradients: (f64, f64),
    m: &Multipliers,
    slacks: (f64, f64),
) -> Result<KktReport> {
    let all = [objective_gradient, gradients.0, gradients.1, slacks.0, slacks.1];
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite KKT input {all:?}")));
    }
    let stationarity = (objective_gradient - m.eta_con * gradients.0 - m.energy() * gradients.1).abs();
    let slackness = (m.eta_con * slacks.0).abs() + (m.energy() * slacks.1).abs();
    Ok(KktReport {
        stationarity_residual: stationarity,
        complementary_slackness_residual: slackness,
        primal_feasible: slacks.0 >= 0.0 && slacks.1 >= 0.0,
        dual_feasible: m.dual_feasible(),
    })
}

/// Central finite difference with step `h`; the structural coordinate is
/// an effective unit count, so callers use `h = 1`.
pub fn finite_difference(f: impl Fn(f64) -> f64, at: f64, h: f64) -> f64 {
    (f(at + h) - f(at - h)) / (2.0 * h)
}

/// Largest per-unit fitness gain allowed at a boundary extremum:
/// `eta_c * G_d + alpha_c`.
pub fn fitness_gain_bound(eta_c: f64, g_d: f64, alpha_c: f64) -> Result<f64> {
    if !(eta_c.is_finite() && eta_c >= 0.0) {
        return Err(invalid("eta_c must be non-negative"));
    }
    Ok(eta_c * g_d + alpha_c)
}
