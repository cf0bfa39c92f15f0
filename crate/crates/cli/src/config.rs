//! Run configuration: one JSON document with a versioned `schema` field.

use std::fs;
use std::path::{Path, PathBuf};

use infofit_core::conceptualization::EnsembleConfig;
use infofit_core::constraints::ConstraintSet;
use infofit_core::evolution::{EvolutionConfig, VariationKind};
use infofit_core::models::Architecture;
use infofit_core::training::TrainBudget;
use infofit_core::worlds::{SurvivalParams, World};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA: &str = "infofit.run/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    /// Root seed; every random stream of a run is split from it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub world: Option<World>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Architecture>,
    #[serde(default = "ConstraintSet::unbounded")]
    pub constraints: ConstraintSet,
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generations: Option<u64>,
    /// World chain for staged evolution; replaces `world` and `generations`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<Stage>,
    #[serde(default)]
    pub fitness: FitnessSection,
    #[serde(default)]
    pub conceptualize: ConceptualizeSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collective: Option<CollectiveSection>,
    #[serde(default)]
    pub survival: SurvivalSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage {
    pub world: World,
    pub generations: u64,
    /// Replaces `evolution.allowed_variations` for this stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed_variations: Option<Vec<VariationKind>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitnessSection {
    pub samples: usize,
    pub budget: TrainBudget,
    /// Prototype count for MultiLayer encoders.
    pub states: usize,
    /// Correctness of the reference binary-channel model.
    pub correctness: f64,
}

impl Default for FitnessSection {
    fn default() -> Self {
        Self {
            samples: 1000,
            budget: TrainBudget { max_evaluations: 500, step_scale: 0.5, seed: 0 },
            states: 2,
            correctness: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConceptualizeSection {
    pub ensemble: EnsembleConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectiveSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roster: Option<Vec<f64>>,
    /// JSON array or whitespace/comma separated numbers; relative paths
    /// resolve against the config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roster_file: Option<PathBuf>,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurvivalSection {
    pub episodes: usize,
    pub max_steps: usize,
    pub endurance: usize,
    pub move_range: f64,
    /// Samples used to fit the interval model.
    pub fit_samples: usize,
}

impl Default for SurvivalSection {
    fn default() -> Self {
        let p = SurvivalParams::default();
        Self { episodes: 100, max_steps: 100, endurance: p.endurance, move_range: p.move_range, fit_samples: 1000 }
    }
}

impl SurvivalSection {
    pub fn params(&self) -> SurvivalParams {
        SurvivalParams { endurance: self.endurance, move_range: self.move_range }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        if cfg.schema != SCHEMA {
            return Err(CliError::config(format!("unsupported schema {:?}, expected {SCHEMA:?}", cfg.schema)));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize") + "\n"
    }

    pub fn world(&self) -> CliResult<&World> {
        self.world.as_ref().ok_or_else(|| CliError::config("config has no world"))
    }

    pub fn model(&self) -> CliResult<&Architecture> {
        self.model.as_ref().ok_or_else(|| CliError::config("config has no model"))
    }
}

/// Roster values from the config, reading `roster_file` when given.
pub fn load_roster(section: &CollectiveSection, base: &Path) -> CliResult<Vec<f64>> {
    let values = match (&section.roster, &section.roster_file) {
        (Some(v), None) => v.clone(),
        (None, Some(file)) => {
            let path = if file.is_absolute() { file.clone() } else { base.join(file) };
            let text = fs::read_to_string(&path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            parse_roster(&text).map_err(|message| CliError::Format { path, message })?
        }
        (Some(_), Some(_)) => return Err(CliError::config("give either roster or roster_file, not both")),
        (None, None) => return Err(CliError::config("collective needs roster or roster_file")),
    };
    if values.is_empty() {
        return Err(CliError::config("roster is empty"));
    }
    Ok(values)
}

fn parse_roster(text: &str) -> Result<Vec<f64>, String> {
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed).map_err(|e| e.to_string());
    }
    trimmed
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = RunConfig::from_json(r#"{"schema": "infofit.run/1"}"#).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.survival.episodes, 100);
        assert!(cfg.world().is_err());
    }

    #[test]
    fn wrong_schema_is_a_config_error() {
        let e = RunConfig::from_json(r#"{"schema": "other/9"}"#).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(RunConfig::from_json(r#"{"schema": "infofit.run/1", "sed": 3}"#).is_err());
    }

    #[test]
    fn config_round_trips() {
        let text = r#"{"schema": "infofit.run/1", "seed": 4,
            "world": {"kind": "logic", "function": "xor", "exhaustive_corners": true},
            "model": {"family": "threshold_unit", "units_per_layer": [1], "latent_dim": 1, "input_dim": 2},
            "generations": 3}"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn roster_text_forms() {
        assert_eq!(parse_roster("[0.5, 0.9]").unwrap(), vec![0.5, 0.9]);
        assert_eq!(parse_roster("0.5\n0.9, 0.1").unwrap(), vec![0.5, 0.9, 0.1]);
        assert!(parse_roster("0.5 x").is_err());
        let s = CollectiveSection { roster: Some(vec![]), roster_file: None, tau: 1.0 };
        assert_eq!(load_roster(&s, Path::new(".")).unwrap_err().exit_code(), 2);
    }
}
