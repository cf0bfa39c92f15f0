//! File formats: joint tables, model files and latent maps.

use std::path::Path;

use infofit_core::conceptualization::LatentSample;
use infofit_core::infotheory::JointModel;
use infofit_core::models::{Architecture, Connectivity, EncoderModel, Family, TrainableParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Joint table as CSV: one row per internal state, one column per external
/// state, labels in the header row and first column.
pub fn joint_to_csv(m: &JointModel) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![String::from("t\\x")];
    header.extend(m.x_labels().iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (t, label) in m.t_labels().iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend(m.row(t).iter().map(|v| v.to_string()));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn joint_from_csv(text: &str, path: &Path) -> CliResult<JointModel> {
    let bad = |message: String| CliError::Format { path: path.to_path_buf(), message };
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let x_labels: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().skip(1).map(String::from).collect();
    let mut t_labels = Vec::new();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let mut fields = rec.iter();
        t_labels.push(fields.next().unwrap_or_default().to_string());
        rows.push(
            fields
                .map(|f| f.trim().parse::<f64>().map_err(|e| bad(format!("{f:?}: {e}"))))
                .collect::<CliResult<Vec<f64>>>()?,
        );
    }
    Ok(JointModel::from_rows(&rows)?.with_labels(t_labels, x_labels)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDims {
    pub units_per_layer: Vec<usize>,
    pub latent_dim: usize,
    pub input_dim: usize,
    #[serde(default)]
    pub connectivity: Connectivity,
    #[serde(default)]
    pub preprocessing: bool,
}

/// On-disk encoder: `{family, dims, params, noise_rate, prototypes}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub family: Family,
    pub dims: ModelDims,
    pub params: Vec<f64>,
    pub noise_rate: f64,
    #[serde(default)]
    pub prototypes: Vec<Vec<f64>>,
}

impl From<&EncoderModel> for ModelFile {
    fn from(m: &EncoderModel) -> Self {
        let a = &m.arch;
        Self {
            family: a.family,
            dims: ModelDims {
                units_per_layer: a.units_per_layer.clone(),
                latent_dim: a.latent_dim,
                input_dim: a.input_dim,
                connectivity: a.connectivity,
                preprocessing: a.preprocessing,
            },
            params: m.params.values().to_vec(),
            noise_rate: m.noise_rate,
            prototypes: m.prototypes.clone(),
        }
    }
}

impl TryFrom<ModelFile> for EncoderModel {
    type Error = infofit_core::Error;

    fn try_from(f: ModelFile) -> infofit_core::Result<Self> {
        let arch = Architecture {
            family: f.family,
            units_per_layer: f.dims.units_per_layer,
            latent_dim: f.dims.latent_dim,
            input_dim: f.dims.input_dim,
            connectivity: f.dims.connectivity,
            preprocessing: f.dims.preprocessing,
        };
        EncoderModel::new(arch, TrainableParams(f.params), f.noise_rate, f.prototypes)
    }
}

pub fn model_to_json(m: &EncoderModel) -> String {
    serde_json::to_string_pretty(&ModelFile::from(m)).expect("models serialize") + "\n"
}

pub fn model_from_json(text: &str, path: &Path) -> CliResult<EncoderModel> {
    let f: ModelFile =
        serde_json::from_str(text).map_err(|e| CliError::Format { path: path.to_path_buf(), message: e.to_string() })?;
    Ok(EncoderModel::try_from(f)?)
}

/// Latent map as CSV rows `(z0, ..., z{k-1}, label)`.
pub fn latents_to_csv(latents: &[LatentSample]) -> String {
    let dim = latents.first().map_or(0, |l| l.coords.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (0..dim).map(|i| format!("z{i}")).collect();
    header.push("label".into());
    w.write_record(&header).expect("in-memory write");
    for l in latents {
        let mut row: Vec<String> = l.coords.iter().map(|c| c.to_string()).collect();
        row.push(l.label.to_string());
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}
