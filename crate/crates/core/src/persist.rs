//! Model archives: a self-describing JSON document per fitted model.
//!
//! Reals are written in shortest round-trip form and parsed with correct
//! rounding, so a reloaded model predicts bit-for-bit like the original.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "model_kind": "linear",
//!   "hyperparams": { "kind": "linear", "lambda": 0.0 },
//!   "seed": 42,
//!   "n_features": 4,
//!   "scaler": { "mean": [...], "std": [...] },
//!   "parameters": { "kind": "linear", "coefficients": [...], "intercept": 0.61 },
//!   "training_meta": null
//! }
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::domain::{Hyperparams, ModelKind};
use crate::error::{Error, Result};
use crate::ingest::Scaler;
use crate::models::{FittedModel, ModelParams, RegressorSpec, TrainingMeta};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArchive {
    pub schema_version: u64,
    pub model_kind: ModelKind,
    pub hyperparams: Hyperparams,
    pub seed: u64,
    pub n_features: usize,
    pub scaler: Scaler,
    pub parameters: ModelParams,
    pub training_meta: Option<TrainingMeta>,
}

impl From<&FittedModel> for ModelArchive {
    fn from(m: &FittedModel) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            model_kind: m.kind(),
            hyperparams: m.spec.hyperparams.clone(),
            seed: m.spec.seed,
            n_features: m.n_features,
            scaler: m.scaler.clone(),
            parameters: m.params.clone(),
            training_meta: m.training_meta,
        }
    }
}

impl ModelArchive {
    pub fn into_model(self) -> Result<FittedModel> {
        let kind = self.model_kind;
        if self.parameters.kind() != kind || self.hyperparams.kind() != kind {
            return Err(Error::PayloadMismatch(kind));
        }
        self.hyperparams.validate()?;
        if !self.payload_is_consistent() {
            return Err(Error::PayloadMismatch(kind));
        }
        Ok(FittedModel {
            spec: RegressorSpec {
                hyperparams: self.hyperparams,
                seed: self.seed,
            },
            scaler: self.scaler,
            n_features: self.n_features,
            params: self.parameters,
            training_meta: self.training_meta,
        })
    }

    fn payload_is_consistent(&self) -> bool {
        let p = self.n_features;
        if self.scaler.mean.len() != p
            || self.scaler.std.len() != p
            || self.scaler.std.iter().any(|&s| s.is_nan() || s <= 0.0)
        {
            return false;
        }
        match &self.parameters {
            ModelParams::Linear(m) => m.coefficients.len() == p,
            ModelParams::Knn(m) => {
                m.train_features.ncols() == p
                    && m.train_features.nrows() == m.train_labels.len()
                    && m.k >= 1
                    && m.k <= m.train_labels.len()
            }
            ModelParams::Tree(t) => t.is_well_formed(p),
            ModelParams::Forest(f) => {
                !f.trees.is_empty()
                    && f.trees.len() == f.tree_seeds.len()
                    && f.trees.iter().all(|t| t.is_well_formed(p))
            }
            ModelParams::Mlp(net) => {
                let sizes = net.sizes();
                !net.layers.is_empty()
                    && sizes[0] == p
                    && sizes.last() == Some(&1)
                    && net.layers.windows(2).all(|w| w[0].out_dim == w[1].in_dim)
                    && net.layers.iter().all(|l| {
                        l.weights.len() == l.in_dim * l.out_dim && l.biases.len() == l.out_dim
                    })
            }
        }
    }
}

pub fn to_string(model: &FittedModel) -> String {
    serde_json::to_string_pretty(&ModelArchive::from(model)).expect("archive is serializable")
}

/// Parses an archive document. `origin` only labels errors.
pub fn from_str(text: &str, origin: &Path) -> Result<FittedModel> {
    let archive_err = |source| Error::Archive {
        path: origin.to_path_buf(),
        source,
    };
    let value: Value = serde_json::from_str(text).map_err(archive_err)?;
    match value.get("schema_version").and_then(Value::as_u64) {
        Some(SCHEMA_VERSION) => {}
        Some(v) => return Err(Error::UnsupportedVersion(v)),
        None => return Err(Error::UnsupportedVersion(0)),
    }
    if let Some(kind) = value.get("model_kind").and_then(Value::as_str) {
        kind.parse::<ModelKind>()?;
    }
    let archive: ModelArchive = serde_json::from_value(value).map_err(archive_err)?;
    archive.into_model()
}

pub fn save(model: &FittedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = to_string(model);
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<FittedModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_str(&text, path)
}
