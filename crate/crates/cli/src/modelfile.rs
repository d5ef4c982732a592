//! Persisted model: scaler, SVM, calibration and provenance in one JSON
//! document.

use std::path::Path;

use artauth_core::features::FeatureConfig;
use artauth_core::fusion::Scaler;
use artauth_core::model::{AuthModel, ModalityView};
use artauth_core::ocsvm::OcSvm;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub train_score_mean: f64,
    pub train_score_std: f64,
    pub z_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
    pub tool_version: String,
    pub training_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub view: ModalityView,
    /// Column names the model expects, in order.
    pub schema: Vec<String>,
    pub feature_config: FeatureConfig,
    pub scaler: Scaler,
    pub svm: OcSvm,
    pub calibration: Calibration,
    pub provenance: Provenance,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: Option<u32>,
}

impl ModelFile {
    pub fn new(
        model: AuthModel,
        view: ModalityView,
        schema: Vec<String>,
        feature_config: FeatureConfig,
        z_offset: f64,
        seed: u64,
        config_hash: String,
    ) -> ModelFile {
        ModelFile {
            format_version: FORMAT_VERSION,
            view,
            schema,
            feature_config,
            calibration: Calibration {
                train_score_mean: model.svm.train_score_mean,
                train_score_std: model.svm.train_score_std,
                z_offset,
            },
            provenance: Provenance {
                seed,
                config_hash,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                training_size: model.svm.training_size,
            },
            scaler: model.scaler,
            svm: model.svm,
        }
    }

    pub fn model(&self) -> AuthModel {
        AuthModel {
            scaler: self.scaler.clone(),
            svm: self.svm.clone(),
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        crate::output::to_json(self)
    }

    /// Parses a model document. The version is checked before anything
    /// else so older or newer files fail with a clear message.
    pub fn from_json(bytes: &[u8]) -> Result<ModelFile, CliError> {
        let probe: VersionProbe = serde_json::from_slice(bytes)
            .map_err(|e| CliError::input(format!("not a model file: {e}")))?;
        match probe.format_version {
            Some(FORMAT_VERSION) => {}
            Some(v) => {
                return Err(CliError::input(format!(
                    "unsupported model format_version {v} (expected {FORMAT_VERSION})"
                )))
            }
            None => return Err(CliError::input("not a model file: missing format_version")),
        }
        let file: ModelFile = serde_json::from_slice(bytes)
            .map_err(|e| CliError::input(format!("malformed model file: {e}")))?;
        file.check()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<ModelFile, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::input(format!("cannot read model {}: {e}", path.display())))?;
        ModelFile::from_json(&bytes).map_err(|e| e.context(path.display()))
    }

    fn check(&self) -> Result<(), CliError> {
        let dim = self.view.dim();
        let sv_ok = self.svm.support_vectors.iter().all(|v| v.len() == dim);
        if self.schema.len() != dim || self.scaler.dim() != dim || !sv_ok {
            return Err(CliError::input(format!(
                "model dimensions are inconsistent with the {:?} view ({dim} columns)",
                self.view
            )));
        }
        if self.svm.alphas.len() != self.svm.support_vectors.len() {
            return Err(CliError::input("model has mismatched support vectors and weights"));
        }
        Ok(())
    }
}
