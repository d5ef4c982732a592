//! A scaler and one-class SVM bundled for scoring raw feature rows.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FEATURES_PER_IMAGE;
use crate::fusion::{FusionError, Scaler, FUSED_DIM};
use crate::ocsvm::{self, Classification, KernelParams, OcSvm, SolverConfig, SvmError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Scaling(#[from] FusionError),
    #[error(transparent)]
    Svm(#[from] SvmError),
}

/// Which part of a fused 28-value row the model sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModalityView {
    Visual,
    Xray,
    #[default]
    Fused,
}

impl ModalityView {
    pub fn dim(self) -> usize {
        match self {
            ModalityView::Fused => FUSED_DIM,
            _ => FEATURES_PER_IMAGE,
        }
    }

    /// Selects this view's columns from a fused row.
    pub fn project<'a>(self, fused: &'a [f64]) -> &'a [f64] {
        match self {
            ModalityView::Visual => &fused[..FEATURES_PER_IMAGE],
            ModalityView::Xray => &fused[FEATURES_PER_IMAGE..],
            ModalityView::Fused => fused,
        }
    }

    pub fn project_names(self, fused: &[String]) -> Vec<String> {
        match self {
            ModalityView::Visual => fused[..FEATURES_PER_IMAGE].to_vec(),
            ModalityView::Xray => fused[FEATURES_PER_IMAGE..].to_vec(),
            ModalityView::Fused => fused.to_vec(),
        }
    }
}

impl std::str::FromStr for ModalityView {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "visual" => Ok(ModalityView::Visual),
            "xray" => Ok(ModalityView::Xray),
            "fused" => Ok(ModalityView::Fused),
            other => Err(format!("unknown modality '{other}' (visual|xray|fused)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthModel {
    pub scaler: Scaler,
    pub svm: OcSvm,
}

impl AuthModel {
    /// Fits the scaler on `rows`, then trains on the standardised rows.
    pub fn fit(
        rows: &[Vec<f64>],
        nu: f64,
        params: KernelParams,
        solver: &SolverConfig,
    ) -> Result<AuthModel, ModelError> {
        let scaler = Scaler::fit(rows)?;
        let scaled = rows
            .iter()
            .map(|r| scaler.transform(r))
            .collect::<Result<Vec<_>, _>>()?;
        let svm = ocsvm::train_with(&scaled, nu, params, solver)?;
        Ok(AuthModel { scaler, svm })
    }

    pub fn dim(&self) -> usize {
        self.scaler.dim()
    }

    /// Decision value for an unscaled row.
    pub fn decision_value(&self, raw: &[f64]) -> Result<f64, ModelError> {
        let z = self.scaler.transform(raw)?;
        Ok(self.svm.decision_value(&z)?)
    }

    pub fn classify(&self, raw: &[f64]) -> Result<Classification, ModelError> {
        self.decision_value(raw).map(Classification::from_decision)
    }
}
