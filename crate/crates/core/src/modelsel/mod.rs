//! Painting-level splits, grouped k-fold, grid search and metrics.
//!
//! Every painting contributes exactly one row (its fused vector), so
//! splitting rows is splitting paintings: a painting's visual and X-ray
//! descriptors can never land on both sides of a boundary.

mod grid;
mod metrics;
mod negatives;
mod split;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelError;

pub use grid::{
    evaluate_holdout, grid_search, grid_search_observed, run_protocol, BestCell, CellReport,
    CvReport, FoldFit, FoldObserver, FoldPartition, FoldResult, GridConfig, GridOutcome,
    HoldoutDecision, HoldoutReport, MetricSummary, NegativeSetDescriptor, ProtocolConfig,
    RefitSummary,
};
pub use metrics::{compute_metrics, Confusion, Metrics};
pub use negatives::synthesize_negatives;
pub use split::{grouped_kfold, split_train_test, Fold};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelSelError {
    #[error("need at least {needed} paintings, got {got}")]
    TooFewPaintings { needed: usize, got: usize },
    #[error("test fraction must lie in (0, 1), got {0}")]
    Fraction(f64),
    #[error("cannot build {k} folds from {paintings} paintings")]
    FoldCount { k: usize, paintings: usize },
    #[error("negative count must be positive")]
    ZeroNegatives,
    #[error("empty training set")]
    EmptyTraining,
    #[error("predictions ({predictions}) and labels ({labels}) differ in length or are empty")]
    Length { predictions: usize, labels: usize },
    #[error("duplicate painting id '{0}'")]
    DuplicateId(String),
    #[error("row '{id}' has {got} values, expected {expected}")]
    Dimension {
        id: String,
        expected: usize,
        got: usize,
    },
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("grid cell nu={nu}, gamma={gamma}{}: {source}", fold.map(|f| format!(", fold {f}")).unwrap_or_else(|| ", refit".into()))]
    Cell {
        nu: f64,
        gamma: f64,
        fold: Option<usize>,
        #[source]
        source: ModelError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl ModelSelError {
    /// True when the failure is numerical (solver non-convergence) rather
    /// than a bad input.
    pub fn is_numerical(&self) -> bool {
        use crate::ocsvm::SvmError;
        let source = match self {
            ModelSelError::Cell { source, .. } | ModelSelError::Model(source) => source,
            _ => return false,
        };
        matches!(source, ModelError::Svm(SvmError::NotConverged { .. }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    /// Authentic work.
    Positive,
    Negative,
}

/// One painting: its id, unscaled feature row and label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub values: Vec<f64>,
    pub label: Label,
}

/// Paintings available to a split, with unique ids and a common width.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetIndex {
    samples: Vec<Sample>,
}

impl DatasetIndex {
    pub fn new(samples: Vec<Sample>) -> Result<Self, ModelSelError> {
        let mut seen = HashSet::new();
        let dim = samples.first().map_or(0, |s| s.values.len());
        for s in &samples {
            if !seen.insert(s.id.as_str()) {
                return Err(ModelSelError::DuplicateId(s.id.clone()));
            }
            if s.values.len() != dim {
                return Err(ModelSelError::Dimension {
                    id: s.id.clone(),
                    expected: dim,
                    got: s.values.len(),
                });
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.samples.iter().map(|s| s.id.clone()).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> DatasetIndex {
        DatasetIndex {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }

    pub fn with_label(&self, label: Label) -> DatasetIndex {
        DatasetIndex {
            samples: self
                .samples
                .iter()
                .filter(|s| s.label == label)
                .cloned()
                .collect(),
        }
    }
}
