//! PCA feature attribution and decision-score calibration.

mod calibrate;
mod pca;

use thiserror::Error;

pub use calibrate::{calibrate, normal_cdf, CalibratedScore};
pub use pca::{feature_importance, jacobi_eigen, Eigen, ImportanceReport, Pca, JACOBI_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("row {row} has {got} values, expected {expected}")]
    Dimension {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("rows have zero total variance")]
    ZeroVariance,
    #[error("covariance is not finite")]
    NonFinite,
    #[error("matrix is not square or not symmetric")]
    NotSymmetric,
    #[error("component count {requested} outside 1..={available}")]
    Components { requested: usize, available: usize },
    #[error("schema has {got} names, data has {expected} columns")]
    Schema { expected: usize, got: usize },
    #[error("model has no calibration statistics")]
    Uncalibrated,
}
