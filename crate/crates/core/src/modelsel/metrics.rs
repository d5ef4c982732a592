use serde::{Deserialize, Serialize};

use super::{Label, ModelSelError};
use crate::ocsvm::Classification;

/// Confusion counts with "authentic" as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn add(&mut self, predicted: Classification, label: Label) {
        match (predicted, label) {
            (Classification::Authentic, Label::Positive) => self.tp += 1,
            (Classification::Authentic, Label::Negative) => self.fp += 1,
            (Classification::Anomalous, Label::Negative) => self.tn += 1,
            (Classification::Anomalous, Label::Positive) => self.fn_ += 1,
        }
    }

    /// Ratios with zero denominators are reported as 0 and named in
    /// [`Metrics::undefined`].
    pub fn metrics(&self) -> Metrics {
        let mut undefined = Vec::new();
        let mut ratio = |num: usize, den: usize, name: &str| {
            if den == 0 {
                undefined.push(name.to_string());
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let accuracy = ratio(self.tp + self.tn, self.total(), "accuracy");
        let precision = ratio(self.tp, self.tp + self.fp, "precision");
        let recall = ratio(self.tp, self.tp + self.fn_, "recall");
        let fpr = ratio(self.fp, self.fp + self.tn, "fpr");
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            undefined.push("f1".to_string());
            0.0
        };
        Metrics {
            accuracy,
            precision,
            recall,
            f1,
            fpr,
            undefined,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fpr: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
}

pub fn compute_metrics(
    predictions: &[Classification],
    labels: &[Label],
) -> Result<Metrics, ModelSelError> {
    if predictions.len() != labels.len() || predictions.is_empty() {
        return Err(ModelSelError::Length {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    let mut c = Confusion::default();
    for (&p, &l) in predictions.iter().zip(labels) {
        c.add(p, l);
    }
    Ok(c.metrics())
}
