use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::AnalysisError;
use crate::ocsvm::{Classification, OcSvm};

/// Training-score spreads at or below this are treated as zero.
const DEGENERATE_STD: f64 = 1e-12;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibratedScore {
    pub decision_value: f64,
    /// Standard deviations from the mean training decision value. Zero when
    /// the training scores have no spread.
    pub z_score: f64,
    /// `Φ(z + z_offset)`, in [0, 1].
    pub confidence: f64,
    pub z_offset: f64,
    pub degenerate: bool,
    pub classification: Classification,
}

/// Maps a decision value to a confidence through the training-score
/// distribution. With no training spread, confidence is 1 at or above the
/// mean and 0 below it.
pub fn calibrate(svm: &OcSvm, decision_value: f64, z_offset: f64) -> Result<CalibratedScore, AnalysisError> {
    let (mean, std) = (svm.train_score_mean, svm.train_score_std);
    if !mean.is_finite() || !std.is_finite() || std < 0.0 || svm.training_size == 0 {
        return Err(AnalysisError::Uncalibrated);
    }
    let classification = Classification::from_decision(decision_value);
    if std <= DEGENERATE_STD {
        return Ok(CalibratedScore {
            decision_value,
            z_score: 0.0,
            confidence: if decision_value >= mean { 1.0 } else { 0.0 },
            z_offset,
            degenerate: true,
            classification,
        });
    }
    let z = (decision_value - mean) / std;
    Ok(CalibratedScore {
        decision_value,
        z_score: z,
        confidence: normal_cdf(z + z_offset),
        z_offset,
        degenerate: false,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ocsvm::{KernelParams, TrainingDiagnostics};

    fn model(mean: f64, std: f64) -> OcSvm {
        OcSvm {
            support_vectors: vec![vec![0.0]],
            alphas: vec![1.0],
            rho: 1.0,
            params: KernelParams { gamma: 1.0 },
            nu: 0.5,
            training_size: 4,
            train_score_mean: mean,
            train_score_std: std,
            diagnostics: TrainingDiagnostics {
                iterations: 0,
                kkt_violation: 0.0,
                free_support_vectors: 0,
                training_outliers: 0,
            },
        }
    }

    #[test]
    fn centre_maps_to_half() {
        let s = calibrate(&model(0.2, 0.1), 0.2, 0.0).unwrap();
        assert_eq!(s.z_score, 0.0);
        assert!((s.confidence - 0.5).abs() < 1e-15);
        let s = calibrate(&model(0.2, 0.1), 0.387, 0.0).unwrap();
        assert!((s.z_score - 1.87).abs() < 1e-12);
    }

    #[test]
    fn offset_shifts() {
        let s = calibrate(&model(0.0, 1.0), 0.0, 1.0).unwrap();
        assert!((s.confidence - normal_cdf(1.0)).abs() < 1e-15);
    }

    #[test]
    fn degenerate_spread() {
        let m = model(0.5, 0.0);
        let hi = calibrate(&m, 0.5, 0.0).unwrap();
        assert!(hi.degenerate);
        assert_eq!(hi.confidence, 1.0);
        assert_eq!(calibrate(&m, 0.49, 0.0).unwrap().confidence, 0.0);
    }

    #[test]
    fn uncalibrated() {
        assert_eq!(
            calibrate(&model(f64::NAN, 1.0), 0.0, 0.0).unwrap_err(),
            AnalysisError::Uncalibrated
        );
    }
}
