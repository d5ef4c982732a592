//! Visual/X-ray concatenation and z-score standardisation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureVector, Modality, FEATURES_PER_IMAGE};

pub const FUSED_DIM: usize = 2 * FEATURES_PER_IMAGE;

/// Standard deviations below this are treated as zero.
pub const SCALER_EPSILON: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("expected a {expected:?} vector in the {slot} slot, got {got:?}")]
    Modality {
        slot: &'static str,
        expected: Modality,
        got: Modality,
    },
    #[error("visual and X-ray schemas disagree on shared descriptors")]
    SchemaMismatch,
    #[error("feature vector has {0} values, expected 14")]
    Length(usize),
    #[error("need at least 2 vectors to fit a scaler, got {0}")]
    TooFewRows(usize),
    #[error("dimension mismatch: scaler has {expected}, vector has {got}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite value in dimension {0}")]
    NonFinite(usize),
}

/// 28 values: the visual schema followed by the X-ray schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedVector {
    pub painting_id: String,
    pub values: Vec<f64>,
}

impl FusedVector {
    pub fn visual(&self) -> &[f64] {
        &self.values[..FEATURES_PER_IMAGE]
    }

    pub fn xray(&self) -> &[f64] {
        &self.values[FEATURES_PER_IMAGE..]
    }
}

/// Column names of a fused vector, `visual_*` then `xray_*`.
pub fn fused_schema(visual: &[String], xray: &[String]) -> Vec<String> {
    visual
        .iter()
        .map(|n| format!("visual_{n}"))
        .chain(xray.iter().map(|n| format!("xray_{n}")))
        .collect()
}

/// Number of leading descriptors both modalities share.
const SHARED: usize = 11;

pub fn fuse(
    visual: &FeatureVector,
    xray: &FeatureVector,
    painting_id: impl Into<String>,
) -> Result<FusedVector, FusionError> {
    if visual.modality != Modality::Visual {
        return Err(FusionError::Modality {
            slot: "visual",
            expected: Modality::Visual,
            got: visual.modality,
        });
    }
    if xray.modality != Modality::Xray {
        return Err(FusionError::Modality {
            slot: "xray",
            expected: Modality::Xray,
            got: xray.modality,
        });
    }
    for v in [visual, xray] {
        if v.values.len() != FEATURES_PER_IMAGE || v.schema.len() != FEATURES_PER_IMAGE {
            return Err(FusionError::Length(v.values.len()));
        }
    }
    if visual.schema[..SHARED] != xray.schema[..SHARED] {
        return Err(FusionError::SchemaMismatch);
    }
    let mut values = Vec::with_capacity(FUSED_DIM);
    values.extend_from_slice(&visual.values);
    values.extend_from_slice(&xray.values);
    Ok(FusedVector {
        painting_id: painting_id.into(),
        values,
    })
}

/// Per-dimension z-score transform fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    /// Population standard deviations; degenerate dimensions store 1.
    pub stds: Vec<f64>,
    pub degenerate: Vec<bool>,
    pub epsilon: f64,
}

impl Scaler {
    /// Population mean and standard deviation per dimension.
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Result<Scaler, FusionError> {
        if rows.len() < 2 {
            return Err(FusionError::TooFewRows(rows.len()));
        }
        let dim = rows[0].as_ref().len();
        let n = rows.len() as f64;
        let mut means = vec![0.0; dim];
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(FusionError::Dimension {
                    expected: dim,
                    got: r.len(),
                });
            }
            for (k, (m, &x)) in means.iter_mut().zip(r).enumerate() {
                if !x.is_finite() {
                    return Err(FusionError::NonFinite(k));
                }
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; dim];
        for r in rows {
            for ((v, &x), &m) in vars.iter_mut().zip(r.as_ref()).zip(&means) {
                *v += (x - m) * (x - m);
            }
        }
        let mut stds = Vec::with_capacity(dim);
        let mut degenerate = Vec::with_capacity(dim);
        for v in vars {
            let sd = (v / n).sqrt();
            if sd < SCALER_EPSILON {
                stds.push(1.0);
                degenerate.push(true);
            } else {
                stds.push(sd);
                degenerate.push(false);
            }
        }
        Ok(Scaler {
            means,
            stds,
            degenerate,
            epsilon: SCALER_EPSILON,
        })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// `(x − μ) / σ`; degenerate dimensions map to 0.
    pub fn transform(&self, v: &[f64]) -> Result<Vec<f64>, FusionError> {
        self.check(v)?;
        Ok(v.iter()
            .enumerate()
            .map(|(k, &x)| {
                if self.degenerate[k] {
                    0.0
                } else {
                    (x - self.means[k]) / self.stds[k]
                }
            })
            .collect())
    }

    /// Maps z-scores back to raw values; degenerate dimensions return the mean.
    pub fn inverse(&self, z: &[f64]) -> Result<Vec<f64>, FusionError> {
        self.check(z)?;
        Ok(z.iter()
            .enumerate()
            .map(|(k, &x)| {
                if self.degenerate[k] {
                    self.means[k]
                } else {
                    x * self.stds[k] + self.means[k]
                }
            })
            .collect())
    }

    fn check(&self, v: &[f64]) -> Result<(), FusionError> {
        if v.len() != self.dim() {
            return Err(FusionError::Dimension {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureConfig;
    use proptest::prelude::*;

    fn fv(modality: Modality, value: f64) -> FeatureVector {
        FeatureVector {
            modality,
            schema: FeatureConfig::default().schema(modality),
            values: vec![value; 14],
            flags: vec![],
        }
    }

    #[test]
    fn concatenation_order() {
        let f = fuse(&fv(Modality::Visual, 0.0), &fv(Modality::Xray, 1.0), "p1").unwrap();
        assert_eq!(f.values.len(), 28);
        assert_eq!(f.visual(), &[0.0; 14]);
        assert_eq!(f.xray(), &[1.0; 14]);
        assert_eq!(f.painting_id, "p1");
    }

    #[test]
    fn swapped_modalities_rejected() {
        let err = fuse(&fv(Modality::Xray, 0.0), &fv(Modality::Visual, 1.0), "p").unwrap_err();
        assert!(matches!(err, FusionError::Modality { slot: "visual", .. }));
    }

    #[test]
    fn schema_mismatch_rejected() {
        let mut x = fv(Modality::Xray, 1.0);
        x.schema[0] = "something_else".into();
        assert_eq!(
            fuse(&fv(Modality::Visual, 0.0), &x, "p").unwrap_err(),
            FusionError::SchemaMismatch
        );
    }

    #[test]
    fn fit_examples() {
        let s = Scaler::fit(&[vec![0.0, 5.0], vec![2.0, 5.0]]).unwrap();
        assert_eq!(s.means, vec![1.0, 5.0]);
        assert_eq!(s.stds, vec![1.0, 1.0]);
        assert_eq!(s.degenerate, vec![false, true]);
        assert_eq!(s.transform(&[1.0, 5.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(s.transform(&[2.0, 9.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(
            Scaler::fit(&[vec![1.0]]).unwrap_err(),
            FusionError::TooFewRows(1)
        );
        assert!(matches!(
            s.transform(&[1.0]),
            Err(FusionError::Dimension { .. })
        ));
    }

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            Scaler::fit(&[vec![0.0, f64::NAN], vec![1.0, 1.0]]).unwrap_err(),
            FusionError::NonFinite(1)
        );
    }

    fn rows_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (2usize..30).prop_flat_map(|n| {
            proptest::collection::vec(proptest::collection::vec(-1e3f64..1e3, 4), n)
        })
    }

    proptest! {
        #[test]
        fn standardised_training_set(rows in rows_strategy()) {
            let s = Scaler::fit(&rows).unwrap();
            let z: Vec<Vec<f64>> = rows.iter().map(|r| s.transform(r).unwrap()).collect();
            let n = z.len() as f64;
            for k in 0..4 {
                let mean = z.iter().map(|r| r[k]).sum::<f64>() / n;
                prop_assert!(mean.abs() < 1e-9);
                if !s.degenerate[k] {
                    let sd = (z.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / n).sqrt();
                    prop_assert!((sd - 1.0).abs() < 1e-9);
                }
            }
            for r in &rows {
                let back = s.inverse(&s.transform(r).unwrap()).unwrap();
                for k in 0..4 {
                    if !s.degenerate[k] {
                        prop_assert!((back[k] - r[k]).abs() < 1e-9 * (1.0 + r[k].abs()));
                    }
                }
            }
        }

        #[test]
        fn transform_is_affine(
            rows in rows_strategy(),
            a in proptest::collection::vec(-100f64..100.0, 4),
            b in proptest::collection::vec(-100f64..100.0, 4),
            t in 0f64..1.0,
        ) {
            let s = Scaler::fit(&rows).unwrap();
            let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
            let lhs = s.transform(&mix).unwrap();
            let ta = s.transform(&a).unwrap();
            let tb = s.transform(&b).unwrap();
            for k in 0..4 {
                let rhs = t * ta[k] + (1.0 - t) * tb[k];
                prop_assert!((lhs[k] - rhs).abs() < 1e-6 * (1.0 + rhs.abs()));
            }
        }
    }
}
