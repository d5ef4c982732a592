//! One-class SVM with an RBF kernel.
//!
//! Training solves the ν-parameterised dual with [`solver`]; the trained
//! [`OcSvm`] keeps only the support vectors (α > 0) and scores a query with
//! `Σ αᵢ K(xᵢ, x) − ρ`.

pub mod solver;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use solver::SolverConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvmError {
    #[error("nu must lie in (0, 1], got {0}")]
    Nu(f64),
    #[error("gamma must be positive and finite, got {0}")]
    Gamma(f64),
    #[error("training set is empty")]
    Empty,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite training value in row {0}")]
    NonFinite(usize),
    #[error("solver did not converge after {iterations} steps (KKT violation {violation:.3e})")]
    NotConverged { iterations: usize, violation: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub gamma: f64,
}

impl KernelParams {
    pub fn new(gamma: f64) -> Result<Self, SvmError> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(Self { gamma })
        } else {
            Err(SvmError::Gamma(gamma))
        }
    }
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
fn rbf_unchecked(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * squared_distance(a, b)).exp()
}

/// `exp(−γ‖a − b‖²)`
pub fn rbf_kernel(a: &[f64], b: &[f64], p: KernelParams) -> Result<f64, SvmError> {
    if a.len() != b.len() {
        return Err(SvmError::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(rbf_unchecked(a, b, p.gamma))
}

/// Dense `m × m` Gram matrix, row-major.
pub fn gram_matrix(data: &[Vec<f64>], p: KernelParams) -> Vec<f64> {
    let m = data.len();
    let mut k = vec![0.0; m * m];
    for i in 0..m {
        k[i * m + i] = 1.0;
        for j in 0..i {
            let v = rbf_unchecked(&data[i], &data[j], p.gamma);
            k[i * m + j] = v;
            k[j * m + i] = v;
        }
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Authentic,
    Anomalous,
}

impl Classification {
    /// Non-negative decision values are authentic.
    pub fn from_decision(d: f64) -> Self {
        if d >= 0.0 {
            Classification::Authentic
        } else {
            Classification::Anomalous
        }
    }
}

/// Solver bookkeeping kept alongside the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingDiagnostics {
    pub iterations: usize,
    pub kkt_violation: f64,
    /// Support vectors with α strictly below the box bound.
    pub free_support_vectors: usize,
    /// Training points with a negative decision value.
    pub training_outliers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcSvm {
    pub support_vectors: Vec<Vec<f64>>,
    pub alphas: Vec<f64>,
    pub rho: f64,
    pub params: KernelParams,
    pub nu: f64,
    pub training_size: usize,
    /// Mean of the training points' decision values.
    pub train_score_mean: f64,
    /// Population standard deviation of the training decision values.
    pub train_score_std: f64,
    pub diagnostics: TrainingDiagnostics,
}

/// Fits on already-standardised rows with the default solver settings.
pub fn train(data: &[Vec<f64>], nu: f64, params: KernelParams) -> Result<OcSvm, SvmError> {
    train_with(data, nu, params, &SolverConfig::default())
}

pub fn train_with(
    data: &[Vec<f64>],
    nu: f64,
    params: KernelParams,
    cfg: &SolverConfig,
) -> Result<OcSvm, SvmError> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(SvmError::Nu(nu));
    }
    KernelParams::new(params.gamma)?;
    let m = data.len();
    if m == 0 {
        return Err(SvmError::Empty);
    }
    let dim = data[0].len();
    for (r, row) in data.iter().enumerate() {
        if row.len() != dim {
            return Err(SvmError::Dimension {
                expected: dim,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(SvmError::NonFinite(r));
        }
    }

    let c = 1.0 / (nu * m as f64);
    let gram = gram_matrix(data, params);
    let sol = solver::solve(&gram, c, cfg)?;

    let decisions: Vec<f64> = sol.gradient.iter().map(|g| g - sol.rho).collect();
    let mean = decisions.iter().sum::<f64>() / m as f64;
    let var = decisions.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / m as f64;

    let mut support_vectors = Vec::new();
    let mut alphas = Vec::new();
    let mut free = 0;
    for (k, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(data[k].clone());
            alphas.push(a);
            if a < c {
                free += 1;
            }
        }
    }
    Ok(OcSvm {
        support_vectors,
        alphas,
        rho: sol.rho,
        params,
        nu,
        training_size: m,
        train_score_mean: mean,
        train_score_std: var.sqrt(),
        diagnostics: TrainingDiagnostics {
            iterations: sol.iterations,
            kkt_violation: sol.gap,
            free_support_vectors: free,
            training_outliers: decisions.iter().filter(|&&d| d < 0.0).count(),
        },
    })
}

impl OcSvm {
    pub fn dim(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }

    /// Upper bound on each α, `1/(νm)`.
    pub fn box_bound(&self) -> f64 {
        1.0 / (self.nu * self.training_size as f64)
    }

    /// `Σ αᵢ K(xᵢ, v) − ρ`
    pub fn decision_value(&self, v: &[f64]) -> Result<f64, SvmError> {
        if v.len() != self.dim() {
            return Err(SvmError::Dimension {
                expected: self.dim(),
                got: v.len(),
            });
        }
        let sum: f64 = self
            .support_vectors
            .iter()
            .zip(&self.alphas)
            .map(|(sv, a)| a * rbf_unchecked(sv, v, self.params.gamma))
            .sum();
        Ok(sum - self.rho)
    }

    pub fn classify(&self, v: &[f64]) -> Result<Classification, SvmError> {
        self.decision_value(v).map(Classification::from_decision)
    }

    /// Primal slacks `max(0, ρ − Σ αⱼ K(xⱼ, xᵢ))` for the given training rows.
    pub fn slack_variables(&self, data: &[Vec<f64>]) -> Result<Vec<f64>, SvmError> {
        data.iter()
            .map(|x| self.decision_value(x).map(|d| (-d).max(0.0)))
            .collect()
    }
}
