use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Off-diagonal Frobenius norm, relative to the whole matrix, at which the
/// Jacobi sweeps stop.
pub const JACOBI_TOLERANCE: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`, with its
    /// largest-magnitude entry positive.
    pub vectors: Vec<Vec<f64>>,
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn jacobi_eigen(matrix: &[Vec<f64>]) -> Result<Eigen, AnalysisError> {
    let n = matrix.len();
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != n {
            return Err(AnalysisError::NotSymmetric);
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(AnalysisError::NonFinite);
            }
            let w = matrix[j][i];
            if (v - w).abs() > 1e-12 * v.abs().max(w.abs()).max(1.0) {
                return Err(AnalysisError::NotSymmetric);
            }
        }
    }
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    let norm = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let off = |a: &[Vec<f64>]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    s += a[p][q] * a[p][q];
                }
            }
        }
        s.sqrt()
    };

    for _ in 0..MAX_SWEEPS {
        if off(&a) <= JACOBI_TOLERANCE * norm {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    if r != p && r != q {
                        let (arp, arq) = (a[r][p], a[r][q]);
                        a[r][p] = c * arp - s * arq;
                        a[p][r] = a[r][p];
                        a[r][q] = s * arp + c * arq;
                        a[q][r] = a[r][q];
                    }
                }
                a[p][p] -= t * apq;
                a[q][q] += t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]).then(i.cmp(&j)));
    let values = order.iter().map(|&k| a[k][k]).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let mut col: Vec<f64> = v.iter().map(|row| row[k]).collect();
            let lead = col
                .iter()
                .enumerate()
                .fold(0, |best, (i, x)| if x.abs() > col[best].abs() { i } else { best });
            if col[lead] < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
            col
        })
        .collect();
    Ok(Eigen { values, vectors })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub means: Vec<f64>,
    /// Covariance eigenvalues (divisor `n − 1`), descending, with rounding
    /// negatives clamped to zero.
    pub eigenvalues: Vec<f64>,
    /// `components[k][j]`: loading of feature `j` on component `k`.
    pub components: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
}

impl Pca {
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Result<Pca, AnalysisError> {
        let n = rows.len();
        if n < 3 {
            return Err(AnalysisError::TooFewRows { needed: 3, got: n });
        }
        let dim = rows[0].as_ref().len();
        for (r, row) in rows.iter().enumerate() {
            if row.as_ref().len() != dim {
                return Err(AnalysisError::Dimension {
                    row: r,
                    expected: dim,
                    got: row.as_ref().len(),
                });
            }
        }
        let means: Vec<f64> = (0..dim)
            .map(|j| rows.iter().map(|r| r.as_ref()[j]).sum::<f64>() / n as f64)
            .collect();
        let mut cov = vec![vec![0.0; dim]; dim];
        for row in rows {
            let c: Vec<f64> = row.as_ref().iter().zip(&means).map(|(x, m)| x - m).collect();
            for i in 0..dim {
                for j in 0..=i {
                    cov[i][j] += c[i] * c[j];
                }
            }
        }
        for i in 0..dim {
            for j in 0..=i {
                cov[i][j] /= (n - 1) as f64;
                cov[j][i] = cov[i][j];
            }
        }
        if cov.iter().flatten().any(|v| !v.is_finite()) {
            return Err(AnalysisError::NonFinite);
        }
        let eig = jacobi_eigen(&cov)?;
        let eigenvalues: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = eigenvalues.iter().sum();
        if total <= 0.0 {
            return Err(AnalysisError::ZeroVariance);
        }
        Ok(Pca {
            means,
            explained_variance_ratio: eigenvalues.iter().map(|l| l / total).collect(),
            eigenvalues,
            components: eig.vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// Scores of `row` on every component.
    pub fn project(&self, row: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|v| v.iter().zip(row).zip(&self.means).map(|((l, x), m)| l * (x - m)).sum())
            .collect()
    }

    /// Inverse of [`Pca::project`] for a full score vector; a shorter
    /// vector reconstructs from the leading components only.
    pub fn reconstruct(&self, scores: &[f64]) -> Vec<f64> {
        let mut out = self.means.clone();
        for (v, s) in self.components.iter().zip(scores) {
            for (o, l) in out.iter_mut().zip(v) {
                *o += s * l;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    /// Per-feature share, non-negative and summing to 1.
    pub contributions: Vec<f64>,
    /// Number of leading components the contributions are weighted over.
    pub components_used: usize,
    pub explained_variance_ratio: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// `loadings[k][j]`: feature `j` on component `k`.
    pub loadings: Vec<Vec<f64>>,
}

impl ImportanceReport {
    /// Feature indices ordered by descending contribution, ties by index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.contributions.len()).collect();
        idx.sort_by(|&a, &b| {
            self.contributions[b]
                .total_cmp(&self.contributions[a])
                .then(a.cmp(&b))
        });
        idx
    }
}

/// Per-feature contribution `Σ_k loading²_jk × ratio_k` over the leading
/// `components` (all when `None`), normalised to sum to one.
///
/// Over all components this equals each feature's share of the covariance
/// trace, so on z-scored rows without degenerate columns the result is flat;
/// truncating to the leading components is what makes it discriminating.
pub fn feature_importance<R: AsRef<[f64]>>(
    rows: &[R],
    components: Option<usize>,
) -> Result<ImportanceReport, AnalysisError> {
    let pca = Pca::fit(rows)?;
    let dim = pca.dim();
    let k = components.unwrap_or(dim);
    if k == 0 || k > dim {
        return Err(AnalysisError::Components {
            requested: k,
            available: dim,
        });
    }
    let mut contributions = vec![0.0; dim];
    for (v, r) in pca.components[..k].iter().zip(&pca.explained_variance_ratio) {
        for (c, l) in contributions.iter_mut().zip(v) {
            *c += l * l * r;
        }
    }
    let total: f64 = contributions.iter().sum();
    if total <= 0.0 {
        return Err(AnalysisError::ZeroVariance);
    }
    contributions.iter_mut().for_each(|c| *c /= total);
    Ok(ImportanceReport {
        contributions,
        components_used: k,
        explained_variance_ratio: pca.explained_variance_ratio,
        eigenvalues: pca.eigenvalues,
        loadings: pca.components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let e = jacobi_eigen(&[vec![1.0, 0.0, 0.0], vec![0.0, 3.0, 0.0], vec![0.0, 0.0, 2.0]])
            .unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.vectors[0], vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn two_by_two() {
        // eigenvalues 3 and 1, vectors (1, 1)/√2 and (1, −1)/√2
        let e = jacobi_eigen(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.vectors[0][0] - h).abs() < 1e-14 && (e.vectors[0][1] - h).abs() < 1e-14);
        assert!(e.vectors[1][0].abs() > 0.7);
    }

    #[test]
    fn rejects_asymmetric() {
        assert_eq!(
            jacobi_eigen(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap_err(),
            AnalysisError::NotSymmetric
        );
        assert_eq!(
            jacobi_eigen(&[vec![1.0, 2.0]]).unwrap_err(),
            AnalysisError::NotSymmetric
        );
    }

    #[test]
    fn single_varying_dimension() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 4.0, -1.0]).collect();
        let r = feature_importance(&rows, None).unwrap();
        assert!((r.contributions[0] - 1.0).abs() < 1e-12);
        assert!(r.contributions[1].abs() < 1e-12);
        assert_eq!(r.ranking()[0], 0);
        assert!((r.explained_variance_ratio[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_picks_out_the_dominant_direction() {
        // features 0 and 1 move together, feature 2 is small noise
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let t = (i as f64 * 0.37).sin();
                vec![t, t + 0.01 * (i as f64).cos(), 0.2 * (i as f64 * 1.7).sin()]
            })
            .collect();
        let r = feature_importance(&rows, Some(1)).unwrap();
        assert!(r.contributions[0] > 0.45 && r.contributions[1] > 0.45);
        assert!(r.contributions[2] < 0.05);
        assert!(feature_importance(&rows, Some(0)).is_err());
        assert!(feature_importance(&rows, Some(4)).is_err());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            feature_importance(&[vec![1.0], vec![2.0]], None),
            Err(AnalysisError::TooFewRows { .. })
        ));
        assert_eq!(
            feature_importance(&vec![vec![1.0]; 4], None).unwrap_err(),
            AnalysisError::ZeroVariance
        );
        assert!(matches!(
            Pca::fit(&[vec![1.0], vec![2.0, 3.0], vec![1.0]]),
            Err(AnalysisError::Dimension { row: 1, .. })
        ));
        assert_eq!(
            Pca::fit(&[vec![f64::NAN], vec![1.0], vec![2.0]]).unwrap_err(),
            AnalysisError::NonFinite
        );
    }

    #[test]
    fn reconstruction() {
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let t = i as f64;
                vec![t.sin(), (2.0 * t).cos(), t * 0.1, (t * 0.5).sin() * 3.0]
            })
            .collect();
        let pca = Pca::fit(&rows).unwrap();
        for row in &rows {
            let back = pca.reconstruct(&pca.project(row));
            for (a, b) in back.iter().zip(row) {
                assert!((a - b).abs() < 1e-10);
            }
        }
        let ratios = &pca.explained_variance_ratio;
        assert!(ratios.windows(2).all(|w| w[0] >= w[1]));
        assert!((ratios.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
