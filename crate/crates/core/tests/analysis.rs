use artauth_core::analysis::{
    calibrate, feature_importance, jacobi_eigen, normal_cdf, AnalysisError, Pca,
};
use artauth_core::ocsvm::{train, KernelParams};
use artauth_oracles::{eigen, normal, SplitMix};
use nalgebra::DMatrix;

/// Sample covariance of `n` random rows with correlated columns.
fn random_covariance(rng: &mut SplitMix, dim: usize, n: usize) -> Vec<Vec<f64>> {
    let mix: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| rng.normal()).collect())
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let z: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
            (0..dim)
                .map(|j| (0..dim).map(|k| mix[j][k] * z[k]).sum())
                .collect()
        })
        .collect();
    let mean: Vec<f64> = (0..dim)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let mut cov = vec![vec![0.0; dim]; dim];
    for r in &rows {
        for i in 0..dim {
            for j in 0..dim {
                cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]) / (n - 1) as f64;
            }
        }
    }
    // exact symmetry
    for i in 0..dim {
        for j in 0..i {
            cov[i][j] = cov[j][i];
        }
    }
    cov
}

fn gaussian_rows(rng: &mut SplitMix, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.normal()).collect()).collect()
}

#[test]
fn jacobi_matches_classical_jacobi_and_nalgebra() {
    let mut rng = SplitMix(10);
    for (dim, trials) in [(4, 20), (28, 5)] {
        for _ in 0..trials {
            let cov = random_covariance(&mut rng, dim, 3 * dim);
            let got = jacobi_eigen(&cov).unwrap();
            let classical = eigen::classical_jacobi(&cov);
            let mut qr: Vec<f64> = DMatrix::from_fn(dim, dim, |i, j| cov[i][j])
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .collect();
            qr.sort_by(|a, b| b.total_cmp(a));
            let scale = got.values[0].abs().max(1.0);
            for k in 0..dim {
                assert!((got.values[k] - classical[k]).abs() <= 1e-8 * scale, "dim {dim} k {k}");
                assert!((got.values[k] - qr[k]).abs() <= 1e-8 * scale, "dim {dim} k {k}");
            }
            // A v = λ v, unit length
            for (lambda, v) in got.values.iter().zip(&got.vectors) {
                let norm: f64 = v.iter().map(|x| x * x).sum();
                assert!((norm - 1.0).abs() < 1e-10);
                for i in 0..dim {
                    let av: f64 = (0..dim).map(|j| cov[i][j] * v[j]).sum();
                    assert!((av - lambda * v[i]).abs() <= 1e-8 * scale);
                }
            }
        }
    }
}

#[test]
fn jacobi_rejects_asymmetric_input() {
    let m = vec![vec![1.0, 2.0], vec![0.0, 1.0]];
    assert!(matches!(jacobi_eigen(&m), Err(AnalysisError::NotSymmetric)));
}

#[test]
fn contributions_sum_to_one_and_follow_column_permutations() {
    let mut rng = SplitMix(11);
    for dim in [4, 28] {
        let base = gaussian_rows(&mut rng, 40, dim);
        // uneven column scales so the contributions are not flat
        let rows: Vec<Vec<f64>> = base
            .iter()
            .map(|r| r.iter().enumerate().map(|(j, x)| x * (1.0 + j as f64)).collect())
            .collect();
        for components in [None, Some(2)] {
            let report = feature_importance(&rows, components).unwrap();
            let sum: f64 = report.contributions.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-9);

            let mut perm: Vec<usize> = (0..dim).collect();
            for i in (1..dim).rev() {
                perm.swap(i, rng.below(i as u64 + 1) as usize);
            }
            let shuffled: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| perm.iter().map(|&p| r[p]).collect())
                .collect();
            let other = feature_importance(&shuffled, components).unwrap();
            for (new, &old) in perm.iter().enumerate() {
                assert!(
                    (other.contributions[new] - report.contributions[old]).abs() <= 1e-9,
                    "dim {dim} column {old}"
                );
            }
        }
    }
}

#[test]
fn single_varying_feature_takes_everything() {
    let rows: Vec<Vec<f64>> = (0..10)
        .map(|i| vec![1.0, (i as f64).sin() * 3.0, 2.0, 5.0])
        .collect();
    let report = feature_importance(&rows, None).unwrap();
    assert!((report.contributions[1] - 1.0).abs() < 1e-12);
    assert_eq!(report.ranking()[0], 1);
}

#[test]
fn pca_round_trips_and_needs_variance() {
    let mut rng = SplitMix(12);
    let rows = gaussian_rows(&mut rng, 12, 5);
    let pca = Pca::fit(&rows).unwrap();
    for r in &rows {
        let back = pca.reconstruct(&pca.project(r));
        for (a, b) in back.iter().zip(r) {
            assert!((a - b).abs() < 1e-10);
        }
    }
    let flat = vec![vec![1.0, 2.0]; 5];
    assert!(matches!(Pca::fit(&flat), Err(AnalysisError::ZeroVariance)));
    assert!(matches!(
        Pca::fit(&rows[..2]),
        Err(AnalysisError::TooFewRows { needed: 3, got: 2 })
    ));
}

#[test]
fn normal_cdf_reference_values() {
    for (x, want) in [
        (-3.0, 0.001_349_898_031_630_095_6),
        (0.0, 0.5),
        (1.87, 0.969_258_091_070_534_1),
        (3.0, 0.998_650_101_968_369_9),
    ] {
        assert!((normal_cdf(x) - want).abs() <= 1e-6);
        assert!((normal_cdf(x) - normal::cdf_series(x)).abs() <= 1e-10);
    }
}

#[test]
fn calibration_is_strictly_monotone() {
    let mut rng = SplitMix(13);
    let data = gaussian_rows(&mut rng, 30, 4);
    let svm = train(&data, 0.1, KernelParams::new(0.25).unwrap()).unwrap();
    let mut prev_z = f64::NEG_INFINITY;
    let mut prev_conf = f64::NEG_INFINITY;
    for k in 0..=200 {
        let d = svm.train_score_mean + (k as f64 - 100.0) * 0.01 * svm.train_score_std;
        let c = calibrate(&svm, d, 0.0).unwrap();
        assert!(c.z_score > prev_z);
        assert!(c.confidence > prev_conf, "step {k}");
        prev_z = c.z_score;
        prev_conf = c.confidence;
    }
    let at_mean = calibrate(&svm, svm.train_score_mean, 0.0).unwrap();
    assert!(at_mean.z_score.abs() < 1e-12);
    assert!((at_mean.confidence - 0.5).abs() < 1e-12);
}
