use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{Confusion, Metrics};
use super::negatives::{synthesize_negatives, UNIFORM_MARGIN};
use super::split::{grouped_kfold, split_train_test, Fold};
use super::{DatasetIndex, Label, ModelSelError, Sample};
use crate::fusion::Scaler;
use crate::model::{AuthModel, ModelError};
use crate::ocsvm::{Classification, KernelParams, SolverConfig, SvmError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub nus: Vec<f64>,
    pub gammas: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            nus: vec![0.01, 0.05, 0.1, 0.15, 0.2],
            gammas: vec![0.001, 0.01, 0.1, 1.0],
            folds: 10,
            seed: crate::DEFAULT_SEED,
            solver: SolverConfig::default(),
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<(), ModelSelError> {
        if self.nus.is_empty() || self.gammas.is_empty() {
            return Err(ModelSelError::Grid("nu and gamma lists must be non-empty".into()));
        }
        if let Some(nu) = self.nus.iter().find(|&&nu| !(nu > 0.0 && nu <= 1.0)) {
            return Err(ModelSelError::Grid(format!("nu {nu} outside (0, 1]")));
        }
        if let Some(g) = self.gammas.iter().find(|&&g| !(g > 0.0 && g.is_finite())) {
            return Err(ModelSelError::Grid(format!("gamma {g} must be positive")));
        }
        if self.folds < 2 {
            return Err(ModelSelError::Grid("at least 2 folds required".into()));
        }
        Ok(())
    }
}

/// Seed for the negatives of fold `fold`; shared by every grid cell.
fn negative_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_add((fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// What a fold's scaler was fitted on, reported before evaluation.
#[derive(Debug)]
pub struct FoldFit<'a> {
    pub nu: f64,
    pub gamma: f64,
    pub fold: usize,
    pub train_ids: Vec<&'a str>,
    pub validation_ids: Vec<&'a str>,
    pub scaler: &'a Scaler,
}

/// Hook into every per-fold fit of a grid search.
pub trait FoldObserver: Sync {
    fn on_fold_fit(&self, fit: &FoldFit<'_>);
}

struct NoObserver;

impl FoldObserver for NoObserver {
    fn on_fold_fit(&self, _fit: &FoldFit<'_>) {}
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPartition {
    pub fold: usize,
    pub train_ids: Vec<String>,
    pub validation_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub confusion: Confusion,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fpr: f64,
}

impl MetricSummary {
    fn of(m: &Metrics) -> Self {
        Self {
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            fpr: m.fpr,
        }
    }

    fn zip_with(self, o: Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            accuracy: f(self.accuracy, o.accuracy),
            precision: f(self.precision, o.precision),
            recall: f(self.recall, o.recall),
            f1: f(self.f1, o.f1),
            fpr: f(self.fpr, o.fpr),
        }
    }

    fn scale(self, k: f64) -> Self {
        self.zip_with(self, |a, _| a * k)
    }

    /// Per-metric mean and population standard deviation.
    fn mean_std(items: &[MetricSummary]) -> (Self, Self) {
        let n = items.len() as f64;
        let mean = items
            .iter()
            .fold(Self::default(), |acc, &m| acc.zip_with(m, |a, b| a + b))
            .scale(1.0 / n);
        let var = items
            .iter()
            .fold(Self::default(), |acc, &m| {
                acc.zip_with(m.zip_with(mean, |a, b| (a - b) * (a - b)), |a, b| a + b)
            })
            .scale(1.0 / n);
        (mean, var.zip_with(var, |a, _| a.sqrt()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub nu: f64,
    pub gamma: f64,
    pub folds: Vec<FoldResult>,
    pub mean: MetricSummary,
    pub std: MetricSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestCell {
    pub nu: f64,
    pub gamma: f64,
    pub mean_f1: f64,
}

/// How validation negatives were produced, so scores can be interpreted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeSetDescriptor {
    pub method: String,
    pub per_validation_positive: usize,
    pub shuffled: String,
    pub uniform_margin: f64,
    pub seed_rule: String,
}

impl NegativeSetDescriptor {
    fn current() -> Self {
        Self {
            method: "synthetic: per-dimension permutation of fold-train values, plus uniform \
                     samples over [min - margin, max + margin] in scaled space"
                .into(),
            per_validation_positive: 1,
            shuffled: "count - floor(count / 2)".into(),
            uniform_margin: UNIFORM_MARGIN,
            seed_rule: "seed + (fold + 1) * 0x9E3779B97F4A7C15 (wrapping)".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefitSummary {
    pub training_size: usize,
    pub support_vectors: usize,
    pub rho: f64,
    pub training_outliers: usize,
    pub train_score_mean: f64,
    pub train_score_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutDecision {
    pub id: String,
    pub label: Label,
    pub decision_value: f64,
    pub prediction: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutReport {
    pub test_fraction: f64,
    pub test_positive_ids: Vec<String>,
    pub decisions: Vec<HoldoutDecision>,
    pub confusion: Confusion,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: usize,
    pub seed: u64,
    pub nus: Vec<f64>,
    pub gammas: Vec<f64>,
    pub training_ids: Vec<String>,
    /// Scalers are fitted on `train_ids` of each partition only.
    pub partitions: Vec<FoldPartition>,
    pub negatives: NegativeSetDescriptor,
    pub cells: Vec<CellReport>,
    pub best: BestCell,
    pub refit: RefitSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holdout: Option<HoldoutReport>,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub report: CvReport,
    /// Winning cell refitted on all training paintings.
    pub model: AuthModel,
}

pub fn grid_search(train: &DatasetIndex, cfg: &GridConfig) -> Result<GridOutcome, ModelSelError> {
    grid_search_observed(train, cfg, &NoObserver)
}

/// Grouped k-fold over every (ν, γ) cell, scored by mean F1 against
/// validation positives plus one synthetic negative each. Ties prefer the
/// smaller ν, then the smaller γ. `train` must hold authentic paintings only.
pub fn grid_search_observed(
    train: &DatasetIndex,
    cfg: &GridConfig,
    observer: &dyn FoldObserver,
) -> Result<GridOutcome, ModelSelError> {
    cfg.validate()?;
    if let Some(s) = train.samples().iter().find(|s| s.label != Label::Positive) {
        return Err(ModelSelError::Grid(format!(
            "training set must be authentic only, '{}' is labelled negative",
            s.id
        )));
    }
    let folds = grouped_kfold(train, cfg.folds, cfg.seed)?;
    let largest = folds.iter().map(|f| f.validation.len()).max().unwrap_or(0);
    if train.len() - largest < 2 {
        return Err(ModelSelError::TooFewPaintings {
            needed: largest + 2,
            got: train.len(),
        });
    }

    let cells: Vec<(f64, f64)> = cfg
        .nus
        .iter()
        .flat_map(|&nu| cfg.gammas.iter().map(move |&g| (nu, g)))
        .collect();
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..folds.len()).map(move |f| (c, f)))
        .collect();

    let results: Vec<Result<FoldResult, ModelSelError>> = tasks
        .par_iter()
        .map(|&(c, f)| {
            let (nu, gamma) = cells[c];
            evaluate_fold(train, &folds[f], f, nu, gamma, cfg, observer)
        })
        .collect();

    // results are in (cell, fold) order regardless of scheduling
    let mut results = results.into_iter();
    let mut cell_reports = Vec::with_capacity(cells.len());
    for &(nu, gamma) in &cells {
        let fold_results = (&mut results)
            .take(folds.len())
            .collect::<Result<Vec<_>, _>>()?;
        let summaries: Vec<MetricSummary> =
            fold_results.iter().map(|r| MetricSummary::of(&r.metrics)).collect();
        let (mean, std) = MetricSummary::mean_std(&summaries);
        cell_reports.push(CellReport {
            nu,
            gamma,
            folds: fold_results,
            mean,
            std,
        });
    }

    let best = cell_reports
        .iter()
        .reduce(|a, b| {
            let better = b.mean.f1 > a.mean.f1
                || (b.mean.f1 == a.mean.f1
                    && (b.nu < a.nu || (b.nu == a.nu && b.gamma < a.gamma)));
            if better {
                b
            } else {
                a
            }
        })
        .expect("grid has at least one cell");
    let best = BestCell {
        nu: best.nu,
        gamma: best.gamma,
        mean_f1: best.mean.f1,
    };

    let rows: Vec<Vec<f64>> = train.samples().iter().map(|s| s.values.clone()).collect();
    let model = fit_cell(&rows, best.nu, best.gamma, &cfg.solver, None)?;

    let samples = train.samples();
    let ids_of = |idx: &[usize]| idx.iter().map(|&i| samples[i].id.clone()).collect();
    let report = CvReport {
        folds: cfg.folds,
        seed: cfg.seed,
        nus: cfg.nus.clone(),
        gammas: cfg.gammas.clone(),
        training_ids: train.ids(),
        partitions: folds
            .iter()
            .enumerate()
            .map(|(f, fold)| FoldPartition {
                fold: f,
                train_ids: ids_of(&fold.train),
                validation_ids: ids_of(&fold.validation),
            })
            .collect(),
        negatives: NegativeSetDescriptor::current(),
        cells: cell_reports,
        best,
        refit: RefitSummary {
            training_size: model.svm.training_size,
            support_vectors: model.svm.alphas.len(),
            rho: model.svm.rho,
            training_outliers: model.svm.diagnostics.training_outliers,
            train_score_mean: model.svm.train_score_mean,
            train_score_std: model.svm.train_score_std,
        },
        holdout: None,
    };
    Ok(GridOutcome { report, model })
}

fn fit_cell(
    rows: &[Vec<f64>],
    nu: f64,
    gamma: f64,
    solver: &SolverConfig,
    fold: Option<usize>,
) -> Result<AuthModel, ModelSelError> {
    let cell_err = |source: ModelError| ModelSelError::Cell {
        nu,
        gamma,
        fold,
        source,
    };
    let params = KernelParams::new(gamma).map_err(|e| cell_err(ModelError::Svm(e)))?;
    AuthModel::fit(rows, nu, params, solver).map_err(cell_err)
}

fn evaluate_fold(
    train: &DatasetIndex,
    fold: &Fold,
    f: usize,
    nu: f64,
    gamma: f64,
    cfg: &GridConfig,
    observer: &dyn FoldObserver,
) -> Result<FoldResult, ModelSelError> {
    let samples = train.samples();
    let rows: Vec<Vec<f64>> = fold.train.iter().map(|&i| samples[i].values.clone()).collect();
    let model = fit_cell(&rows, nu, gamma, &cfg.solver, Some(f))?;
    observer.on_fold_fit(&FoldFit {
        nu,
        gamma,
        fold: f,
        train_ids: fold.train.iter().map(|&i| samples[i].id.as_str()).collect(),
        validation_ids: fold.validation.iter().map(|&i| samples[i].id.as_str()).collect(),
        scaler: &model.scaler,
    });

    let cell_err = |e: ModelError| ModelSelError::Cell {
        nu,
        gamma,
        fold: Some(f),
        source: e,
    };
    let scale = |r: &[f64]| model.scaler.transform(r).map_err(|e| cell_err(e.into()));
    let scaled_train = rows.iter().map(|r| scale(r)).collect::<Result<Vec<_>, _>>()?;
    let negatives = synthesize_negatives(
        &scaled_train,
        fold.validation.len(),
        negative_seed(cfg.seed, f),
    )?;

    let classify = |z: &[f64]| -> Result<Classification, ModelSelError> {
        model
            .svm
            .classify(z)
            .map_err(|e: SvmError| cell_err(e.into()))
    };
    let mut confusion = Confusion::default();
    for &i in &fold.validation {
        let z = scale(&samples[i].values)?;
        confusion.add(classify(&z)?, Label::Positive);
    }
    for z in &negatives {
        confusion.add(classify(z)?, Label::Negative);
    }
    Ok(FoldResult {
        fold: f,
        confusion,
        metrics: confusion.metrics(),
    })
}

/// Scores `samples` with a fitted model.
pub fn evaluate_holdout(
    model: &AuthModel,
    samples: &[Sample],
    test_fraction: f64,
) -> Result<HoldoutReport, ModelSelError> {
    let mut confusion = Confusion::default();
    let mut decisions = Vec::with_capacity(samples.len());
    for s in samples {
        let d = model.decision_value(&s.values)?;
        let prediction = Classification::from_decision(d);
        confusion.add(prediction, s.label);
        decisions.push(HoldoutDecision {
            id: s.id.clone(),
            label: s.label,
            decision_value: d,
            prediction,
        });
    }
    Ok(HoldoutReport {
        test_fraction,
        test_positive_ids: samples
            .iter()
            .filter(|s| s.label == Label::Positive)
            .map(|s| s.id.clone())
            .collect(),
        decisions,
        confusion,
        metrics: confusion.metrics(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    pub grid: GridConfig,
    pub test_fraction: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            test_fraction: 0.2,
        }
    }
}

/// Full evaluation: authentic paintings are split train/test at the
/// painting level, the grid search runs on the training side, and the
/// refitted winner is scored on the held-out authentic paintings plus every
/// negative-labelled painting.
pub fn run_protocol(index: &DatasetIndex, cfg: &ProtocolConfig) -> Result<GridOutcome, ModelSelError> {
    let positives = index.with_label(Label::Positive);
    let negatives = index.with_label(Label::Negative);
    let (train, test) = split_train_test(&positives, cfg.test_fraction, cfg.grid.seed)?;
    let mut outcome = grid_search(&train, &cfg.grid)?;
    let held_out: Vec<Sample> = test
        .samples()
        .iter()
        .chain(negatives.samples())
        .cloned()
        .collect();
    outcome.report.holdout = Some(evaluate_holdout(&outcome.model, &held_out, cfg.test_fraction)?);
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    /// Gaussian-ish cloud around the origin, deterministic.
    fn cloud(n: usize, dim: usize, offset: f64) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                (0..dim)
                    .map(|d| offset + ((i * 31 + d * 17) as f64 * 0.618).sin() * 0.5)
                    .collect()
            })
            .collect()
    }

    fn index(rows: Vec<Vec<f64>>, label: Label, prefix: &str) -> Vec<Sample> {
        rows.into_iter()
            .enumerate()
            .map(|(i, values)| Sample {
                id: format!("{prefix}{i:02}"),
                values,
                label,
            })
            .collect()
    }

    #[test]
    fn single_cell_grid() {
        let train = DatasetIndex::new(index(cloud(12, 3, 0.0), Label::Positive, "a")).unwrap();
        let cfg = GridConfig {
            nus: vec![0.1],
            gammas: vec![0.5],
            folds: 4,
            ..Default::default()
        };
        let out = grid_search(&train, &cfg).unwrap();
        assert_eq!(out.report.cells.len(), 1);
        assert_eq!(out.report.cells[0].folds.len(), 4);
        assert_eq!((out.report.best.nu, out.report.best.gamma), (0.1, 0.5));
        assert_eq!(out.model.svm.training_size, 12);
    }

    #[test]
    fn report_is_internally_consistent_and_deterministic() {
        let train = DatasetIndex::new(index(cloud(15, 4, 0.0), Label::Positive, "a")).unwrap();
        let cfg = GridConfig {
            folds: 5,
            ..Default::default()
        };
        let a = grid_search(&train, &cfg).unwrap();
        let b = grid_search(&train, &cfg).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.report.cells.len(), 20);
        for cell in &a.report.cells {
            let recomputed: f64 = cell
                .folds
                .iter()
                .map(|f| f.confusion.metrics().f1)
                .sum::<f64>()
                / cell.folds.len() as f64;
            assert!((recomputed - cell.mean.f1).abs() < 1e-12);
            for f in &cell.folds {
                let m = &f.metrics;
                for v in [m.accuracy, m.precision, m.recall, m.f1, m.fpr] {
                    assert!((0.0..=1.0).contains(&v));
                }
            }
        }
        let max = a
            .report
            .cells
            .iter()
            .map(|c| c.mean.f1)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(a.report.best.mean_f1, max);
    }

    #[test]
    fn ties_prefer_smaller_nu_then_gamma() {
        // identical cells: all folds tie
        let train = DatasetIndex::new(index(cloud(8, 2, 0.0), Label::Positive, "a")).unwrap();
        let cfg = GridConfig {
            nus: vec![0.2, 0.2, 0.1],
            gammas: vec![0.01, 0.001],
            folds: 2,
            ..Default::default()
        };
        let out = grid_search(&train, &cfg).unwrap();
        let best = &out.report.best;
        let tied: Vec<_> = out
            .report
            .cells
            .iter()
            .filter(|c| c.mean.f1 == best.mean_f1)
            .collect();
        let min_nu = tied.iter().map(|c| c.nu).fold(f64::INFINITY, f64::min);
        let min_gamma = tied
            .iter()
            .filter(|c| c.nu == min_nu)
            .map(|c| c.gamma)
            .fold(f64::INFINITY, f64::min);
        assert_eq!((best.nu, best.gamma), (min_nu, min_gamma));
    }

    struct Recorder(Mutex<Vec<(Vec<String>, Vec<String>, Vec<f64>)>>);

    impl FoldObserver for Recorder {
        fn on_fold_fit(&self, fit: &FoldFit<'_>) {
            self.0.lock().unwrap().push((
                fit.train_ids.iter().map(|s| s.to_string()).collect(),
                fit.validation_ids.iter().map(|s| s.to_string()).collect(),
                fit.scaler.means.clone(),
            ));
        }
    }

    #[test]
    fn scaler_sees_fold_train_only() {
        let samples = index(cloud(10, 3, 0.0), Label::Positive, "a");
        let train = DatasetIndex::new(samples.clone()).unwrap();
        let rec = Recorder(Mutex::new(Vec::new()));
        let cfg = GridConfig {
            nus: vec![0.1, 0.2],
            gammas: vec![0.1],
            folds: 5,
            ..Default::default()
        };
        grid_search_observed(&train, &cfg, &rec).unwrap();
        let events = rec.0.into_inner().unwrap();
        assert_eq!(events.len(), 10);
        for (train_ids, val_ids, means) in events {
            assert!(train_ids.iter().all(|t| !val_ids.contains(t)));
            let rows: Vec<&Vec<f64>> = samples
                .iter()
                .filter(|s| train_ids.contains(&s.id))
                .map(|s| &s.values)
                .collect();
            for (d, m) in means.iter().enumerate() {
                let expect = rows.iter().map(|r| r[d]).sum::<f64>() / rows.len() as f64;
                assert!((m - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn separable_cell_wins() {
        let train = DatasetIndex::new(index(cloud(20, 3, 0.0), Label::Positive, "a")).unwrap();
        let cfg = GridConfig {
            nus: vec![0.1],
            // at 100 every unseen point is far from all support vectors
            gammas: vec![0.1, 100.0],
            folds: 5,
            ..Default::default()
        };
        let out = grid_search(&train, &cfg).unwrap();
        assert_eq!(out.report.cells[1].mean.recall, 0.0);
        assert_eq!(out.report.best.gamma, 0.1);
    }

    #[test]
    fn protocol_holdout() {
        let mut samples = index(cloud(24, 3, 0.0), Label::Positive, "a");
        samples.extend(index(cloud(6, 3, 8.0), Label::Negative, "f"));
        let idx = DatasetIndex::new(samples).unwrap();
        let cfg = ProtocolConfig {
            grid: GridConfig {
                folds: 5,
                ..Default::default()
            },
            ..Default::default()
        };
        let out = run_protocol(&idx, &cfg).unwrap();
        let h = out.report.holdout.as_ref().unwrap();
        assert_eq!(out.report.training_ids.len(), 19);
        assert_eq!(h.test_positive_ids.len(), 5);
        assert_eq!(h.decisions.len(), 11);
        assert_eq!(h.confusion.tn, 6);
        for id in &h.test_positive_ids {
            assert!(!out.report.training_ids.contains(id));
        }
    }

    #[test]
    fn input_errors() {
        let one = DatasetIndex::new(index(cloud(1, 2, 0.0), Label::Positive, "a")).unwrap();
        assert!(matches!(
            grid_search(&one, &GridConfig::default()),
            Err(ModelSelError::FoldCount { .. })
        ));
        let bad = GridConfig {
            nus: vec![1.5],
            ..Default::default()
        };
        let ok = DatasetIndex::new(index(cloud(12, 2, 0.0), Label::Positive, "a")).unwrap();
        assert!(matches!(grid_search(&ok, &bad), Err(ModelSelError::Grid(_))));
        let mixed = DatasetIndex::new(
            index(cloud(12, 2, 0.0), Label::Positive, "a")
                .into_iter()
                .chain(index(cloud(1, 2, 0.0), Label::Negative, "f"))
                .collect(),
        )
        .unwrap();
        assert!(matches!(
            grid_search(&mixed, &GridConfig::default()),
            Err(ModelSelError::Grid(_))
        ));
    }

    #[test]
    fn solver_failure_names_cell() {
        let train = DatasetIndex::new(index(cloud(12, 3, 0.0), Label::Positive, "a")).unwrap();
        let cfg = GridConfig {
            nus: vec![0.1],
            gammas: vec![1.0],
            folds: 3,
            solver: SolverConfig {
                tolerance: 1e-300,
                max_iterations: 1,
            },
            ..Default::default()
        };
        let err = grid_search(&train, &cfg).unwrap_err();
        assert!(matches!(err, ModelSelError::Cell { nu, gamma, .. } if nu == 0.1 && gamma == 1.0));
        assert!(err.is_numerical());
    }
}
