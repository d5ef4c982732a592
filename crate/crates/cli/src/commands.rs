//! Subcommand implementations. Each returns the bytes it wrote to the
//! primary output so callers and tests can inspect them.

use std::path::{Path, PathBuf};

use artauth_core::analysis::{calibrate, feature_importance, CalibratedScore};
use artauth_core::features::{extract_features, FeatureConfig, Modality};
use artauth_core::fusion::{fuse, fused_schema, Scaler, FUSED_DIM};
use artauth_core::imaging::load_image;
use artauth_core::model::{AuthModel, ModalityView};
use artauth_core::modelsel::{grid_search, run_protocol, DatasetIndex, Label, Sample};
use artauth_core::ocsvm::{Classification, KernelParams};
use artauth_core::synth::generate_corpus;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::error::CliError;
use crate::features_io::{FeatureRow, FeatureTable};
use crate::manifest::{label_name, read_manifest};
use crate::modelfile::ModelFile;
use crate::output::{emit, is_json, to_json, write_atomic};

/// Options shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: Config,
    pub out: Option<PathBuf>,
    /// `None` when `--modality` was not given.
    pub modality: Option<ModalityView>,
}

impl Context {
    fn view(&self) -> ModalityView {
        self.modality.unwrap_or_default()
    }

    fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }
}

/// Column names of a fused row under `cfg`.
pub fn fused_columns(cfg: &FeatureConfig) -> Vec<String> {
    fused_schema(&cfg.schema(Modality::Visual), &cfg.schema(Modality::Xray))
}

fn extract_pair(visual: &Path, xray: &Path, id: &str, cfg: &FeatureConfig) -> Result<Vec<f64>, CliError> {
    let v = extract_features(&load_image(visual)?, Modality::Visual, cfg)?;
    let x = extract_features(&load_image(xray)?, Modality::Xray, cfg)?;
    Ok(fuse(&v, &x, id)?.values)
}

/// Extracts fused rows for every manifest entry. Failed rows are reported
/// together; with `allow_partial` the successful rows are still written but
/// the command fails.
pub fn extract(ctx: &Context, manifest: &Path, allow_partial: bool) -> Result<Vec<u8>, CliError> {
    ctx.config.validate()?;
    let cfg = ctx.config.features();
    let rows = read_manifest(manifest)?;
    let results: Vec<Result<FeatureRow, CliError>> = rows
        .par_iter()
        .map(|r| {
            extract_pair(&r.visual_path, &r.xray_path, &r.id, &cfg)
                .map(|values| FeatureRow {
                    id: r.id.clone(),
                    label: r.label,
                    values,
                })
                .map_err(|e| e.context(format!("painting '{}'", r.id)))
        })
        .collect();

    let mut table = FeatureTable {
        schema: fused_columns(&cfg),
        rows: Vec::with_capacity(results.len()),
    };
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(row) => table.rows.push(row),
            Err(e) => failures.push(e),
        }
    }
    let bytes = table.encode_for(ctx.out())?;
    if failures.is_empty() || allow_partial {
        emit(ctx.out(), &bytes)?;
    }
    if failures.is_empty() {
        return Ok(bytes);
    }
    let numerical = failures.iter().any(|e| e.exit_code() == 2);
    let msg = format!(
        "{} of {} paintings failed{}:\n{}",
        failures.len(),
        rows.len(),
        if allow_partial { " (partial output written)" } else { "" },
        failures.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n")
    );
    Err(if numerical { CliError::Numerical(msg) } else { CliError::Input(msg) })
}

/// Reads a feature table and checks it against the configured schema.
fn load_features(ctx: &Context, path: &Path) -> Result<FeatureTable, CliError> {
    let table = FeatureTable::read(path)?;
    table
        .require_schema(&fused_columns(&ctx.config.features()))
        .map_err(|e| e.context(path.display()))?;
    if table.rows.is_empty() {
        return Err(CliError::input(format!("{}: no feature rows", path.display())));
    }
    Ok(table)
}

/// Unlabelled rows count as authentic: training data is authentic by
/// construction.
fn samples(table: &FeatureTable, view: ModalityView) -> Vec<Sample> {
    table
        .rows
        .iter()
        .map(|r| Sample {
            id: r.id.clone(),
            values: view.project(&r.values).to_vec(),
            label: r.label.unwrap_or(Label::Positive),
        })
        .collect()
}

fn model_file(ctx: &Context, model: AuthModel) -> ModelFile {
    let cfg = ctx.config.features();
    ModelFile::new(
        model,
        ctx.view(),
        ctx.view().project_names(&fused_columns(&cfg)),
        cfg,
        ctx.config.z_offset,
        ctx.config.seed,
        ctx.config.hash(),
    )
}

/// Where `cv` puts the refitted model: `--model`, else beside `--out`.
pub fn default_model_path(out: Option<&Path>) -> Option<PathBuf> {
    let out = out?;
    let stem = out.file_stem()?.to_string_lossy().into_owned();
    Some(out.with_file_name(format!("{stem}.model.json")))
}

/// Grid search with grouped k-fold. Feature files with forgery labels get
/// the full protocol (split, search, holdout evaluation).
pub fn cv(ctx: &Context, features: &Path, model_out: Option<&Path>) -> Result<Vec<u8>, CliError> {
    ctx.config.validate()?;
    let table = load_features(ctx, features)?;
    let index = DatasetIndex::new(samples(&table, ctx.view()))?;
    let has_negatives = index.samples().iter().any(|s| s.label == Label::Negative);
    let outcome = if has_negatives {
        run_protocol(&index, &ctx.config.protocol())?
    } else {
        grid_search(&index, &ctx.config.grid())?
    };
    let report = to_json(&outcome.report)?;
    let model_path = model_out
        .map(Path::to_path_buf)
        .or_else(|| default_model_path(ctx.out()));
    if let Some(p) = model_path {
        write_atomic(&p, &model_file(ctx, outcome.model).to_json()?)?;
    }
    emit(ctx.out(), &report)?;
    Ok(report)
}

/// Fits a model on the authentic rows, with fixed `nu`/`gamma` from the
/// config or grid-searched ones.
pub fn train(ctx: &Context, features: &Path) -> Result<Vec<u8>, CliError> {
    ctx.config.validate()?;
    let table = load_features(ctx, features)?;
    let positives = DatasetIndex::new(samples(&table, ctx.view()))?.with_label(Label::Positive);
    let skipped = table.rows.len() - positives.len();
    if skipped > 0 {
        eprintln!("train: ignoring {skipped} forgery-labelled rows");
    }
    let model = match (ctx.config.nu, ctx.config.gamma) {
        (Some(nu), Some(gamma)) => {
            let rows: Vec<Vec<f64>> = positives.samples().iter().map(|s| s.values.clone()).collect();
            if !(nu > 0.0 && nu <= 1.0) {
                return Err(CliError::input(format!("config: nu {nu} outside (0, 1]")));
            }
            AuthModel::fit(&rows, nu, KernelParams::new(gamma)?, &ctx.config.solver())?
        }
        (None, None) => grid_search(&positives, &ctx.config.grid())?.model,
        _ => return Err(CliError::input("config: set both nu and gamma, or neither")),
    };
    let bytes = model_file(ctx, model).to_json()?;
    emit(ctx.out(), &bytes)?;
    Ok(bytes)
}

fn check_view(ctx: &Context, file: &ModelFile) -> Result<(), CliError> {
    match ctx.modality {
        Some(v) if v != file.view => Err(CliError::input(format!(
            "--modality {v:?} does not match the model's {:?} view",
            file.view
        ))),
        _ => Ok(()),
    }
}

/// Scores one painting and returns its calibrated score.
pub fn score_pair(file: &ModelFile, visual: &Path, xray: &Path) -> Result<CalibratedScore, CliError> {
    let cfg = &file.feature_config;
    let expected = file.view.project_names(&fused_columns(cfg));
    if expected != file.schema {
        return Err(CliError::input(
            "model schema does not match this extractor (format or feature version mismatch)",
        ));
    }
    let id = visual
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let fused = extract_pair(visual, xray, &id, cfg)?;
    score_row(file, file.view.project(&fused))
}

fn score_row(file: &ModelFile, row: &[f64]) -> Result<CalibratedScore, CliError> {
    let d = file.model().decision_value(row)?;
    Ok(calibrate(&file.svm, d, file.calibration.z_offset)?)
}

pub fn score(ctx: &Context, model: &Path, visual: &Path, xray: &Path) -> Result<Vec<u8>, CliError> {
    let file = ModelFile::load(model)?;
    check_view(ctx, &file)?;
    let bytes = to_json(&score_pair(&file, visual, xray)?)?;
    emit(ctx.out(), &bytes)?;
    Ok(bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredRow {
    pub id: String,
    pub decision_value: f64,
    pub z_score: f64,
    pub confidence: f64,
    pub classification: Classification,
}

/// Scores every row of a feature table.
pub fn score_batch(ctx: &Context, model: &Path, features: &Path) -> Result<Vec<u8>, CliError> {
    let file = ModelFile::load(model)?;
    check_view(ctx, &file)?;
    let table = FeatureTable::read(features)?;
    if table.schema.len() != FUSED_DIM {
        return Err(CliError::input(format!(
            "{}: expected a fused feature table",
            features.display()
        )));
    }
    if file.view.project_names(&table.schema) != file.schema {
        return Err(CliError::input(format!(
            "{}: feature columns do not match the model schema",
            features.display()
        )));
    }
    let scored = table
        .rows
        .iter()
        .map(|r| {
            let s = score_row(&file, file.view.project(&r.values))?;
            Ok(ScoredRow {
                id: r.id.clone(),
                decision_value: s.decision_value,
                z_score: s.z_score,
                confidence: s.confidence,
                classification: s.classification,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let bytes = match ctx.out() {
        Some(p) if is_json(p) => to_json(&scored)?,
        _ => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["id", "decision_value", "z_score", "confidence", "classification"])?;
            for r in &scored {
                let class = match r.classification {
                    Classification::Authentic => "authentic",
                    Classification::Anomalous => "anomalous",
                };
                w.write_record([
                    r.id.clone(),
                    r.decision_value.to_string(),
                    r.z_score.to_string(),
                    r.confidence.to_string(),
                    class.to_string(),
                ])?;
            }
            w.into_inner()
                .map_err(|e| CliError::input(format!("csv: {}", e.error())))?
        }
    };
    emit(ctx.out(), &bytes)?;
    Ok(bytes)
}

#[derive(Debug, Serialize)]
struct ManifestEntry<'a> {
    id: &'a str,
    visual_path: String,
    xray_path: String,
    label: &'static str,
}

#[derive(Debug, Serialize)]
struct CorpusManifest<'a> {
    seed: u64,
    spec: artauth_core::synth::CorpusSpec,
    paintings: Vec<ManifestEntry<'a>>,
}

/// Writes `visual/<id>.png`, `xray/<id>.png`, `manifest.csv` and
/// `manifest.json` under `out_dir`. Returns the CSV manifest.
pub fn synth(ctx: &Context, out_dir: &Path) -> Result<Vec<u8>, CliError> {
    let spec = ctx.config.corpus();
    let corpus = generate_corpus(&spec)?;
    corpus.par_iter().try_for_each(|p| -> Result<(), CliError> {
        for (dir, img) in [("visual", &p.visual), ("xray", &p.xray)] {
            let png = img
                .encode_png()
                .map_err(|e| CliError::input(format!("encoding {}: {e}", p.id)))?;
            write_atomic(&out_dir.join(dir).join(format!("{}.png", p.id)), &png)?;
        }
        Ok(())
    })?;
    let entries: Vec<ManifestEntry> = corpus
        .iter()
        .map(|p| ManifestEntry {
            id: &p.id,
            visual_path: format!("visual/{}.png", p.id),
            xray_path: format!("xray/{}.png", p.id),
            label: label_name(p.label),
        })
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "visual_path", "xray_path", "label"])?;
    for e in &entries {
        w.write_record([e.id, &e.visual_path, &e.xray_path, e.label])?;
    }
    let csv_bytes = w
        .into_inner()
        .map_err(|e| CliError::input(format!("csv: {}", e.error())))?;
    let json = to_json(&CorpusManifest {
        seed: spec.seed,
        spec: spec.clone(),
        paintings: entries,
    })?;
    write_atomic(&out_dir.join("manifest.csv"), &csv_bytes)?;
    write_atomic(&out_dir.join("manifest.json"), &json)?;
    Ok(csv_bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedFeature {
    pub rank: usize,
    pub name: String,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceOutput {
    pub source: String,
    pub view: ModalityView,
    pub rows: usize,
    pub components_used: usize,
    /// Sorted by descending contribution.
    pub features: Vec<RankedFeature>,
    pub explained_variance_ratio: Vec<f64>,
}

impl ImportanceOutput {
    pub fn table(&self) -> String {
        let width = self.features.iter().map(|f| f.name.len()).max().unwrap_or(4).max(7);
        let mut s = format!("{:>4}  {:<width$}  {:>8}\n", "rank", "feature", "share");
        for f in &self.features {
            s.push_str(&format!(
                "{:>4}  {:<width$}  {:>7.3}%\n",
                f.rank,
                f.name,
                100.0 * f.contribution
            ));
        }
        s
    }
}

/// Minimum number of rows for a meaningful covariance.
pub const IMPORTANCE_MIN_ROWS: usize = 3;

fn is_model_file(path: &Path) -> bool {
    is_json(path)
        && std::fs::read(path)
            .ok()
            .and_then(|b| serde_json::from_slice::<serde_json::Value>(&b).ok())
            .is_some_and(|v| v.get("format_version").is_some())
}

/// PCA attribution over a model's support vectors or a feature table's
/// standardised rows. The ranked JSON goes to the output; a readable table
/// goes to stderr.
pub fn importance(ctx: &Context, input: &Path) -> Result<Vec<u8>, CliError> {
    let (rows, names, view, source) = if is_model_file(input) {
        let file = ModelFile::load(input)?;
        check_view(ctx, &file)?;
        (file.svm.support_vectors.clone(), file.schema.clone(), file.view, "support_vectors")
    } else {
        let table = load_features(ctx, input)?;
        let view = ctx.view();
        let raw: Vec<Vec<f64>> = table.rows.iter().map(|r| view.project(&r.values).to_vec()).collect();
        if raw.len() < IMPORTANCE_MIN_ROWS {
            return Err(CliError::input(format!(
                "importance needs at least {IMPORTANCE_MIN_ROWS} rows, got {}",
                raw.len()
            )));
        }
        let scaler = Scaler::fit(&raw)?;
        let scaled = raw
            .iter()
            .map(|r| scaler.transform(r))
            .collect::<Result<Vec<_>, _>>()?;
        (scaled, view.project_names(&table.schema), view, "feature_rows")
    };
    if rows.len() < IMPORTANCE_MIN_ROWS {
        return Err(CliError::input(format!(
            "importance needs at least {IMPORTANCE_MIN_ROWS} rows, got {} {source}",
            rows.len()
        )));
    }
    let report = feature_importance(&rows, ctx.config.importance_components)?;
    let features = report
        .ranking()
        .into_iter()
        .enumerate()
        .map(|(rank, j)| RankedFeature {
            rank: rank + 1,
            name: names[j].clone(),
            contribution: report.contributions[j],
        })
        .collect();
    let out = ImportanceOutput {
        source: source.to_string(),
        view,
        rows: rows.len(),
        components_used: report.components_used,
        features,
        explained_variance_ratio: report.explained_variance_ratio,
    };
    eprint!("{}", out.table());
    let bytes = to_json(&out)?;
    emit(ctx.out(), &bytes)?;
    Ok(bytes)
}
