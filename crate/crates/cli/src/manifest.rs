//! Painting manifests: `id, visual_path, xray_path[, label]`.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use artauth_core::modelsel::Label;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestRow {
    pub id: String,
    pub visual_path: PathBuf,
    pub xray_path: PathBuf,
    pub label: Option<Label>,
}

/// Accepts `authentic`/`positive`/`1` and `forgery`/`negative`/`0`; an
/// empty cell means unlabelled.
pub fn parse_label(s: &str) -> Result<Option<Label>, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "" => Ok(None),
        "authentic" | "positive" | "1" => Ok(Some(Label::Positive)),
        "forgery" | "negative" | "0" => Ok(Some(Label::Negative)),
        other => Err(format!("unknown label '{other}' (authentic|forgery)")),
    }
}

pub fn label_name(label: Label) -> &'static str {
    match label {
        Label::Positive => "authentic",
        Label::Negative => "forgery",
    }
}

/// Reads a manifest CSV. Relative image paths are resolved against the
/// manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::input(format!("cannot open manifest {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
    parse_manifest(file, &base).map_err(|e| e.context(path.display()))
}

pub fn parse_manifest(reader: impl std::io::Read, base: &Path) -> Result<Vec<ManifestRow>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let (Some(id_col), Some(vis_col), Some(xray_col)) =
        (column("id"), column("visual_path"), column("xray_path"))
    else {
        return Err(CliError::input(format!(
            "manifest header must contain id, visual_path, xray_path; got {headers:?}"
        )));
    };
    let label_col = column("label");

    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    let mut problems = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let cell = |c: usize| record.get(c).unwrap_or("").to_string();
        let id = cell(id_col);
        let what = if id.is_empty() {
            format!("row {}", line + 1)
        } else {
            format!("painting '{id}'")
        };
        if id.is_empty() {
            problems.push(format!("{what}: empty id"));
            continue;
        }
        if !seen.insert(id.clone()) {
            problems.push(format!("{what}: duplicate id"));
            continue;
        }
        let (visual, xray) = (cell(vis_col), cell(xray_col));
        if visual.is_empty() {
            problems.push(format!("{what}: missing visual path"));
        }
        if xray.is_empty() {
            problems.push(format!("{what}: missing xray path"));
        }
        let label = match label_col.map(cell).map(|s| parse_label(&s)) {
            Some(Err(e)) => {
                problems.push(format!("{what}: {e}"));
                continue;
            }
            Some(Ok(l)) => l,
            None => None,
        };
        if visual.is_empty() || xray.is_empty() {
            continue;
        }
        rows.push(ManifestRow {
            id,
            visual_path: base.join(visual),
            xray_path: base.join(xray),
            label,
        });
    }
    if !problems.is_empty() {
        return Err(CliError::input(problems.join("\n")));
    }
    if rows.is_empty() {
        return Err(CliError::input("manifest has no rows"));
    }
    Ok(rows)
}
