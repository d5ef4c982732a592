//! Feature tables: one row per painting, `id`, `label`, then the fused
//! columns in schema order.
//!
//! CSV cells hold the shortest decimal that parses back to the same `f64`,
//! so a table survives a write/read cycle bit for bit.

use std::path::Path;

use artauth_core::modelsel::Label;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::manifest::{label_name, parse_label};
use crate::output::is_json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub schema: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["id".to_string(), "label".to_string()];
        header.extend(self.schema.iter().cloned());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.id.clone(), r.label.map(label_name).unwrap_or("").to_string()];
            rec.extend(r.values.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.into_inner()
            .map_err(|e| CliError::input(format!("csv: {}", e.error())))
    }

    pub fn from_csv(reader: impl std::io::Read) -> Result<FeatureTable, CliError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if headers.len() < 3 || headers[0] != "id" || headers[1] != "label" {
            return Err(CliError::input(
                "feature table header must start with id,label followed by feature columns",
            ));
        }
        let schema = headers[2..].to_vec();
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let id = record[0].to_string();
            let label = parse_label(&record[1]).map_err(|e| CliError::input(format!("row '{id}': {e}")))?;
            let values = record
                .iter()
                .skip(2)
                .zip(&schema)
                .map(|(cell, col)| {
                    cell.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| CliError::input(format!("row '{id}', column {col}: bad number '{cell}'")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(FeatureRow { id, label, values });
        }
        Ok(FeatureTable { schema, rows })
    }

    /// Reads CSV, or JSON when the extension is `.json`.
    pub fn read(path: &Path) -> Result<FeatureTable, CliError> {
        let file = std::fs::File::open(path)
            .map_err(|e| CliError::input(format!("cannot open features {}: {e}", path.display())))?;
        let table = if is_json(path) {
            serde_json::from_reader(std::io::BufReader::new(file))?
        } else {
            FeatureTable::from_csv(file)?
        };
        table.check().map_err(|e| e.context(path.display()))?;
        Ok(table)
    }

    /// CSV, or JSON when `path` ends in `.json`.
    pub fn encode_for(&self, path: Option<&Path>) -> Result<Vec<u8>, CliError> {
        match path {
            Some(p) if is_json(p) => crate::output::to_json(self),
            _ => self.to_csv(),
        }
    }

    /// Row widths match the schema and ids are unique.
    pub fn check(&self) -> Result<(), CliError> {
        let mut seen = std::collections::HashSet::new();
        for r in &self.rows {
            if !seen.insert(r.id.as_str()) {
                return Err(CliError::input(format!("duplicate id '{}'", r.id)));
            }
            if r.values.len() != self.schema.len() {
                return Err(CliError::input(format!(
                    "row '{}' has {} values, schema has {}",
                    r.id,
                    r.values.len(),
                    self.schema.len()
                )));
            }
        }
        Ok(())
    }

    /// Fails unless the columns are exactly `expected`.
    pub fn require_schema(&self, expected: &[String]) -> Result<(), CliError> {
        if self.schema != expected {
            let diff = self
                .schema
                .iter()
                .zip(expected)
                .position(|(a, b)| a != b)
                .map(|i| format!("column {i}: '{}' vs expected '{}'", self.schema[i], expected[i]))
                .unwrap_or_else(|| format!("{} columns vs expected {}", self.schema.len(), expected.len()));
            return Err(CliError::input(format!("feature schema mismatch ({diff})")));
        }
        Ok(())
    }
}
