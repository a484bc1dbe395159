//! Feature table: one row per subject, the 321 feature columns, and the
//! grade label, persisted as CSV with full-precision floats.

use std::path::Path;

use crate::error::{Error, Result};
use crate::radiomics::feature_manifest;
use crate::volume::Grade;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub subject_ids: Vec<String>,
    pub grades: Vec<Grade>,
    pub column_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn new(column_names: Vec<String>) -> FeatureTable {
        FeatureTable {
            subject_ids: Vec::new(),
            grades: Vec::new(),
            column_names,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, id: String, grade: Grade, values: Vec<f64>) -> Result<()> {
        if values.len() != self.column_names.len() {
            return Err(Error::DimMismatch(format!(
                "row has {} values, table has {} columns",
                values.len(),
                self.column_names.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteData);
        }
        self.subject_ids.push(id);
        self.grades.push(grade);
        self.rows.push(values);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Values of one column across all rows.
    pub fn column(&self, idx: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[idx]).collect()
    }
}

/// Writes `subject_id,grade,<columns>` with 17-significant-digit floats, so
/// a read-back is bit exact.
pub fn write_feature_table(table: &FeatureTable, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("subject_id,grade");
    for name in &table.column_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for ((id, grade), row) in table
        .subject_ids
        .iter()
        .zip(&table.grades)
        .zip(&table.rows)
    {
        if id.contains(',') {
            return Err(Error::SchemaMismatch(format!("subject id {id:?} contains a comma")));
        }
        out.push_str(id);
        out.push(',');
        out.push_str(grade.as_str());
        for v in row {
            out.push(',');
            out.push_str(&format!("{v:.16e}"));
        }
        out.push('\n');
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a feature table, checking the header against the versioned feature
/// manifest.
pub fn read_feature_table(path: &Path) -> Result<FeatureTable> {
    let text = std::fs::read_to_string(path)
        .map_err(|_| Error::MissingInput(path.display().to_string()))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::SchemaMismatch("empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "subject_id" || cols[1] != "grade" {
        return Err(Error::SchemaMismatch(format!(
            "unexpected leading columns {:?}",
            &cols[..cols.len().min(2)]
        )));
    }
    let manifest = feature_manifest();
    let names: Vec<String> = cols[2..].iter().map(|s| s.to_string()).collect();
    if names.len() != manifest.len() || names.iter().zip(manifest).any(|(a, b)| a != b) {
        return Err(Error::SchemaMismatch(
            "feature columns do not match the manifest".into(),
        ));
    }
    let mut table = FeatureTable::new(names);
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let id = parts
            .next()
            .ok_or_else(|| Error::SchemaMismatch(format!("line {}: missing id", lineno + 2)))?;
        let grade = parts
            .next()
            .and_then(Grade::parse)
            .ok_or_else(|| Error::SchemaMismatch(format!("line {}: bad grade", lineno + 2)))?;
        let values: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| Error::SchemaMismatch(format!("line {}: bad float {p:?}", lineno + 2)))
            })
            .collect::<Result<_>>()?;
        table.push(id.to_string(), grade, values)?;
    }
    Ok(table)
}
