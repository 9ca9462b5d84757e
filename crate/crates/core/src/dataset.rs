//! Labelled feature matrices and their CSV form.
//!
//! The CSV header holds the feature names followed by `label` and `clip_id`.
//! Reals are written as shortest round-trip decimals, so parsing a written
//! file reproduces every value exactly.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{invalid_input, Error, Result};

pub const LABEL_COLUMN: &str = "label";
pub const CLIP_COLUMN: &str = "clip_id";

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    pub clip_ids: Vec<String>,
}

impl LabeledDataset {
    pub fn new(feature_names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<String>, clip_ids: Vec<String>) -> Result<Self> {
        let ds = LabeledDataset { feature_names, rows, labels, clip_ids };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let width = self.feature_names.len();
        if self.labels.len() != self.rows.len() || self.clip_ids.len() != self.rows.len() {
            return Err(invalid_input(format!(
                "{} rows but {} labels and {} clip ids",
                self.rows.len(),
                self.labels.len(),
                self.clip_ids.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for name in &self.feature_names {
            if !seen.insert(name.as_str()) {
                return Err(invalid_input(format!("duplicate feature name {name}")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != width {
                return Err(invalid_input(format!("row {i} has {} values, expected {width}", row.len())));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(invalid_input(format!(
                    "row {i}, feature {}: non-finite value {}",
                    self.feature_names[j], row[j]
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    /// Sorted distinct labels.
    pub fn class_set(&self) -> Vec<String> {
        self.labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// Index of every row's label within `classes`.
    pub fn targets(&self, classes: &[String]) -> Result<Vec<usize>> {
        self.labels
            .iter()
            .map(|l| {
                classes
                    .binary_search(l)
                    .map_err(|_| invalid_input(format!("label {l} is not in the class set")))
            })
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Keeps only the named columns, in the order given.
    pub fn project(&self, names: &[String]) -> Result<LabeledDataset> {
        let idx = project_indices(&self.feature_names, names)?;
        Ok(LabeledDataset {
            feature_names: names.to_vec(),
            rows: self.rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect(),
            labels: self.labels.clone(),
            clip_ids: self.clip_ids.clone(),
        })
    }

    pub fn subset(&self, rows: &[usize]) -> LabeledDataset {
        LabeledDataset {
            feature_names: self.feature_names.clone(),
            rows: rows.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: rows.iter().map(|&i| self.labels[i].clone()).collect(),
            clip_ids: rows.iter().map(|&i| self.clip_ids[i].clone()).collect(),
        }
    }

    /// Rows grouped by clip, clips in first-appearance order.
    pub fn clips(&self) -> Vec<(String, Vec<usize>)> {
        let mut out: Vec<(String, Vec<usize>)> = Vec::new();
        let mut index = std::collections::HashMap::new();
        for (i, clip) in self.clip_ids.iter().enumerate() {
            let slot = *index.entry(clip.as_str()).or_insert_with(|| {
                out.push((clip.clone(), Vec::new()));
                out.len() - 1
            });
            out[slot].1.push(i);
        }
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(LABEL_COLUMN);
        header.push(CLIP_COLUMN);
        w.write_record(&header).map_err(csv_err)?;
        for ((row, label), clip) in self.rows.iter().zip(&self.labels).zip(&self.clip_ids) {
            let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            record.push(label.clone());
            record.push(clip.clone());
            w.write_record(&record).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Serde(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_csv(text: &str, origin: &Path) -> Result<LabeledDataset> {
        let format = |message: String| Error::Format { path: origin.to_path_buf(), message };
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header: Vec<String> = reader.headers().map_err(|e| format(e.to_string()))?.iter().map(String::from).collect();
        let n = header.len();
        if n < 2 || header[n - 2] != LABEL_COLUMN || header[n - 1] != CLIP_COLUMN {
            return Err(format(format!("header must end with {LABEL_COLUMN},{CLIP_COLUMN}")));
        }
        let feature_names = header[..n - 2].to_vec();
        let (mut rows, mut labels, mut clip_ids) = (Vec::new(), Vec::new(), Vec::new());
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| format(e.to_string()))?;
            if record.len() != n {
                return Err(format(format!("data row {} has {} fields, expected {n}", line + 1, record.len())));
            }
            let row = record
                .iter()
                .take(n - 2)
                .enumerate()
                .map(|(j, s)| {
                    s.parse::<f64>().map_err(|_| format(format!("data row {}, column {}: bad number {s:?}", line + 1, header[j])))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
            labels.push(record[n - 2].to_string());
            clip_ids.push(record[n - 1].to_string());
        }
        LabeledDataset::new(feature_names, rows, labels, clip_ids)
    }

    pub fn read_csv(path: &Path) -> Result<LabeledDataset> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        LabeledDataset::from_csv(&text, path)
    }

    /// Writes through a temporary sibling and renames, so a failed write
    /// never leaves a partial file at `path`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv()?.as_bytes())
    }
}

pub(crate) fn project_indices(available: &[String], wanted: &[String]) -> Result<Vec<usize>> {
    wanted
        .iter()
        .map(|name| {
            available
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| invalid_input(format!("feature {name} is not present in the input")))
        })
        .collect()
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = std::path::PathBuf::from(tmp);
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        })
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Serde(e.to_string())
}
