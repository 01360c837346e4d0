use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Categorical,
    Binary,
    Label,
    Ignore,
}

/// Column schema for CSV ingestion.
///
/// ```json
/// { "columns": { "glucose": "continuous", "smoker": "binary", "class": "label" },
///   "positive_labels": ["tested_positive"] }
/// ```
///
/// Label tokens are mapped through `label_map` when present, otherwise through
/// `positive_labels` (listed tokens are 1, everything else 0), otherwise they
/// must literally be `0` or `1`. Columns missing from `columns` default to
/// `continuous`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    #[serde(default)]
    pub columns: BTreeMap<String, ColumnKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_map: Option<BTreeMap<String, u8>>,
}

impl Schema {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn label_column(&self) -> Option<&str> {
        self.columns
            .iter()
            .find(|(_, k)| **k == ColumnKind::Label)
            .map(|(name, _)| name.as_str())
    }

    fn kind_of(&self, name: &str) -> ColumnKind {
        self.columns.get(name).copied().unwrap_or(ColumnKind::Continuous)
    }

    fn parse_label(&self, token: &str, row: usize) -> Result<bool> {
        let bad = || Error::NonBinaryLabel {
            row,
            value: token.to_string(),
        };
        if let Some(map) = &self.label_map {
            return match map.get(token) {
                Some(0) => Ok(false),
                Some(1) => Ok(true),
                _ => Err(bad()),
            };
        }
        if let Some(pos) = &self.positive_labels {
            return Ok(pos.iter().any(|p| p == token));
        }
        match token {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawColumn {
    Continuous(Vec<f64>),
    Categorical(Vec<String>),
    Binary(Vec<bool>),
}

impl RawColumn {
    pub fn len(&self) -> usize {
        match self {
            RawColumn::Continuous(v) => v.len(),
            RawColumn::Categorical(v) => v.len(),
            RawColumn::Binary(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            RawColumn::Continuous(_) => ColumnKind::Continuous,
            RawColumn::Categorical(_) => ColumnKind::Categorical,
            RawColumn::Binary(_) => ColumnKind::Binary,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawValue<'a> {
    Number(f64),
    Category(&'a str),
    Flag(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawFeature {
    pub name: String,
    pub column: RawColumn,
}

/// A labeled table before binarization. Stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    features: Vec<RawFeature>,
    labels: Vec<bool>,
}

impl RawDataset {
    pub fn new(features: Vec<RawFeature>, labels: Vec<bool>) -> Result<Self> {
        for f in &features {
            if f.column.len() != labels.len() {
                return Err(Error::ArityMismatch {
                    expected: labels.len(),
                    actual: f.column.len(),
                });
            }
        }
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[RawFeature] {
        &self.features
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn value(&self, row: usize, feature: usize) -> RawValue<'_> {
        match &self.features[feature].column {
            RawColumn::Continuous(v) => RawValue::Number(v[row]),
            RawColumn::Categorical(v) => RawValue::Category(&v[row]),
            RawColumn::Binary(v) => RawValue::Flag(v[row]),
        }
    }

    /// Record view of one row, in feature order.
    pub fn row(&self, row: usize) -> Vec<RawValue<'_>> {
        (0..self.features.len()).map(|f| self.value(row, f)).collect()
    }
}

fn is_missing(token: &str) -> bool {
    token.is_empty() || token == "?" || token.eq_ignore_ascii_case("na") || token.eq_ignore_ascii_case("nan")
}

/// Reads a headed CSV file. Rows come back in file order; row numbers in
/// errors count data rows from 1.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str, schema: &Schema) -> Result<RawDataset> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    parse_csv(&text, label_column, schema)
}

pub fn parse_csv(text: &str, label_column: &str, schema: &Schema) -> Result<RawDataset> {
    parse(text, label_column, schema, true).map(|(ds, _)| ds)
}

/// Like [`load_csv`], but the label column may be absent, in which case every
/// label reads as 0. The flag reports whether labels were present.
pub fn load_csv_maybe_unlabeled(path: impl AsRef<Path>, label_column: &str, schema: &Schema) -> Result<(RawDataset, bool)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, label_column, schema, false)
}

fn parse(text: &str, label_column: &str, schema: &Schema, require_label: bool) -> Result<(RawDataset, bool)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let label_idx = header.iter().position(|h| h == label_column);
    if label_idx.is_none() && require_label {
        return Err(Error::Schema(format!("label column '{label_column}' not found")));
    }
    for name in schema.columns.keys() {
        if name == label_column && label_idx.is_none() {
            continue;
        }
        if !header.contains(name) {
            return Err(Error::Schema(format!("schema column '{name}' not in CSV header")));
        }
    }

    let feature_cols: Vec<(usize, ColumnKind)> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != label_idx)
        .map(|(i, name)| (i, schema.kind_of(name)))
        .filter(|&(_, k)| k != ColumnKind::Ignore && k != ColumnKind::Label)
        .collect();

    let mut numeric: Vec<Vec<f64>> = vec![Vec::new(); feature_cols.len()];
    let mut text_cols: Vec<Vec<String>> = vec![Vec::new(); feature_cols.len()];
    let mut flags: Vec<Vec<bool>> = vec![Vec::new(); feature_cols.len()];
    let mut labels = Vec::new();

    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                row,
                column: String::from("*"),
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        labels.push(match label_idx {
            Some(li) => schema.parse_label(&record[li], row)?,
            None => false,
        });
        for (slot, &(ci, kind)) in feature_cols.iter().enumerate() {
            let token = &record[ci];
            let err = |message: String| Error::Parse {
                row,
                column: header[ci].clone(),
                message,
            };
            if is_missing(token) {
                return Err(err("missing value".into()));
            }
            match kind {
                ColumnKind::Continuous => {
                    let v: f64 = token.parse().map_err(|_| err(format!("'{token}' is not a number")))?;
                    if !v.is_finite() {
                        return Err(err(format!("'{token}' is not finite")));
                    }
                    numeric[slot].push(v);
                }
                ColumnKind::Binary => {
                    let v = match token.to_ascii_lowercase().as_str() {
                        "1" | "true" | "yes" | "t" | "y" => true,
                        "0" | "false" | "no" | "f" | "n" => false,
                        _ => return Err(err(format!("'{token}' is not a binary value"))),
                    };
                    flags[slot].push(v);
                }
                ColumnKind::Categorical => text_cols[slot].push(token.to_string()),
                ColumnKind::Label | ColumnKind::Ignore => unreachable!(),
            }
        }
    }

    let features = feature_cols
        .iter()
        .enumerate()
        .map(|(slot, &(ci, kind))| RawFeature {
            name: header[ci].clone(),
            column: match kind {
                ColumnKind::Continuous => RawColumn::Continuous(std::mem::take(&mut numeric[slot])),
                ColumnKind::Binary => RawColumn::Binary(std::mem::take(&mut flags[slot])),
                ColumnKind::Categorical => RawColumn::Categorical(std::mem::take(&mut text_cols[slot])),
                ColumnKind::Label | ColumnKind::Ignore => unreachable!(),
            },
        })
        .collect();
    Ok((RawDataset::new(features, labels)?, label_idx.is_some()))
}
