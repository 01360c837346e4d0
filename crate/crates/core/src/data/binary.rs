use std::collections::HashMap;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// `value <= threshold`, or "flag is false" for native binary features.
    #[serde(rename = "LEQ")]
    Leq,
    /// `value > threshold`, or "flag is true" for native binary features.
    #[serde(rename = "GT")]
    Gt,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Leq => Direction::Gt,
            Direction::Gt => Direction::Leq,
        }
    }
}

/// Provenance of one binary column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    /// Index of the source raw feature.
    pub origin: usize,
    /// Quantile cut for thresholded columns, `None` for native binary,
    /// categorical and disable columns.
    pub threshold: Option<f64>,
    pub direction: Direction,
    /// For one-hot columns: `Gt` means `== category`, `Leq` means `!= category`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(default)]
    pub is_disable: bool,
}

impl FeatureMeta {
    pub fn thresholded(origin: usize, threshold: f64, direction: Direction) -> Self {
        Self {
            origin,
            threshold: Some(threshold),
            direction,
            category: None,
            is_disable: false,
        }
    }

    pub fn flag(origin: usize, direction: Direction) -> Self {
        Self {
            origin,
            threshold: None,
            direction,
            category: None,
            is_disable: false,
        }
    }

    pub fn category(origin: usize, category: impl Into<String>, direction: Direction) -> Self {
        Self {
            origin,
            threshold: None,
            direction,
            category: Some(category.into()),
            is_disable: false,
        }
    }

    pub fn disable() -> Self {
        Self {
            origin: usize::MAX,
            threshold: None,
            direction: Direction::Gt,
            category: None,
            is_disable: true,
        }
    }

    /// Columns sharing a group can be redundant with each other.
    pub fn group(&self) -> GroupKey {
        GroupKey {
            origin: self.origin,
            category: self.category.clone(),
            is_disable: self.is_disable,
        }
    }

    fn pair_key(&self) -> (GroupKey, Option<u64>) {
        (self.group(), self.threshold.map(f64::to_bits))
    }

    /// Human-readable literal, e.g. `glucose <= 127.5` or `NOT smoker`.
    pub fn describe(&self, origin_names: &[String]) -> String {
        if self.is_disable {
            return "TRUE".to_string();
        }
        let name = origin_names
            .get(self.origin)
            .cloned()
            .unwrap_or_else(|| format!("x{}", self.origin));
        match (&self.category, self.threshold, self.direction) {
            (Some(c), _, Direction::Gt) => format!("{name} == {c}"),
            (Some(c), _, Direction::Leq) => format!("{name} != {c}"),
            (None, Some(t), Direction::Leq) => format!("{name} <= {t}"),
            (None, Some(t), Direction::Gt) => format!("{name} > {t}"),
            (None, None, Direction::Gt) => name,
            (None, None, Direction::Leq) => format!("NOT {name}"),
        }
    }
}

/// For each column, the column with the same origin and cut but the opposite
/// direction. The disable column has no partner.
pub fn negation_map(columns: &[FeatureMeta]) -> Result<Vec<Option<usize>>> {
    let mut by_key: HashMap<(GroupKey, Option<u64>, Direction), usize> = HashMap::new();
    for (j, m) in columns.iter().enumerate() {
        if m.is_disable {
            continue;
        }
        let (g, t) = m.pair_key();
        if by_key.insert((g, t, m.direction), j).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate column metadata at column {j}")));
        }
    }
    Ok(columns
        .iter()
        .map(|m| {
            if m.is_disable {
                return None;
            }
            let (g, t) = m.pair_key();
            by_key.get(&(g, t, m.direction.flip())).copied()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupKey {
    pub origin: usize,
    pub category: Option<String>,
    pub is_disable: bool,
}

/// An `n x d` 0/1 feature matrix with labels and per-column provenance.
///
/// Stored twice, row-major and column-major, since clause evaluation walks
/// columns while per-sample scoring walks rows. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDataset {
    n: usize,
    d: usize,
    rows: Vec<u8>,
    cols: Vec<u8>,
    labels: Vec<bool>,
    columns: Vec<FeatureMeta>,
    origin_names: Vec<String>,
    negation: Vec<Option<usize>>,
    has_disable_column: bool,
}

impl BinaryDataset {
    /// Builds a dataset from row vectors.
    ///
    /// Checks entries, label count, metadata count and the disable column.
    /// Negation pairing is resolved from metadata and checked against the data;
    /// columns without a partner are allowed here, and operations that need
    /// one (De Morgan, DNF learning) report [`Error::MissingNegation`].
    pub fn new(
        matrix: Vec<Vec<u8>>,
        labels: Vec<bool>,
        columns: Vec<FeatureMeta>,
        origin_names: Vec<String>,
    ) -> Result<Self> {
        let n = labels.len();
        if matrix.len() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                actual: matrix.len(),
            });
        }
        let d = columns.len();
        let mut rows = Vec::with_capacity(n * d);
        for row in &matrix {
            if row.len() != d {
                return Err(Error::ArityMismatch {
                    expected: d,
                    actual: row.len(),
                });
            }
            if row.iter().any(|&v| v > 1) {
                return Err(Error::InvalidArgument("feature entries must be 0 or 1".into()));
            }
            rows.extend_from_slice(row);
        }
        Self::from_row_major(n, rows, labels, columns, origin_names)
    }

    fn from_row_major(
        n: usize,
        rows: Vec<u8>,
        labels: Vec<bool>,
        columns: Vec<FeatureMeta>,
        origin_names: Vec<String>,
    ) -> Result<Self> {
        let d = columns.len();
        let mut cols = vec![0u8; n * d];
        for i in 0..n {
            for j in 0..d {
                cols[j * n + i] = rows[i * d + j];
            }
        }
        let disable_cols: Vec<usize> = (0..d).filter(|&j| columns[j].is_disable).collect();
        let has_disable_column = match disable_cols.as_slice() {
            [] => false,
            [0] => true,
            _ => {
                return Err(Error::InvalidArgument(
                    "a disable column may only appear once, at index 0".into(),
                ))
            }
        };
        if has_disable_column && cols[..n].iter().any(|&v| v != 1) {
            return Err(Error::InvalidArgument("disable column must be all ones".into()));
        }

        let negation = negation_map(&columns)?;

        let ds = Self {
            n,
            d,
            rows,
            cols,
            labels,
            columns,
            origin_names,
            negation,
            has_disable_column,
        };
        for j in 0..d {
            if let Some(k) = ds.negation[j] {
                if ds.column(j).iter().zip(ds.column(k)).any(|(a, b)| a + b != 1) {
                    return Err(Error::InconsistentMetadata(format!(
                        "columns {j} and {k} are declared complementary but are not"
                    )));
                }
            }
        }
        Ok(ds)
    }

    /// Dataset whose columns are exactly `base` features, each its own
    /// unpaired flag feature named `x<j>`.
    pub fn from_features(matrix: Vec<Vec<u8>>, labels: Vec<bool>) -> Result<Self> {
        let d = matrix.first().map_or(0, Vec::len);
        let columns = (0..d).map(|j| FeatureMeta::flag(j, Direction::Gt)).collect();
        let names = (0..d).map(|j| format!("x{j}")).collect();
        Self::new(matrix, labels, columns, names)
    }

    /// Dataset over `base` flag features padded with their negations; column
    /// `2k` is `x<k>` and column `2k + 1` is `NOT x<k>`.
    pub fn with_negations(base: Vec<Vec<u8>>, labels: Vec<bool>) -> Result<Self> {
        let d = base.first().map_or(0, Vec::len);
        let matrix = base
            .into_iter()
            .map(|row| row.iter().flat_map(|&v| [v, 1 - v]).collect())
            .collect();
        let columns = (0..d)
            .flat_map(|k| [FeatureMeta::flag(k, Direction::Gt), FeatureMeta::flag(k, Direction::Leq)])
            .collect();
        let names = (0..d).map(|k| format!("x{k}")).collect();
        Self::new(matrix, labels, columns, names)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn num_columns(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.d + j] == 1
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[u8] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, i: usize) -> bool {
        self.labels[i]
    }

    pub fn num_positive(&self) -> usize {
        self.labels.iter().filter(|&&y| y).count()
    }

    pub fn columns(&self) -> &[FeatureMeta] {
        &self.columns
    }

    pub fn origin_names(&self) -> &[String] {
        &self.origin_names
    }

    pub fn has_disable_column(&self) -> bool {
        self.has_disable_column
    }

    pub fn disable_column(&self) -> Option<usize> {
        self.has_disable_column.then_some(0)
    }

    pub fn column_name(&self, j: usize) -> String {
        self.columns[j].describe(&self.origin_names)
    }

    /// Index of the column complementary to `j`, if any.
    pub fn negation_of(&self, j: usize) -> Option<usize> {
        self.negation[j]
    }

    /// Fails on the first non-disable column lacking a negation partner.
    pub fn check_negations(&self) -> Result<()> {
        match (0..self.d).find(|&j| !self.columns[j].is_disable && self.negation[j].is_none()) {
            Some(column) => Err(Error::MissingNegation { column }),
            None => Ok(()),
        }
    }

    /// Prepends the constant-one column that lets a CNF clause switch itself off.
    pub fn append_disable_column(&self) -> Result<Self> {
        if self.has_disable_column {
            return Err(Error::DisableColumnPresent);
        }
        let d = self.d + 1;
        let mut rows = Vec::with_capacity(self.n * d);
        for i in 0..self.n {
            rows.push(1);
            rows.extend_from_slice(self.row(i));
        }
        let mut columns = Vec::with_capacity(d);
        columns.push(FeatureMeta::disable());
        columns.extend(self.columns.iter().cloned());
        Self::from_row_major(self.n, rows, self.labels.clone(), columns, self.origin_names.clone())
    }

    /// Negates every feature and every label.
    ///
    /// Negating a column yields its partner column, so this is a column
    /// permutation (plus label flip): column `j` of the result holds column
    /// `negation_of(j)` of `self`, metadata included. The disable column stays
    /// put. A CNF rule learned on the result, read with its column indices on
    /// `self` as a DNF rule, predicts the original labels.
    pub fn negated(&self) -> Result<Self> {
        self.check_negations()?;
        let perm: Vec<usize> = (0..self.d)
            .map(|j| self.negation[j].unwrap_or(j))
            .collect();
        let mut rows = Vec::with_capacity(self.n * self.d);
        for i in 0..self.n {
            let r = self.row(i);
            rows.extend(perm.iter().map(|&k| r[k]));
        }
        let columns = perm.iter().map(|&k| self.columns[k].clone()).collect();
        let labels = self.labels.iter().map(|y| !y).collect();
        Self::from_row_major(self.n, rows, labels, columns, self.origin_names.clone())
    }

    /// Copy restricted to `samples`, in the given order, with labels replaced
    /// by `labels` when supplied.
    pub fn subset(&self, samples: &[usize], labels: Option<&[bool]>) -> Self {
        let mut rows = Vec::with_capacity(samples.len() * self.d);
        for &i in samples {
            rows.extend_from_slice(self.row(i));
        }
        let labels = match labels {
            Some(l) => l.to_vec(),
            None => samples.iter().map(|&i| self.labels[i]).collect(),
        };
        let n = samples.len();
        let mut cols = vec![0u8; n * self.d];
        for (k, &i) in samples.iter().enumerate() {
            for j in 0..self.d {
                cols[j * n + k] = self.rows[i * self.d + j];
            }
        }
        Self {
            n,
            d: self.d,
            rows,
            cols,
            labels,
            columns: self.columns.clone(),
            origin_names: self.origin_names.clone(),
            negation: self.negation.clone(),
            has_disable_column: self.has_disable_column,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SerializedDataset::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: SerializedDataset = serde_json::from_str(text)?;
        s.into_dataset()
    }
}

pub const DATASET_FORMAT: &str = "boolrule.binary-dataset";
pub const DATASET_VERSION: u32 = 1;

/// On-disk form of a [`BinaryDataset`].
///
/// Each entry of `rows` is one sample, base64 of its `d` feature bits packed
/// least-significant-bit first (column `j` lives in byte `j / 8`, bit `j % 8`).
/// `labels` packs the `n` labels the same way.
#[derive(Debug, Serialize, Deserialize)]
struct SerializedDataset {
    format: String,
    version: u32,
    n: usize,
    d: usize,
    origin_names: Vec<String>,
    has_disable_column: bool,
    columns: Vec<FeatureMeta>,
    labels: String,
    rows: Vec<String>,
}

fn pack(bits: impl Iterator<Item = bool>) -> String {
    let mut bytes = Vec::new();
    for (k, b) in bits.enumerate() {
        if k % 8 == 0 {
            bytes.push(0u8);
        }
        if b {
            *bytes.last_mut().expect("pushed above") |= 1 << (k % 8);
        }
    }
    B64.encode(bytes)
}

fn unpack(text: &str, len: usize) -> Result<Vec<u8>> {
    let bytes = B64
        .decode(text)
        .map_err(|e| Error::InvalidArgument(format!("bad base64: {e}")))?;
    if bytes.len() != len.div_ceil(8) {
        return Err(Error::InvalidArgument("packed bit length mismatch".into()));
    }
    Ok((0..len).map(|k| (bytes[k / 8] >> (k % 8)) & 1).collect())
}

impl From<&BinaryDataset> for SerializedDataset {
    fn from(ds: &BinaryDataset) -> Self {
        Self {
            format: DATASET_FORMAT.to_string(),
            version: DATASET_VERSION,
            n: ds.n,
            d: ds.d,
            origin_names: ds.origin_names.clone(),
            has_disable_column: ds.has_disable_column,
            columns: ds.columns.clone(),
            labels: pack(ds.labels.iter().copied()),
            rows: (0..ds.n).map(|i| pack(ds.row(i).iter().map(|&v| v == 1))).collect(),
        }
    }
}

impl SerializedDataset {
    fn into_dataset(self) -> Result<BinaryDataset> {
        if self.format != DATASET_FORMAT {
            return Err(Error::InvalidArgument(format!("unexpected format '{}'", self.format)));
        }
        if self.version != DATASET_VERSION {
            return Err(Error::Version {
                what: "binary dataset",
                found: self.version,
                expected: DATASET_VERSION,
            });
        }
        if self.rows.len() != self.n || self.columns.len() != self.d {
            return Err(Error::InvalidArgument("dimension mismatch".into()));
        }
        let labels = unpack(&self.labels, self.n)?.into_iter().map(|b| b == 1).collect();
        let mut rows = Vec::with_capacity(self.n * self.d);
        for r in &self.rows {
            rows.extend(unpack(r, self.d)?);
        }
        let ds = BinaryDataset::from_row_major(self.n, rows, labels, self.columns, self.origin_names)?;
        if ds.has_disable_column != self.has_disable_column {
            return Err(Error::InvalidArgument("disable flag disagrees with columns".into()));
        }
        Ok(ds)
    }
}
