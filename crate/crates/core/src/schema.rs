//! Column schemas, batches of raw cells, missing-value filling and
//! per-window row capping.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::ceil_snapped;

/// Token substituted for missing categorical and multi-value cells.
pub const MISSING_TOKEN: &str = "__MISSING__";

/// Default maximum number of rows in one training window.
pub const DEFAULT_ROW_CAP: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Single categorical token.
    Cat,
    /// Real number.
    Num,
    /// Multi-value categorical: a set of comma-separated tokens.
    Mvc,
    /// Integer epoch seconds.
    Time,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Cat => "CAT",
            Role::Num => "NUM",
            Role::Mvc => "MVC",
            Role::Time => "TIME",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "CAT" => Ok(Role::Cat),
            "NUM" => Ok(Role::Num),
            "MVC" => Ok(Role::Mvc),
            "TIME" => Ok(Role::Time),
            other => Err(Error::UnknownRole(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub name: String,
    pub role: Role,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, role: Role) -> Self {
        Self { name: name.into(), role }
    }
}

/// Ordered feature columns plus the identity of the label column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    columns: Vec<ColumnSpec>,
    label: String,
    positive_label: String,
}

impl FeatureSchema {
    pub fn new(columns: Vec<ColumnSpec>, label: impl Into<String>, positive_label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if columns.is_empty() {
            return Err(Error::InvalidSchema("at least one feature column is required".into()));
        }
        let mut seen = BTreeSet::new();
        for column in &columns {
            if column.name.is_empty() {
                return Err(Error::InvalidSchema("empty column name".into()));
            }
            if column.name == label {
                return Err(Error::InvalidSchema(format!("label column {:?} is also listed as a feature", label)));
            }
            if !seen.insert(column.name.as_str()) {
                return Err(Error::InvalidSchema(format!("duplicate column name {:?}", column.name)));
            }
        }
        Ok(Self { columns, label, positive_label: positive_label.into() })
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn positive_label(&self) -> &str {
        &self.positive_label
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }
}

/// One column of a batch. `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Cat(Vec<Option<String>>),
    Num(Vec<Option<f64>>),
    Mvc(Vec<Option<Vec<String>>>),
    Time(Vec<Option<i64>>),
}

impl ColumnData {
    pub fn empty(role: Role) -> Self {
        match role {
            Role::Cat => ColumnData::Cat(Vec::new()),
            Role::Num => ColumnData::Num(Vec::new()),
            Role::Mvc => ColumnData::Mvc(Vec::new()),
            Role::Time => ColumnData::Time(Vec::new()),
        }
    }

    pub fn role(&self) -> Role {
        match self {
            ColumnData::Cat(_) => Role::Cat,
            ColumnData::Num(_) => Role::Num,
            ColumnData::Mvc(_) => Role::Mvc,
            ColumnData::Time(_) => Role::Time,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ColumnData::Cat(v) => v.len(),
            ColumnData::Num(v) => v.len(),
            ColumnData::Mvc(v) => v.len(),
            ColumnData::Time(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of cells that still need filling. NaN counts as missing.
    pub fn missing_count(&self) -> usize {
        match self {
            ColumnData::Cat(v) => v.iter().filter(|c| c.is_none()).count(),
            ColumnData::Num(v) => v.iter().filter(|c| !matches!(c, Some(x) if !x.is_nan())).count(),
            ColumnData::Mvc(v) => v.iter().filter(|c| c.is_none()).count(),
            ColumnData::Time(v) => v.iter().filter(|c| c.is_none()).count(),
        }
    }

    fn select(&self, rows: &[usize]) -> Self {
        fn pick<T: Clone>(v: &[T], rows: &[usize]) -> Vec<T> {
            rows.iter().map(|&r| v[r].clone()).collect()
        }
        match self {
            ColumnData::Cat(v) => ColumnData::Cat(pick(v, rows)),
            ColumnData::Num(v) => ColumnData::Num(pick(v, rows)),
            ColumnData::Mvc(v) => ColumnData::Mvc(pick(v, rows)),
            ColumnData::Time(v) => ColumnData::Time(pick(v, rows)),
        }
    }
}

/// One time-ordered chunk of the stream, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    index: u32,
    columns: Vec<ColumnData>,
    labels: Option<Vec<bool>>,
    row_count: usize,
}

impl Batch {
    /// Builds a batch whose columns line up with `schema`. `index` is the
    /// 1-based position of the batch in the stream.
    pub fn new(
        index: u32,
        schema: &FeatureSchema,
        columns: Vec<ColumnData>,
        labels: Option<Vec<bool>>,
    ) -> Result<Self> {
        if columns.len() != schema.len() {
            return Err(Error::InvalidBatch(format!("expected {} columns, found {}", schema.len(), columns.len())));
        }
        let row_count = columns[0].len();
        for (spec, column) in schema.columns().iter().zip(&columns) {
            if spec.role != column.role() {
                return Err(Error::InvalidBatch(format!(
                    "column {:?} holds {} data but the schema says {}",
                    spec.name,
                    column.role(),
                    spec.role
                )));
            }
            if column.len() != row_count {
                return Err(Error::InvalidBatch(format!(
                    "column {:?} has {} rows, expected {}",
                    spec.name,
                    column.len(),
                    row_count
                )));
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != row_count {
                return Err(Error::LengthMismatch { expected: row_count, found: labels.len() });
            }
        }
        Ok(Self { index, columns, labels, row_count })
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn columns(&self) -> &[ColumnData] {
        &self.columns
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn is_labeled(&self) -> bool {
        self.labels.is_some()
    }

    /// The same rows with the labels dropped.
    pub fn without_labels(&self) -> Self {
        Self { labels: None, ..self.clone() }
    }

    /// Keeps `rows` (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            index: self.index,
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            labels: self.labels.as_ref().map(|l| rows.iter().map(|&r| l[r]).collect()),
            row_count: rows.len(),
        }
    }

    /// Splits into the first `at` rows and the rest, both keeping the index.
    pub fn split_at(&self, at: usize) -> (Self, Self) {
        let at = at.min(self.row_count);
        let head: Vec<usize> = (0..at).collect();
        let tail: Vec<usize> = (at..self.row_count).collect();
        (self.select_rows(&head), self.select_rows(&tail))
    }

    pub fn missing_count(&self) -> usize {
        self.columns.iter().map(ColumnData::missing_count).sum()
    }
}

/// Fill values derived from a window: the median of each NUM column and the
/// earliest time of each TIME column. Other roles hold zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowStats {
    medians: Vec<f64>,
    min_times: Vec<i64>,
}

impl WindowStats {
    pub fn from_parts(medians: Vec<f64>, min_times: Vec<i64>) -> Result<Self> {
        if medians.len() != min_times.len() {
            return Err(Error::LengthMismatch { expected: medians.len(), found: min_times.len() });
        }
        Ok(Self { medians, min_times })
    }

    /// Computes fill values over every non-missing cell in `window`. A column
    /// with no observed values falls back to 0.
    pub fn compute(window: &[Batch], schema: &FeatureSchema) -> Self {
        let width = schema.len();
        let mut medians = alloc::vec![0.0; width];
        let mut min_times = alloc::vec![0; width];
        for (col, spec) in schema.columns().iter().enumerate() {
            match spec.role {
                Role::Num => {
                    let mut values: Vec<f64> = window
                        .iter()
                        .filter_map(|b| match &b.columns[col] {
                            ColumnData::Num(v) => Some(v),
                            _ => None,
                        })
                        .flatten()
                        .filter_map(|c| c.filter(|x| !x.is_nan()))
                        .collect();
                    medians[col] = median(&mut values);
                }
                Role::Time => {
                    min_times[col] = window
                        .iter()
                        .filter_map(|b| match &b.columns[col] {
                            ColumnData::Time(v) => Some(v),
                            _ => None,
                        })
                        .flatten()
                        .filter_map(|c| *c)
                        .min()
                        .unwrap_or(0);
                }
                Role::Cat | Role::Mvc => {}
            }
        }
        Self { medians, min_times }
    }

    pub fn medians(&self) -> &[f64] {
        &self.medians
    }

    pub fn min_times(&self) -> &[i64] {
        &self.min_times
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

/// Replaces every missing cell: NUM with the window median, CAT/MVC with
/// [`MISSING_TOKEN`], TIME with the window's earliest time.
pub fn fill_missing(batch: &Batch, schema: &FeatureSchema, stats: &WindowStats) -> Batch {
    debug_assert_eq!(batch.columns.len(), schema.len());
    let columns = batch
        .columns
        .iter()
        .enumerate()
        .map(|(col, data)| match data {
            ColumnData::Num(v) => ColumnData::Num(
                v.iter()
                    .map(|c| match c {
                        Some(x) if !x.is_nan() => Some(*x),
                        _ => Some(stats.medians.get(col).copied().unwrap_or(0.0)),
                    })
                    .collect(),
            ),
            ColumnData::Cat(v) => ColumnData::Cat(
                v.iter().map(|c| Some(c.clone().unwrap_or_else(|| MISSING_TOKEN.to_string()))).collect(),
            ),
            ColumnData::Mvc(v) => ColumnData::Mvc(
                v.iter().map(|c| Some(c.clone().unwrap_or_else(|| alloc::vec![MISSING_TOKEN.to_string()]))).collect(),
            ),
            ColumnData::Time(v) => ColumnData::Time(
                v.iter().map(|c| Some(c.unwrap_or_else(|| stats.min_times.get(col).copied().unwrap_or(0)))).collect(),
            ),
        })
        .collect();
    Batch { columns, ..batch.clone() }
}

/// Caps the total number of rows across `batches` at `cap`.
///
/// Each batch keeps `⌈cap · rows_b / total⌉` rows, then the excess is trimmed
/// one row per batch starting from the oldest, so the newest batch is trimmed
/// last. Rows are drawn uniformly without replacement and keep their
/// original order.
pub fn subsample_rows(batches: &[Batch], cap: usize, seed: u64) -> Vec<Batch> {
    let total: usize = batches.iter().map(Batch::row_count).sum();
    if cap == 0 || total <= cap {
        return batches.to_vec();
    }
    let mut keep: Vec<usize> = batches
        .iter()
        .map(|b| {
            let share = cap as f64 * b.row_count as f64 / total as f64;
            (ceil_snapped(share) as usize).min(b.row_count)
        })
        .collect();
    let mut excess = keep.iter().sum::<usize>().saturating_sub(cap);
    while excess > 0 {
        for k in keep.iter_mut() {
            if excess == 0 {
                break;
            }
            if *k > 0 {
                *k -= 1;
                excess -= 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    batches
        .iter()
        .zip(keep)
        .map(|(batch, k)| {
            if k == batch.row_count {
                return batch.clone();
            }
            let mut rows = rand::seq::index::sample(&mut rng, batch.row_count, k).into_vec();
            rows.sort_unstable();
            batch.select_rows(&rows)
        })
        .collect()
}
