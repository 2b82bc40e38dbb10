//! Dual categorical encoding and the dense feature matrix.
//!
//! Every CAT column is emitted twice: once as its first-seen ordinal id and
//! once as its occurrence count in the fit window. Unseen tokens map to 0 in
//! both. MVC columns become (token count, largest token frequency) and TIME
//! columns become (epoch seconds, UTC hour, UTC weekday with Monday = 0).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::schema::{Batch, ColumnData, FeatureSchema, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Ordinal,
    Frequency,
    Numeric,
    Epoch,
    HourOfDay,
    DayOfWeek,
    TokenCount,
    MaxTokenFrequency,
}

impl FeatureKind {
    pub fn suffix(self) -> &'static str {
        match self {
            FeatureKind::Ordinal => "ord",
            FeatureKind::Frequency => "freq",
            FeatureKind::Numeric => "",
            FeatureKind::Epoch => "epoch",
            FeatureKind::HourOfDay => "hour",
            FeatureKind::DayOfWeek => "weekday",
            FeatureKind::TokenCount => "count",
            FeatureKind::MaxTokenFrequency => "maxfreq",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutEntry {
    /// Schema column this feature is derived from.
    pub source: usize,
    pub name: String,
    pub kind: FeatureKind,
}

/// The encoded feature layout. Depends only on the schema.
pub fn output_layout(schema: &FeatureSchema) -> Vec<LayoutEntry> {
    let mut layout = Vec::new();
    for (source, column) in schema.columns().iter().enumerate() {
        let kinds: &[FeatureKind] = match column.role {
            Role::Cat => &[FeatureKind::Ordinal, FeatureKind::Frequency],
            Role::Num => &[FeatureKind::Numeric],
            Role::Time => &[FeatureKind::Epoch, FeatureKind::HourOfDay, FeatureKind::DayOfWeek],
            Role::Mvc => &[FeatureKind::TokenCount, FeatureKind::MaxTokenFrequency],
        };
        for &kind in kinds {
            let name = match kind {
                FeatureKind::Numeric => column.name.clone(),
                _ => format!("{}:{}", column.name, kind.suffix()),
            };
            layout.push(LayoutEntry { source, name, kind });
        }
    }
    layout
}

/// Fitted state for one column.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnEncoder {
    Cat {
        /// token -> id, ids contiguous from 1 in first-seen order
        ordinal: BTreeMap<String, u32>,
        counts: BTreeMap<String, u64>,
    },
    Num,
    Mvc {
        counts: BTreeMap<String, u64>,
    },
    Time,
}

impl ColumnEncoder {
    fn role(&self) -> Role {
        match self {
            ColumnEncoder::Cat { .. } => Role::Cat,
            ColumnEncoder::Num => Role::Num,
            ColumnEncoder::Mvc { .. } => Role::Mvc,
            ColumnEncoder::Time => Role::Time,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderState {
    columns: Vec<ColumnEncoder>,
    layout: Vec<LayoutEntry>,
}

impl EncoderState {
    /// Reassembles a state, e.g. after deserialization.
    pub fn from_parts(schema: &FeatureSchema, columns: Vec<ColumnEncoder>) -> Result<Self> {
        if columns.len() != schema.len() {
            return Err(Error::LayoutMismatch(format!(
                "{} column encoders for {} schema columns",
                columns.len(),
                schema.len()
            )));
        }
        for (spec, enc) in schema.columns().iter().zip(&columns) {
            if spec.role != enc.role() {
                return Err(Error::LayoutMismatch(format!(
                    "column {:?} is {} but its encoder is {}",
                    spec.name,
                    spec.role,
                    enc.role()
                )));
            }
            if let ColumnEncoder::Cat { ordinal, .. } = enc {
                let mut ids: Vec<u32> = ordinal.values().copied().collect();
                ids.sort_unstable();
                if ids.iter().enumerate().any(|(i, &id)| id as usize != i + 1) {
                    return Err(Error::LayoutMismatch(format!(
                        "ordinal ids of column {:?} are not contiguous from 1",
                        spec.name
                    )));
                }
            }
        }
        Ok(Self { columns, layout: output_layout(schema) })
    }

    pub fn columns(&self) -> &[ColumnEncoder] {
        &self.columns
    }

    pub fn layout(&self) -> &[LayoutEntry] {
        &self.layout
    }

    pub fn feature_count(&self) -> usize {
        self.layout.len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.layout.iter().map(|e| e.name.clone()).collect()
    }

    pub fn transform(&self, batch: &Batch, schema: &FeatureSchema) -> Result<FeatureMatrix> {
        transform_batch(batch, self, schema)
    }
}

/// Fits ordinal maps and frequency tables over every row of the (already
/// missing-filled) window, scanning batches in stream order.
pub fn fit_encoders(window: &[Batch], schema: &FeatureSchema) -> Result<EncoderState> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let mut columns = Vec::with_capacity(schema.len());
    for (col, spec) in schema.columns().iter().enumerate() {
        let encoder = match spec.role {
            Role::Num => ColumnEncoder::Num,
            Role::Time => ColumnEncoder::Time,
            Role::Cat => {
                let mut ordinal = BTreeMap::new();
                let mut counts = BTreeMap::new();
                for batch in window {
                    let ColumnData::Cat(cells) = &batch.columns()[col] else {
                        return Err(role_mismatch(schema, col));
                    };
                    for token in cells.iter().flatten() {
                        let next = ordinal.len() as u32 + 1;
                        ordinal.entry(token.clone()).or_insert(next);
                        *counts.entry(token.clone()).or_insert(0) += 1;
                    }
                }
                ColumnEncoder::Cat { ordinal, counts }
            }
            Role::Mvc => {
                let mut counts = BTreeMap::new();
                for batch in window {
                    let ColumnData::Mvc(cells) = &batch.columns()[col] else {
                        return Err(role_mismatch(schema, col));
                    };
                    for token in cells.iter().flatten().flatten() {
                        *counts.entry(token.clone()).or_insert(0) += 1;
                    }
                }
                ColumnEncoder::Mvc { counts }
            }
        };
        columns.push(encoder);
    }
    Ok(EncoderState { columns, layout: output_layout(schema) })
}

fn role_mismatch(schema: &FeatureSchema, col: usize) -> Error {
    Error::LayoutMismatch(format!(
        "column {:?} does not hold {} data",
        schema.columns()[col].name,
        schema.columns()[col].role
    ))
}

const SECONDS_PER_DAY: i64 = 86_400;

/// UTC hour of day, 0..=23.
pub fn hour_of_day(epoch_seconds: i64) -> i64 {
    epoch_seconds.rem_euclid(SECONDS_PER_DAY) / 3_600
}

/// UTC day of week with Monday = 0. The epoch fell on a Thursday.
pub fn day_of_week(epoch_seconds: i64) -> i64 {
    (epoch_seconds.div_euclid(SECONDS_PER_DAY) + 3).rem_euclid(7)
}

/// Encodes a missing-filled batch into a dense matrix following the state's
/// layout. Missing cells that slipped through encode like unseen tokens
/// (CAT/MVC) or zero (NUM/TIME).
pub fn transform_batch(batch: &Batch, state: &EncoderState, schema: &FeatureSchema) -> Result<FeatureMatrix> {
    if state.columns.len() != schema.len() || batch.columns().len() != schema.len() {
        return Err(Error::LayoutMismatch(format!(
            "encoder has {} columns, schema {}, batch {}",
            state.columns.len(),
            schema.len(),
            batch.columns().len()
        )));
    }
    let rows = batch.row_count();
    let width = state.layout.len();
    let mut values = alloc::vec![0.0; rows * width];
    let mut offset = 0;
    for (col, encoder) in state.columns.iter().enumerate() {
        match (encoder, &batch.columns()[col]) {
            (ColumnEncoder::Num, ColumnData::Num(cells)) => {
                for (r, cell) in cells.iter().enumerate() {
                    values[r * width + offset] = cell.filter(|x| !x.is_nan()).unwrap_or(0.0);
                }
                offset += 1;
            }
            (ColumnEncoder::Cat { ordinal, counts }, ColumnData::Cat(cells)) => {
                for (r, cell) in cells.iter().enumerate() {
                    let (id, count) = match cell {
                        Some(token) => {
                            (ordinal.get(token).copied().unwrap_or(0), counts.get(token).copied().unwrap_or(0))
                        }
                        None => (0, 0),
                    };
                    values[r * width + offset] = f64::from(id);
                    values[r * width + offset + 1] = count as f64;
                }
                offset += 2;
            }
            (ColumnEncoder::Time, ColumnData::Time(cells)) => {
                for (r, cell) in cells.iter().enumerate() {
                    let t = cell.unwrap_or(0);
                    let base = r * width + offset;
                    values[base] = t as f64;
                    values[base + 1] = hour_of_day(t) as f64;
                    values[base + 2] = day_of_week(t) as f64;
                }
                offset += 3;
            }
            (ColumnEncoder::Mvc { counts }, ColumnData::Mvc(cells)) => {
                for (r, cell) in cells.iter().enumerate() {
                    let tokens = cell.as_deref().unwrap_or(&[]);
                    let max_freq = tokens.iter().filter_map(|t| counts.get(t)).copied().max().unwrap_or(0);
                    values[r * width + offset] = tokens.len() as f64;
                    values[r * width + offset + 1] = max_freq as f64;
                }
                offset += 2;
            }
            _ => return Err(role_mismatch(schema, col)),
        }
    }
    debug_assert_eq!(offset, width);
    FeatureMatrix::new(values, rows, state.feature_names())
}

/// Row-major dense matrix of encoded features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    rows: usize,
    feature_names: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(values: Vec<f64>, rows: usize, feature_names: Vec<String>) -> Result<Self> {
        let expected = rows * feature_names.len();
        if values.len() != expected {
            return Err(Error::LengthMismatch { expected, found: values.len() });
        }
        Ok(Self { values, rows, feature_names })
    }

    /// Builds a matrix from rows, naming features `f0, f1, ...`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * width);
        for row in rows {
            if row.len() != width {
                return Err(Error::LengthMismatch { expected: width, found: row.len() });
            }
            values.extend_from_slice(row);
        }
        let names = (0..width).map(|f| format!("f{}", f)).collect();
        Self::new(values, rows.len(), names)
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let w = self.feature_count();
        &self.values[r * w..(r + 1) * w]
    }

    pub fn get(&self, row: usize, feature: usize) -> f64 {
        self.values[row * self.feature_count() + feature]
    }

    pub fn column(&self, feature: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, feature)).collect()
    }

    /// Keeps the features whose mask bit is set.
    pub fn select_features(&self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.feature_count() {
            return Err(Error::FeatureMismatch { expected: mask.len(), found: self.feature_count() });
        }
        let keep: Vec<usize> = (0..mask.len()).filter(|&f| mask[f]).collect();
        let mut values = Vec::with_capacity(self.rows * keep.len());
        for r in 0..self.rows {
            let row = self.row(r);
            values.extend(keep.iter().map(|&f| row[f]));
        }
        let names = keep.iter().map(|&f| self.feature_names[f].clone()).collect();
        Self::new(values, self.rows, names)
    }

    /// Stacks matrices with identical feature names on top of each other.
    pub fn vstack(parts: &[FeatureMatrix]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyData)?;
        let mut values = Vec::new();
        let mut rows = 0;
        for part in parts {
            if part.feature_names != first.feature_names {
                return Err(Error::FeatureMismatch { expected: first.feature_count(), found: part.feature_count() });
            }
            values.extend_from_slice(&part.values);
            rows += part.rows;
        }
        Self::new(values, rows, first.feature_names.clone())
    }
}
