//! Batch files: tab-separated, one header line naming the columns.
//!
//! Empty cells are missing values; MVC cells hold comma-separated tokens;
//! TIME cells hold integer epoch seconds. The label column is optional and
//! may appear anywhere; its raw tokens are compared to the positive label.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use driftboost_core::schema::{Batch, ColumnData, FeatureSchema};

use crate::error::{Error, Result};

pub fn load_batch(path: &Path, schema: &FeatureSchema, index: u32) -> Result<Batch> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_batch(BufReader::new(file), schema, index, &path.display().to_string())
}

/// Parses a batch; `source` names the input in error messages.
pub fn read_batch<R: BufRead>(reader: R, schema: &FeatureSchema, index: u32, source: &str) -> Result<Batch> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::io(source, e))?,
        None => return Err(Error::parse(source, "empty file, expected a header line")),
    };
    let header: Vec<&str> = header.trim_end_matches('\r').split('\t').collect();
    let (slots, label_at) = match_header(&header, schema).map_err(|m| Error::parse(source, m))?;

    let mut columns: Vec<ColumnData> = schema.columns().iter().map(|c| ColumnData::empty(c.role)).collect();
    let mut labels = label_at.map(|_| Vec::new());
    for (n, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        let line = line.trim_end_matches('\r');
        let row = n + 1;
        if line.is_empty() && header.len() > 1 {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != header.len() {
            return Err(Error::parse(
                source,
                format!("row {row}: expected {} cells, found {}", header.len(), cells.len()),
            ));
        }
        for (col, &at) in slots.iter().enumerate() {
            let cell = cells[at];
            let name = &schema.columns()[col].name;
            let bad = |what: &str| Error::parse(source, format!("row {row}, column {name:?}: {what} {cell:?}"));
            match &mut columns[col] {
                ColumnData::Cat(v) => v.push((!cell.is_empty()).then(|| cell.to_string())),
                ColumnData::Num(v) => v.push(if cell.is_empty() {
                    None
                } else {
                    let x: f64 = cell.trim().parse().map_err(|_| bad("not a number:"))?;
                    (!x.is_nan()).then_some(x)
                }),
                ColumnData::Mvc(v) => v.push(if cell.is_empty() {
                    None
                } else {
                    Some(cell.split(',').filter(|t| !t.is_empty()).map(str::to_string).collect())
                }),
                ColumnData::Time(v) => v.push(if cell.is_empty() {
                    None
                } else {
                    Some(cell.trim().parse().map_err(|_| bad("not an integer time:"))?)
                }),
            }
        }
        if let (Some(labels), Some(at)) = (&mut labels, label_at) {
            let token = cells[at];
            if token.is_empty() {
                return Err(Error::parse(source, format!("row {row}: missing label")));
            }
            labels.push(token == schema.positive_label());
        }
    }
    Ok(Batch::new(index, schema, columns, labels)?)
}

/// Maps each schema column to its header position.
fn match_header(header: &[&str], schema: &FeatureSchema) -> std::result::Result<(Vec<usize>, Option<usize>), String> {
    let mut slots = vec![None; schema.len()];
    let mut label_at = None;
    for (at, &name) in header.iter().enumerate() {
        if name == schema.label() {
            if label_at.replace(at).is_some() {
                return Err(format!("schema mismatch: label column {name:?} appears twice"));
            }
            continue;
        }
        match schema.position(name) {
            Some(col) if slots[col].is_none() => slots[col] = Some(at),
            Some(_) => return Err(format!("schema mismatch: column {name:?} appears twice")),
            None => return Err(format!("schema mismatch: unexpected column {name:?}")),
        }
    }
    let slots = slots
        .into_iter()
        .enumerate()
        .map(|(col, at)| at.ok_or_else(|| format!("schema mismatch: missing column {:?}", schema.columns()[col].name)))
        .collect::<std::result::Result<_, _>>()?;
    Ok((slots, label_at))
}

/// The token written for negative labels.
pub fn negative_token(schema: &FeatureSchema) -> &'static str {
    if schema.positive_label() == "0" {
        "1"
    } else {
        "0"
    }
}

/// Writes schema columns in order, then the label column if present.
pub fn write_batch<W: Write>(mut out: W, batch: &Batch, schema: &FeatureSchema) -> std::io::Result<()> {
    let mut header: Vec<&str> = schema.columns().iter().map(|c| c.name.as_str()).collect();
    if batch.is_labeled() {
        header.push(schema.label());
    }
    writeln!(out, "{}", header.join("\t"))?;
    let negative = negative_token(schema);
    let mut line = String::new();
    for row in 0..batch.row_count() {
        line.clear();
        for (col, data) in batch.columns().iter().enumerate() {
            if col > 0 {
                line.push('\t');
            }
            match data {
                ColumnData::Cat(v) => line.push_str(v[row].as_deref().unwrap_or("")),
                ColumnData::Num(v) => {
                    if let Some(x) = v[row] {
                        line.push_str(&x.to_string());
                    }
                }
                ColumnData::Mvc(v) => {
                    if let Some(tokens) = &v[row] {
                        line.push_str(&tokens.join(","));
                    }
                }
                ColumnData::Time(v) => {
                    if let Some(t) = v[row] {
                        line.push_str(&t.to_string());
                    }
                }
            }
        }
        if let Some(labels) = batch.labels() {
            line.push('\t');
            line.push_str(if labels[row] { schema.positive_label() } else { negative });
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn save_batch(path: &Path, batch: &Batch, schema: &FeatureSchema) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_batch(&mut out, batch, schema).and_then(|()| out.flush()).map_err(|e| Error::io(path, e))
}
