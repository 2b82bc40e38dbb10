//! Dataset manifests: one `key=value` per line.
//!
//! ```text
//! budget_seconds=600
//! label=label
//! positive_label=1
//! column=user:CAT
//! column=price:NUM
//! batch=batch_01.tsv
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Relative batch paths
//! are resolved against the manifest's directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use driftboost_core::schema::{ColumnSpec, FeatureSchema, Role};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub schema: FeatureSchema,
    pub batch_paths: Vec<PathBuf>,
    pub budget_seconds: f64,
}

impl DatasetManifest {
    pub fn new(schema: FeatureSchema, batch_paths: Vec<PathBuf>, budget_seconds: f64) -> Result<Self> {
        if batch_paths.is_empty() {
            return Err(Error::Usage("manifest lists no batches".into()));
        }
        if !(budget_seconds > 0.0 && budget_seconds.is_finite()) {
            return Err(Error::Usage(format!("budget_seconds must be a positive number, got {budget_seconds}")));
        }
        Ok(Self { schema, batch_paths, budget_seconds })
    }

    /// Renders the manifest, writing batch paths relative to `dir` when they
    /// lie inside it.
    pub fn render(&self, dir: &Path) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "budget_seconds={}", self.budget_seconds);
        let _ = writeln!(out, "label={}", self.schema.label());
        let _ = writeln!(out, "positive_label={}", self.schema.positive_label());
        for col in self.schema.columns() {
            let _ = writeln!(out, "column={}:{}", col.name, col.role);
        }
        for path in &self.batch_paths {
            let shown = path.strip_prefix(dir).unwrap_or(path);
            let _ = writeln!(out, "batch={}", shown.display());
        }
        out
    }
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_manifest(&text, base).map_err(|e| match e {
        Error::Parse { message, .. } | Error::Usage(message) => Error::parse(path.display(), message),
        Error::Core(inner) => Error::parse(path.display(), inner.to_string()),
        other => other,
    })
}

pub fn parse_manifest(text: &str, base: &Path) -> Result<DatasetManifest> {
    let mut budget = None;
    let mut label = None;
    let mut positive = None;
    let mut columns = Vec::new();
    let mut batches = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |msg: String| Error::parse("manifest", format!("line {}: {msg}", n + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| at(format!("expected key=value, got {line:?}")))?;
        let once = |slot: &mut Option<String>| {
            if slot.replace(value.to_string()).is_some() {
                Err(at(format!("{key} given twice")))
            } else {
                Ok(())
            }
        };
        match key {
            "budget_seconds" => once(&mut budget)?,
            "label" => once(&mut label)?,
            "positive_label" => once(&mut positive)?,
            "column" => {
                let (name, role) =
                    value.rsplit_once(':').ok_or_else(|| at(format!("expected column=name:ROLE, got {value:?}")))?;
                let role: Role = role.parse().map_err(|e: driftboost_core::Error| at(e.to_string()))?;
                columns.push(ColumnSpec::new(name, role));
            }
            "batch" => {
                let p = PathBuf::from(value);
                batches.push(if p.is_absolute() { p } else { base.join(p) });
            }
            other => return Err(at(format!("unknown key {other:?}"))),
        }
    }
    let missing = |key: &str| Error::parse("manifest", format!("missing {key}"));
    let budget = budget.ok_or_else(|| missing("budget_seconds"))?;
    let budget: f64 =
        budget.parse().map_err(|_| Error::parse("manifest", format!("budget_seconds is not a number: {budget:?}")))?;
    let schema = FeatureSchema::new(
        columns,
        label.ok_or_else(|| missing("label"))?,
        positive.ok_or_else(|| missing("positive_label"))?,
    )?;
    DatasetManifest::new(schema, batches, budget)
}
