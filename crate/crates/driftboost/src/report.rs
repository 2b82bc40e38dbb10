//! Per-batch report TSV.

use std::fmt::Write as _;

use driftboost_core::metrics::{BatchReport, BatchScore};
use driftboost_core::pipeline::LearnMode;

use crate::error::{Error, Result};

pub const HEADER: &str = "batch\tauc\trows\tmode\tseconds";

pub fn render_report(report: &BatchReport) -> String {
    let mut out = format!("{HEADER}\n");
    for b in &report.batches {
        let _ = writeln!(out, "{}\t{:.6}\t{}\t{}\t{:.3}", b.index, b.auc, b.rows, b.mode, b.seconds);
    }
    let _ = writeln!(out, "average\t{:.6}", report.average_auc);
    out
}

/// Parses a rendered report (values carry the rendered precision).
pub fn parse_report(text: &str) -> Result<BatchReport> {
    let bad = |msg: String| Error::parse("report", msg);
    let mut lines = text.lines();
    if lines.next() != Some(HEADER) {
        return Err(bad("missing header".into()));
    }
    let mut batches = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split('\t').collect();
        if f[0] == "average" && f.len() == 2 {
            let average_auc = f[1].parse().map_err(|_| bad(format!("bad average {line:?}")))?;
            return Ok(BatchReport { batches, average_auc });
        }
        if f.len() != 5 {
            return Err(bad(format!("bad row {line:?}")));
        }
        let row = || bad(format!("bad row {line:?}"));
        batches.push(BatchScore {
            index: f[0].parse().map_err(|_| row())?,
            auc: f[1].parse().map_err(|_| row())?,
            rows: f[2].parse().map_err(|_| row())?,
            mode: f[3].parse::<LearnMode>().map_err(|_| row())?,
            seconds: f[4].parse().map_err(|_| row())?,
        });
    }
    Err(bad("missing average line".into()))
}
