//! AUC scoring and per-batch reporting.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::pipeline::LearnMode;

/// Area under the ROC curve: the probability that a random positive scores
/// above a random negative, ties counting one half. Computed from midranks
/// (Mann-Whitney U) after one sort.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch { expected: labels.len(), found: scores.len() });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::AucUndefined);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Twice the positive rank sum; ranks are 1-based, tied groups share the
    // average rank, so doubling keeps everything integral.
    let mut twice_rank_sum: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]].total_cmp(&scores[order[start]]).is_eq() {
            end += 1;
        }
        let twice_midrank = (start + 1 + end) as u128;
        let group_positives = order[start..end].iter().filter(|&&i| labels[i]).count() as u128;
        twice_rank_sum += twice_midrank * group_positives;
        start = end;
    }
    let p = positives as u128;
    let twice_u = twice_rank_sum - p * (p + 1);
    Ok(twice_u as f64 / (2 * p * negatives as u128) as f64)
}

/// One scored batch of a test-then-train run.
#[derive(Debug, Clone, Copy)]
pub struct BatchRecord<'a> {
    pub index: u32,
    pub predictions: &'a [f64],
    pub labels: &'a [bool],
    pub mode: LearnMode,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchScore {
    pub index: u32,
    pub auc: f64,
    pub rows: usize,
    pub mode: LearnMode,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub batches: Vec<BatchScore>,
    /// Unweighted mean of the per-batch AUCs.
    pub average_auc: f64,
}

pub fn batch_report(history: &[BatchRecord<'_>]) -> Result<BatchReport> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let batches = history
        .iter()
        .map(|rec| {
            let score = auc(rec.predictions, rec.labels).map_err(|e| match e {
                Error::AucUndefined => Error::BatchAucUndefined(rec.index),
                other => other,
            })?;
            Ok(BatchScore {
                index: rec.index,
                auc: score,
                rows: rec.predictions.len(),
                mode: rec.mode,
                seconds: rec.seconds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let average_auc = batches.iter().map(|b| b.auc).sum::<f64>() / batches.len() as f64;
    Ok(BatchReport { batches, average_auc })
}
