//! Test-then-train simulation over a dataset manifest.

use std::time::Instant;

use driftboost_core::metrics::{batch_report, BatchRecord, BatchReport};
use driftboost_core::pipeline::{BatchOutcome, LearnMode, Pipeline, PipelineConfig, Predictor, TimeSource};

use crate::error::{Error, Result};
use crate::manifest::DatasetManifest;
use crate::tsv::load_batch;

/// Seconds since construction, from the monotonic clock.
#[derive(Debug, Clone, Copy)]
pub struct WallClock {
    start: Instant,
}

impl WallClock {
    pub fn start() -> Self {
        Self { start: Instant::now() }
    }
}

impl TimeSource for WallClock {
    fn now_seconds(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub outcomes: Vec<BatchOutcome>,
    pub report: BatchReport,
    pub predictor: Option<Predictor>,
    pub budget_seconds: f64,
    /// Budget consumed by the whole run.
    pub consumed_seconds: f64,
    pub longest_round: f64,
}

/// Streams every batch of the manifest through the pipeline. Loading is not
/// charged to the budget; prediction and learning are.
pub fn simulate<T: TimeSource>(
    manifest: &DatasetManifest,
    config: &PipelineConfig,
    budget_seconds: f64,
    time: T,
) -> Result<Simulation> {
    let schema = manifest.schema.clone();
    let total = manifest.batch_paths.len();
    let mut pipeline = Pipeline::new(schema.clone(), config.clone(), budget_seconds, total, time)?;
    let mut outcomes = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    for (i, path) in manifest.batch_paths.iter().enumerate() {
        let index = u32::try_from(i + 1).map_err(|_| Error::Usage("too many batches".into()))?;
        let batch = load_batch(path, &schema, index)?;
        outcomes.push(pipeline.process_batch(&batch)?);
        labels.push(batch.labels().map(<[bool]>::to_vec));
    }
    let records: Vec<BatchRecord<'_>> = outcomes
        .iter()
        .zip(&labels)
        .filter_map(|(o, y)| {
            Some(BatchRecord {
                index: o.index,
                predictions: &o.predictions,
                labels: y.as_deref()?,
                mode: o.mode.unwrap_or(LearnMode::Skipped),
                seconds: o.seconds,
            })
        })
        .collect();
    let report = batch_report(&records)?;
    let consumed_seconds = pipeline.clock().consumed_seconds;
    let longest_round = pipeline.longest_round();
    Ok(Simulation {
        outcomes,
        report,
        predictor: pipeline.into_predictor(),
        budget_seconds,
        consumed_seconds,
        longest_round,
    })
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Internal(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(f))
}
