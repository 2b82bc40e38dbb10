//! Test-then-train orchestration over a stream of batches.
//!
//! Each incoming batch is first scored by the current model. If it carries
//! labels it then joins a sliding window of the `K` most recent labeled
//! batches and the model is updated in one of two ways:
//!
//! * **FULL**: encoders are refitted on the window, features are re-selected
//!   by the gain importance of a small pre-model, and a new model is trained
//!   from zero margins on the whole window.
//! * **INCREMENTAL**: the newest batch alone is encoded with the model's
//!   encoders, the model's margins on it are carried over as starting
//!   margins, and new trees are appended.
//!
//! The per-tree shrinkage of batch `t`'s training call grows with the batch
//! ordinal: `p_t = p_{t-1} + step · n_t`. A [`BudgetClock`] tracks the time
//! spent so far and decides between the two modes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::encode::{fit_encoders, EncoderState, FeatureMatrix};
use crate::error::{Error, Result};
use crate::gbdt::{self, GbdtModel, TrainParams, ValidSet};
use crate::math::{ceil_snapped, floor};
use crate::schema::{fill_missing, subsample_rows, Batch, FeatureSchema, WindowStats, DEFAULT_ROW_CAP};

/// Minimum ratio between the per-batch time allowance and the last FULL
/// retrain's cost for BUDGETED mode to retrain fully again.
pub const SAFETY_FACTOR: f64 = 1.5;

/// Batch-indexed learning-rate schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSchedule {
    p0: f64,
    step_coeff: f64,
    p: f64,
    n: u32,
}

impl LrSchedule {
    pub fn new(p0: f64, step_coeff: f64) -> Self {
        Self { p0, step_coeff, p: p0, n: 0 }
    }

    /// The schedule after one more batch: `n += 1; p += step_coeff * n`.
    #[must_use]
    pub fn next_lr(self) -> Self {
        let n = self.n + 1;
        Self { n, p: self.p + self.step_coeff * f64::from(n), ..self }
    }

    /// Advances in place and returns the new rate.
    pub fn advance(&mut self) -> f64 {
        *self = self.next_lr();
        self.p
    }

    pub fn current(&self) -> f64 {
        self.p
    }

    pub fn batches_seen(&self) -> u32 {
        self.n
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn step_coeff(&self) -> f64 {
        self.step_coeff
    }

    /// `p0 + step_coeff · t(t+1)/2`.
    pub fn closed_form(p0: f64, step_coeff: f64, t: u32) -> f64 {
        let t = f64::from(t);
        p0 + step_coeff * t * (t + 1.0) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetrainPolicy {
    Always,
    Budgeted,
    Never,
}

impl RetrainPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            RetrainPolicy::Always => "ALWAYS",
            RetrainPolicy::Budgeted => "BUDGETED",
            RetrainPolicy::Never => "NEVER",
        }
    }
}

impl fmt::Display for RetrainPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RetrainPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ALWAYS" => Ok(RetrainPolicy::Always),
            "BUDGETED" => Ok(RetrainPolicy::Budgeted),
            "NEVER" => Ok(RetrainPolicy::Never),
            other => Err(Error::InvalidParam(format!("unknown retrain policy {:?}", other))),
        }
    }
}

/// How a labeled batch was learned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnMode {
    Full,
    Incremental,
    /// The budget ran out; the batch was scored but not learned.
    Skipped,
}

impl LearnMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LearnMode::Full => "FULL",
            LearnMode::Incremental => "INCREMENTAL",
            LearnMode::Skipped => "SKIPPED",
        }
    }
}

impl fmt::Display for LearnMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LearnMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "FULL" => Ok(LearnMode::Full),
            "INCREMENTAL" => Ok(LearnMode::Incremental),
            "SKIPPED" => Ok(LearnMode::Skipped),
            other => Err(Error::InvalidParam(format!("unknown mode {:?}", other))),
        }
    }
}

/// Seconds budgeted for the whole stream and seconds already spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetClock {
    pub budget_seconds: f64,
    pub consumed_seconds: f64,
    /// Batches still to be processed, counting the current one.
    pub batches_remaining: usize,
}

impl BudgetClock {
    pub fn new(budget_seconds: f64, batches: usize) -> Self {
        Self { budget_seconds, consumed_seconds: 0.0, batches_remaining: batches }
    }

    pub fn remaining_seconds(&self) -> f64 {
        self.budget_seconds - self.consumed_seconds
    }

    pub fn exhausted(&self) -> bool {
        self.consumed_seconds >= self.budget_seconds
    }

    /// Time allowance per remaining batch.
    pub fn per_batch_allowance(&self) -> f64 {
        self.remaining_seconds() / self.batches_remaining.max(1) as f64
    }

    pub fn charge(&mut self, seconds: f64) {
        self.consumed_seconds += seconds.max(0.0);
    }
}

/// Chooses FULL or INCREMENTAL for the next labeled batch. Without a
/// previous FULL retrain (`last_full_cost` absent) the answer is FULL.
pub fn decide_mode(policy: RetrainPolicy, clock: &BudgetClock, last_full_cost: Option<f64>) -> LearnMode {
    let Some(cost) = last_full_cost else {
        return LearnMode::Full;
    };
    match policy {
        RetrainPolicy::Always => LearnMode::Full,
        RetrainPolicy::Never => LearnMode::Incremental,
        RetrainPolicy::Budgeted => {
            if clock.per_batch_allowance() >= SAFETY_FACTOR * cost {
                LearnMode::Full
            } else {
                LearnMode::Incremental
            }
        }
    }
}

/// Monotone seconds source used for budget accounting.
pub trait TimeSource {
    fn now_seconds(&self) -> f64;
}

/// A clock that never advances: nothing is ever charged to the budget.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrozenTime;

impl TimeSource for FrozenTime {
    fn now_seconds(&self) -> f64 {
        0.0
    }
}

impl<T: TimeSource + ?Sized> TimeSource for &T {
    fn now_seconds(&self) -> f64 {
        (**self).now_seconds()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Number of most recent labeled batches kept for training (K).
    pub window_batches: usize,
    /// Share of encoded features kept after selection (q).
    pub select_proportion: f64,
    /// Trees in the selection pre-model.
    pub pretrain_rounds: usize,
    pub full_retrain: RetrainPolicy,
    /// Tail share of the newest batch held out for early stopping.
    pub valid_fraction: f64,
    pub row_cap: usize,
    pub p0: f64,
    pub step_coeff: f64,
    pub seed: u64,
    pub train: TrainParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            window_batches: 3,
            select_proportion: 0.7,
            pretrain_rounds: 20,
            full_retrain: RetrainPolicy::Budgeted,
            valid_fraction: 0.2,
            row_cap: DEFAULT_ROW_CAP,
            p0: 0.1,
            step_coeff: 0.01,
            seed: 42,
            train: TrainParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: alloc::string::String| Err(Error::InvalidParam(what));
        if self.window_batches < 1 {
            return bad("window_batches must be >= 1".into());
        }
        if !(self.select_proportion > 0.0 && self.select_proportion <= 1.0) {
            return bad(format!("select_proportion must lie in (0, 1], got {}", self.select_proportion));
        }
        if !(0.0..1.0).contains(&self.valid_fraction) {
            return bad(format!("valid_fraction must lie in [0, 1), got {}", self.valid_fraction));
        }
        if self.row_cap == 0 {
            return bad("row_cap must be > 0".into());
        }
        if !(self.p0 > 0.0 && self.p0 <= 1.0) {
            return bad(format!("p0 must lie in (0, 1], got {}", self.p0));
        }
        if !(self.step_coeff >= 0.0) || self.step_coeff.is_infinite() {
            return bad(format!("step_coeff must be a finite value >= 0, got {}", self.step_coeff));
        }
        self.train.validate()
    }

    /// Parameters of the feature-selection pre-model.
    pub fn pretrain_params(&self) -> TrainParams {
        TrainParams { num_iterations_max: self.pretrain_rounds, early_stopping_rounds: 0, ..self.train.clone() }
    }
}

/// Mixes a stream label into the run seed so every consumer of randomness
/// gets its own reproducible sequence.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15;
    for b in label.bytes().map(u64::from).chain(core::iter::once(index)) {
        h = splitmix64(h ^ b);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Everything needed to score raw batches: fill values, encoders, the
/// selected-feature mask and the boosted model.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    pub schema: FeatureSchema,
    pub stats: WindowStats,
    pub encoders: EncoderState,
    /// Mask over the encoded layout; the model sees only the set features.
    pub mask: Vec<bool>,
    pub model: GbdtModel,
}

impl Predictor {
    /// Checks that the parts agree with each other.
    pub fn new(
        schema: FeatureSchema,
        stats: WindowStats,
        encoders: EncoderState,
        mask: Vec<bool>,
        model: GbdtModel,
    ) -> Result<Self> {
        if stats.medians().len() != schema.len() {
            return Err(Error::LayoutMismatch("fill statistics do not match the schema".into()));
        }
        if encoders.columns().len() != schema.len() {
            return Err(Error::LayoutMismatch("encoders do not match the schema".into()));
        }
        if mask.len() != encoders.feature_count() {
            return Err(Error::FeatureMismatch { expected: encoders.feature_count(), found: mask.len() });
        }
        let selected = mask.iter().filter(|&&m| m).count();
        if selected != model.feature_count() {
            return Err(Error::FeatureMismatch { expected: selected, found: model.feature_count() });
        }
        Ok(Self { schema, stats, encoders, mask, model })
    }

    /// Fills, encodes and masks a raw batch.
    pub fn encode(&self, batch: &Batch) -> Result<FeatureMatrix> {
        let filled = fill_missing(batch, &self.schema, &self.stats);
        self.encoders.transform(&filled, &self.schema)?.select_features(&self.mask)
    }

    pub fn predict_margin(&self, batch: &Batch) -> Result<Vec<f64>> {
        self.model.predict_margin(&self.encode(batch)?)
    }

    pub fn predict_proba(&self, batch: &Batch) -> Result<Vec<f64>> {
        self.model.predict_proba(&self.encode(batch)?)
    }
}

/// Margins of the current model on a new batch, used as the starting point
/// of incremental training.
pub fn carry_margins(model: &GbdtModel, encoded: &FeatureMatrix) -> Result<Vec<f64>> {
    model.predict_margin(encoded)
}

/// Number of features kept for proportion `q` of `total`: `⌈q · total⌉`.
pub fn selected_count(q: f64, total: usize) -> usize {
    (ceil_snapped(q * total as f64) as usize).clamp(usize::from(total > 0), total)
}

/// Keeps the `⌈q · F⌉` features with the largest importance; ties (including
/// all-zero importances) go to the lower index.
pub fn mask_from_importances(importances: &[f64], q: f64) -> Vec<bool> {
    let k = selected_count(q, importances.len());
    let mut order: Vec<usize> = (0..importances.len()).collect();
    order.sort_by(|&a, &b| importances[b].total_cmp(&importances[a]).then(a.cmp(&b)));
    let mut mask = vec![false; importances.len()];
    for &f in &order[..k] {
        mask[f] = true;
    }
    mask
}

/// Trains a pre-model with `params` and keeps the top `⌈q · F⌉` features by
/// gain importance.
pub fn select_features_encoded(
    matrix: &FeatureMatrix,
    labels: &[bool],
    params: &TrainParams,
    q: f64,
) -> Result<Vec<bool>> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParam(format!("select proportion must lie in (0, 1], got {}", q)));
    }
    select_guarded(matrix, labels, params, q, &mut |_| true)
}

fn select_guarded(
    matrix: &FeatureMatrix,
    labels: &[bool],
    params: &TrainParams,
    q: f64,
    keep_going: &mut dyn FnMut(usize) -> bool,
) -> Result<Vec<bool>> {
    if !(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l)) {
        return Err(Error::DegenerateLabels);
    }
    let params = TrainParams { early_stopping_rounds: 0, ..params.clone() };
    let zeros = vec![0.0; matrix.row_count()];
    let pre = gbdt::train_guarded(matrix, labels, &zeros, &params, None, keep_going)?;
    Ok(mask_from_importances(pre.importances(), q))
}

/// Feature selection over a missing-filled labeled window.
pub fn select_features(
    window: &[Batch],
    encoders: &EncoderState,
    schema: &FeatureSchema,
    params: &TrainParams,
    q: f64,
) -> Result<Vec<bool>> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let (matrix, labels) = encode_labeled(window, encoders, schema)?;
    select_features_encoded(&matrix, &labels, params, q)
}

fn encode_labeled(
    parts: &[Batch],
    encoders: &EncoderState,
    schema: &FeatureSchema,
) -> Result<(FeatureMatrix, Vec<bool>)> {
    let mut matrices = Vec::with_capacity(parts.len());
    let mut labels = Vec::new();
    for b in parts {
        matrices.push(encoders.transform(b, schema)?);
        labels.extend_from_slice(b.labels().ok_or(Error::Unlabeled(b.index()))?);
    }
    Ok((FeatureMatrix::vstack(&matrices)?, labels))
}

/// Result of [`Pipeline::process_batch`].
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    pub index: u32,
    /// Probability of the positive class for every row, in input order.
    pub predictions: Vec<f64>,
    /// `None` for unlabeled batches.
    pub mode: Option<LearnMode>,
    pub trees_added: usize,
    /// Learning rate used for this batch's training call.
    pub learning_rate: Option<f64>,
    /// Wall time of the whole call.
    pub seconds: f64,
    /// Budget consumption once the call returned.
    pub consumed_seconds: f64,
    /// Budget consumption when the learning step finished, if one ran.
    pub consumed_after_learning: Option<f64>,
}

/// The lifelong-learning state machine.
pub struct Pipeline<T> {
    schema: FeatureSchema,
    config: PipelineConfig,
    time: T,
    window: Vec<Batch>,
    stats: Option<WindowStats>,
    encoders: Option<EncoderState>,
    predictor: Option<Predictor>,
    schedule: LrSchedule,
    clock: BudgetClock,
    last_full_cost: Option<f64>,
    longest_round: f64,
}

impl<T: TimeSource> Pipeline<T> {
    /// `total_batches` is the stream length used to spread the budget.
    pub fn new(
        schema: FeatureSchema,
        config: PipelineConfig,
        budget_seconds: f64,
        total_batches: usize,
        time: T,
    ) -> Result<Self> {
        config.validate()?;
        if !(budget_seconds > 0.0) {
            return Err(Error::InvalidParam(format!("budget must be > 0 seconds, got {}", budget_seconds)));
        }
        Ok(Self {
            schedule: LrSchedule::new(config.p0, config.step_coeff),
            clock: BudgetClock::new(budget_seconds, total_batches),
            schema,
            config,
            time,
            window: Vec::new(),
            stats: None,
            encoders: None,
            predictor: None,
            last_full_cost: None,
            longest_round: 0.0,
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn window(&self) -> &[Batch] {
        &self.window
    }

    /// Encoders fitted on the current window.
    pub fn encoders(&self) -> Option<&EncoderState> {
        self.encoders.as_ref()
    }

    pub fn predictor(&self) -> Option<&Predictor> {
        self.predictor.as_ref()
    }

    pub fn model(&self) -> Option<&GbdtModel> {
        self.predictor.as_ref().map(|p| &p.model)
    }

    pub fn selected(&self) -> Option<&[bool]> {
        self.predictor.as_ref().map(|p| p.mask.as_slice())
    }

    pub fn schedule(&self) -> &LrSchedule {
        &self.schedule
    }

    pub fn clock(&self) -> &BudgetClock {
        &self.clock
    }

    /// Longest boosting round observed so far, in seconds.
    pub fn longest_round(&self) -> f64 {
        self.longest_round
    }

    pub fn into_predictor(self) -> Option<Predictor> {
        self.predictor
    }

    /// Scores the batch with the current model (0.5 everywhere before the
    /// first model exists).
    pub fn predict(&self, batch: &Batch) -> Result<Vec<f64>> {
        match &self.predictor {
            Some(p) => p.predict_proba(batch),
            None => Ok(vec![0.5; batch.row_count()]),
        }
    }

    /// Appends a labeled batch, evicts the oldest beyond `K`, and refits fill
    /// statistics and encoders on the new window.
    pub fn update_window(&mut self, batch: Batch) -> Result<()> {
        if !batch.is_labeled() {
            return Err(Error::Unlabeled(batch.index()));
        }
        if let Some(last) = self.window.last() {
            if batch.index() <= last.index() {
                return Err(Error::OutOfOrder { index: batch.index(), latest: last.index() });
            }
        }
        self.window.push(batch);
        while self.window.len() > self.config.window_batches {
            self.window.remove(0);
        }
        let stats = WindowStats::compute(&self.window, &self.schema);
        let filled: Vec<Batch> = self.window.iter().map(|b| fill_missing(b, &self.schema, &stats)).collect();
        self.encoders = Some(fit_encoders(&filled, &self.schema)?);
        self.stats = Some(stats);
        Ok(())
    }

    /// Test-then-train step: predict, then learn if the batch is labeled and
    /// budget remains.
    pub fn process_batch(&mut self, batch: &Batch) -> Result<BatchOutcome> {
        let started = self.time.now_seconds();
        let predictions = self.predict(batch)?;
        let mut outcome = BatchOutcome {
            index: batch.index(),
            predictions,
            mode: None,
            trees_added: 0,
            learning_rate: None,
            seconds: 0.0,
            consumed_seconds: 0.0,
            consumed_after_learning: None,
        };
        if batch.is_labeled() {
            if let Some(last) = self.window.last() {
                if batch.index() <= last.index() {
                    return Err(Error::OutOfOrder { index: batch.index(), latest: last.index() });
                }
            }
            let spent = self.clock.consumed_seconds + (self.time.now_seconds() - started);
            if spent >= self.clock.budget_seconds {
                outcome.mode = Some(LearnMode::Skipped);
            } else {
                let view = BudgetClock { consumed_seconds: spent, ..self.clock };
                let mode = match (decide_mode(self.config.full_retrain, &view, self.last_full_cost), &self.predictor) {
                    (LearnMode::Incremental, Some(_)) => LearnMode::Incremental,
                    _ => LearnMode::Full,
                };
                let learned = match mode {
                    LearnMode::Full => self.learn_full(batch, started)?,
                    _ => self.learn_incremental(batch, started)?,
                };
                outcome.mode = Some(if learned.budget_blocked { LearnMode::Skipped } else { mode });
                outcome.trees_added = learned.trees_added;
                outcome.learning_rate = Some(learned.learning_rate);
                outcome.consumed_after_learning =
                    Some(self.clock.consumed_seconds + (self.time.now_seconds() - started));
            }
        }
        let seconds = self.time.now_seconds() - started;
        self.clock.charge(seconds);
        self.clock.batches_remaining = self.clock.batches_remaining.saturating_sub(1);
        outcome.seconds = seconds;
        outcome.consumed_seconds = self.clock.consumed_seconds;
        Ok(outcome)
    }

    fn split_newest(&self, newest: &Batch) -> (Batch, Batch) {
        let rows = newest.row_count();
        let valid = (floor(rows as f64 * self.config.valid_fraction) as usize).min(rows.saturating_sub(1));
        newest.split_at(rows - valid)
    }

    fn learn_full(&mut self, batch: &Batch, started: f64) -> Result<Learned> {
        let learn_start = self.time.now_seconds();
        self.update_window(batch.clone())?;
        let learning_rate = self.schedule.advance().min(1.0);
        let stats = self.stats.clone().ok_or(Error::EmptyWindow)?;
        let encoders = self.encoders.clone().ok_or(Error::EmptyWindow)?;

        let filled: Vec<Batch> = self.window.iter().map(|b| fill_missing(b, &self.schema, &stats)).collect();
        let seed = derive_seed(self.config.seed, "subsample", u64::from(batch.index()));
        let mut capped = subsample_rows(&filled, self.config.row_cap, seed);
        let newest = capped.pop().ok_or(Error::EmptyWindow)?;
        let (head, tail) = self.split_newest(&newest);
        capped.push(head);
        let (train_matrix, train_labels) = encode_labeled(&capped, &encoders, &self.schema)?;
        let (valid_matrix, valid_labels) = encode_labeled(core::slice::from_ref(&tail), &encoders, &self.schema)?;

        let mut guard = RoundGuard::new(&self.time, &self.clock, started, self.longest_round);
        let q = self.config.select_proportion;
        let mask = match select_guarded(&train_matrix, &train_labels, &self.config.pretrain_params(), q, &mut |r| {
            guard.keep_going(r)
        }) {
            Ok(mask) => mask,
            // a single-class window has no informative importances
            Err(Error::DegenerateLabels) => mask_from_importances(&vec![0.0; train_matrix.feature_count()], q),
            Err(e) => return Err(e),
        };
        let train_matrix = train_matrix.select_features(&mask)?;
        let valid_matrix = valid_matrix.select_features(&mask)?;

        let mut params = TrainParams { learning_rate, ..self.config.train.clone() };
        let valid_zeros = vec![0.0; valid_matrix.row_count()];
        let valid = usable_validation(&valid_matrix, &valid_labels, &valid_zeros);
        if valid.is_none() {
            params.early_stopping_rounds = 0;
        }
        let zeros = vec![0.0; train_matrix.row_count()];
        let model =
            gbdt::train_guarded(&train_matrix, &train_labels, &zeros, &params, valid, &mut |r| guard.keep_going(r))?;
        self.longest_round = self.longest_round.max(guard.longest);

        let trees_added = model.tree_count();
        // Budget ran out before a single tree: keep serving the old model.
        let budget_blocked = guard.blocked && trees_added == 0 && self.predictor.is_some();
        if !budget_blocked {
            self.predictor = Some(Predictor::new(self.schema.clone(), stats, encoders, mask, model)?);
            self.last_full_cost = Some(self.time.now_seconds() - learn_start);
        }
        Ok(Learned { trees_added, learning_rate, budget_blocked })
    }

    fn learn_incremental(&mut self, batch: &Batch, started: f64) -> Result<Learned> {
        self.update_window(batch.clone())?;
        let learning_rate = self.schedule.advance().min(1.0);
        let predictor = self.predictor.as_ref().ok_or(Error::NoModel)?;

        let seed = derive_seed(self.config.seed, "subsample", u64::from(batch.index()));
        let newest =
            subsample_rows(core::slice::from_ref(batch), self.config.row_cap, seed).pop().ok_or(Error::EmptyData)?;
        let (head, tail) = self.split_newest(&newest);
        let train_matrix = predictor.encode(&head)?;
        let valid_matrix = predictor.encode(&tail)?;
        let train_labels = head.labels().ok_or(Error::Unlabeled(head.index()))?;
        let valid_labels = tail.labels().ok_or(Error::Unlabeled(tail.index()))?;

        let mut params = TrainParams { learning_rate, ..self.config.train.clone() };
        let valid_init = carry_margins(&predictor.model, &valid_matrix)?;
        let valid = usable_validation(&valid_matrix, valid_labels, &valid_init);
        if valid.is_none() {
            params.early_stopping_rounds = 0;
        }
        let mut guard = RoundGuard::new(&self.time, &self.clock, started, self.longest_round);
        let before = predictor.model.tree_count();
        let model =
            gbdt::continue_training_guarded(&predictor.model, &train_matrix, train_labels, &params, valid, &mut |r| {
                guard.keep_going(r)
            })?;
        self.longest_round = self.longest_round.max(guard.longest);
        let trees_added = model.tree_count() - before;
        let budget_blocked = guard.blocked && trees_added == 0;
        if let Some(p) = self.predictor.as_mut() {
            p.model = model;
        }
        Ok(Learned { trees_added, learning_rate, budget_blocked })
    }
}

struct Learned {
    trees_added: usize,
    learning_rate: f64,
    budget_blocked: bool,
}

fn usable_validation<'a>(matrix: &'a FeatureMatrix, labels: &'a [bool], init: &'a [f64]) -> Option<ValidSet<'a>> {
    let both = labels.iter().any(|&l| l) && labels.iter().any(|&l| !l);
    both.then_some(ValidSet { matrix, labels, init_margins: init })
}

/// Refuses a new boosting round when the round, estimated by the longest
/// one seen so far, would end past the budget.
struct RoundGuard<'a, T> {
    time: &'a T,
    consumed_before: f64,
    budget: f64,
    started: f64,
    last: f64,
    longest: f64,
    blocked: bool,
}

impl<'a, T: TimeSource> RoundGuard<'a, T> {
    fn new(time: &'a T, clock: &BudgetClock, started: f64, longest: f64) -> Self {
        let now = time.now_seconds();
        Self {
            time,
            consumed_before: clock.consumed_seconds,
            budget: clock.budget_seconds,
            started,
            last: now,
            longest,
            blocked: false,
        }
    }

    fn keep_going(&mut self, round: usize) -> bool {
        let now = self.time.now_seconds();
        if round > 0 {
            self.longest = self.longest.max(now - self.last);
        }
        self.last = now;
        let spent = self.consumed_before + (now - self.started);
        let ok = spent + self.longest < self.budget;
        if !ok {
            self.blocked = true;
        }
        ok
    }
}
