//! Reproducible drifting batch streams covering all four column roles.
//!
//! Rows come from a latent linear concept: each informative column `j` is
//! driven by a standard normal latent `z_j`, and the label is 1 with
//! probability `sigmoid(w · z)`. NUM columns expose `z_j` directly, CAT
//! columns a discretized level of it (under a shuffled token naming), and MVC
//! columns a level token mixed with rare noise tokens. TIME columns increase
//! monotonically across the whole stream.
//!
//! From batch `drift_at` onward the concept changes abruptly: FLIP negates
//! `w`, ROTATE applies a fixed orthogonal mix to `w`, and SHIFT translates
//! the latent distribution along a direction orthogonal to `w` (so the label
//! base rate is preserved whenever more than one latent exists).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::math::sigmoid;
use crate::schema::{Batch, ColumnData, ColumnSpec, FeatureSchema, Role};

/// Norm of the latent weight vector; sets how separable the concept is.
pub const SIGNAL_NORM: f64 = 8.0;
/// Per-coordinate latent offset applied by SHIFT drift, before projection.
pub const SHIFT_OFFSET: f64 = 1.5;
/// First timestamp of every stream (2019-01-01T00:00:00Z).
pub const START_EPOCH: i64 = 1_546_300_800;
/// Seconds between consecutive rows.
pub const ROW_SPACING_SECONDS: i64 = 13;

const CAT_CUTS: [f64; 7] = [-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5];
// uneven cuts so that each level has a distinct frequency
const MVC_CUTS: [f64; 3] = [-0.5, 0.5, 1.5];
const MVC_NOISE_POOL: usize = 200;

pub const LABEL_COLUMN: &str = "label";
pub const POSITIVE_LABEL: &str = "1";
pub const NEGATIVE_LABEL: &str = "0";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftKind {
    Flip,
    Rotate,
    Shift,
}

impl DriftKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DriftKind::Flip => "FLIP",
            DriftKind::Rotate => "ROTATE",
            DriftKind::Shift => "SHIFT",
        }
    }
}

impl fmt::Display for DriftKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DriftKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "FLIP" => Ok(DriftKind::Flip),
            "ROTATE" => Ok(DriftKind::Rotate),
            "SHIFT" => Ok(DriftKind::Shift),
            other => Err(Error::InvalidParam(format!("unknown drift kind {:?}", other))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftSpec {
    pub batches: u32,
    pub rows_per_batch: usize,
    pub n_cat: usize,
    pub n_num: usize,
    pub n_mvc: usize,
    pub n_time: usize,
    /// First batch (1-based) under the new concept; `batches + 1` means no drift.
    pub drift_at: u32,
    pub drift_kind: DriftKind,
    /// Probability that any single cell is blanked out.
    pub missing_rate: f64,
    pub seed: u64,
}

impl Default for DriftSpec {
    fn default() -> Self {
        Self {
            batches: 10,
            rows_per_batch: 5_000,
            n_cat: 4,
            n_num: 4,
            n_mvc: 1,
            n_time: 1,
            drift_at: 6,
            drift_kind: DriftKind::Flip,
            missing_rate: 0.01,
            seed: 42,
        }
    }
}

impl DriftSpec {
    pub fn validate(&self) -> Result<()> {
        if self.batches < 1 {
            return Err(Error::InvalidParam("batches must be >= 1".into()));
        }
        if self.rows_per_batch < 1 {
            return Err(Error::InvalidParam("rows_per_batch must be >= 1".into()));
        }
        if self.drift_at < 1 || self.drift_at > self.batches + 1 {
            return Err(Error::InvalidParam(format!(
                "drift_at must lie in 1..={} (the last value disables drift), got {}",
                self.batches + 1,
                self.drift_at
            )));
        }
        if self.informative() == 0 {
            return Err(Error::InvalidParam("at least one CAT, NUM or MVC column is required".into()));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return Err(Error::InvalidParam(format!("missing_rate must lie in [0, 1), got {}", self.missing_rate)));
        }
        Ok(())
    }

    fn informative(&self) -> usize {
        self.n_cat + self.n_num + self.n_mvc
    }

    pub fn schema(&self) -> Result<FeatureSchema> {
        let mut columns = Vec::new();
        for (prefix, count, role) in [
            ("cat", self.n_cat, Role::Cat),
            ("num", self.n_num, Role::Num),
            ("mvc", self.n_mvc, Role::Mvc),
            ("time", self.n_time, Role::Time),
        ] {
            columns.extend((0..count).map(|i| ColumnSpec::new(format!("{}_{}", prefix, i), role)));
        }
        FeatureSchema::new(columns, LABEL_COLUMN, POSITIVE_LABEL)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticStream {
    pub schema: FeatureSchema,
    pub batches: Vec<Batch>,
    /// Latent weights before and after the drift point.
    pub weights_before: Vec<f64>,
    pub weights_after: Vec<f64>,
}

/// Orthogonal mix used by ROTATE: 90° rotations of consecutive coordinate
/// pairs, and a sign flip of a trailing unpaired coordinate.
fn rotate(w: &[f64]) -> Vec<f64> {
    let mut out = w.to_vec();
    let mut i = 0;
    while i + 1 < w.len() {
        out[i] = -w[i + 1];
        out[i + 1] = w[i];
        i += 2;
    }
    if w.len() % 2 == 1 {
        out[w.len() - 1] = -w[w.len() - 1];
    }
    out
}

/// `SHIFT_OFFSET · 1` with its component along `w` removed. With a single
/// latent nothing is orthogonal and the raw offset is used.
fn shift_vector(w: &[f64]) -> Vec<f64> {
    let ones: Vec<f64> = alloc::vec![SHIFT_OFFSET; w.len()];
    let w_norm2: f64 = w.iter().map(|x| x * x).sum();
    let along: f64 = ones.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / w_norm2;
    let projected: Vec<f64> = ones.iter().zip(w).map(|(a, b)| a - along * b).collect();
    if projected.iter().map(|x| x * x).sum::<f64>() < 1e-12 {
        ones
    } else {
        projected
    }
}

fn blank(rng: &mut ChaCha8Rng, rate: f64) -> bool {
    rate > 0.0 && rng.random::<f64>() < rate
}

fn level(value: f64, cuts: &[f64]) -> usize {
    cuts.partition_point(|&c| c < value)
}

pub fn generate(spec: &DriftSpec) -> Result<SyntheticStream> {
    spec.validate()?;
    let schema = spec.schema()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dims = spec.informative();

    let mut weights_before: Vec<f64> = (0..dims).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = libm::sqrt(weights_before.iter().map(|w| w * w).sum::<f64>());
    weights_before.iter_mut().for_each(|w| *w *= SIGNAL_NORM / norm);
    let weights_after = match spec.drift_kind {
        DriftKind::Flip => weights_before.iter().map(|w| -w).collect(),
        DriftKind::Rotate => rotate(&weights_before),
        DriftKind::Shift => weights_before.clone(),
    };
    let shift = shift_vector(&weights_before);
    let cat_names: Vec<Vec<usize>> = (0..spec.n_cat)
        .map(|_| {
            let mut perm: Vec<usize> = (0..=CAT_CUTS.len()).collect();
            perm.shuffle(&mut rng);
            perm
        })
        .collect();

    let mut batches = Vec::with_capacity(spec.batches as usize);
    let mut global_row: i64 = 0;
    for index in 1..=spec.batches {
        let drifted = index >= spec.drift_at;
        let weights = if drifted { &weights_after } else { &weights_before };
        let shifted = drifted && spec.drift_kind == DriftKind::Shift;

        let rows = spec.rows_per_batch;
        let mut cat: Vec<Vec<Option<String>>> = (0..spec.n_cat).map(|_| Vec::with_capacity(rows)).collect();
        let mut num: Vec<Vec<Option<f64>>> = (0..spec.n_num).map(|_| Vec::with_capacity(rows)).collect();
        let mut mvc: Vec<Vec<Option<Vec<String>>>> = (0..spec.n_mvc).map(|_| Vec::with_capacity(rows)).collect();
        let mut time: Vec<Vec<Option<i64>>> = (0..spec.n_time).map(|_| Vec::with_capacity(rows)).collect();
        let mut labels = Vec::with_capacity(rows);

        for _ in 0..rows {
            let z: Vec<f64> = (0..dims)
                .map(|d| {
                    let offset = if shifted { shift[d] } else { 0.0 };
                    let raw = rng.sample::<f64, _>(StandardNormal) + offset;
                    libm::round(raw * 1e4) / 1e4
                })
                .collect();
            let logit: f64 = weights.iter().zip(&z).map(|(w, z)| w * z).sum();
            labels.push(rng.random::<f64>() < sigmoid(logit));

            let mut j = 0;
            for (c, column) in cat.iter_mut().enumerate() {
                let token = format!("c{}_v{}", c, cat_names[c][level(z[j], &CAT_CUTS)]);
                column.push((!blank(&mut rng, spec.missing_rate)).then_some(token));
                j += 1;
            }
            for column in num.iter_mut() {
                column.push((!blank(&mut rng, spec.missing_rate)).then_some(z[j]));
                j += 1;
            }
            for (m, column) in mvc.iter_mut().enumerate() {
                let mut tokens = alloc::vec![format!("m{}_l{}", m, level(z[j], &MVC_CUTS))];
                let extra = rng.random_range(0..3usize);
                for _ in 0..extra {
                    tokens.push(format!("m{}_n{}", m, rng.random_range(0..MVC_NOISE_POOL)));
                }
                column.push((!blank(&mut rng, spec.missing_rate)).then_some(tokens));
                j += 1;
            }
            let stamp = START_EPOCH + global_row * ROW_SPACING_SECONDS;
            for column in time.iter_mut() {
                column.push((!blank(&mut rng, spec.missing_rate)).then_some(stamp));
            }
            global_row += 1;
        }

        let mut columns = Vec::with_capacity(schema.len());
        columns.extend(cat.into_iter().map(ColumnData::Cat));
        columns.extend(num.into_iter().map(ColumnData::Num));
        columns.extend(mvc.into_iter().map(ColumnData::Mvc));
        columns.extend(time.into_iter().map(ColumnData::Time));
        batches.push(Batch::new(index, &schema, columns, Some(labels))?);
    }
    Ok(SyntheticStream { schema, batches, weights_before, weights_after })
}

/// Label token for a boolean label.
pub fn label_token(label: bool) -> String {
    if label { POSITIVE_LABEL } else { NEGATIVE_LABEL }.to_string()
}
