//! Gradient-boosted decision trees for concept-drifting batch streams.
//!
//! The crate is `no_std` (it needs `alloc`) and contains every algorithmic
//! piece of the system: column schemas and missing-value filling, the dual
//! ordinal/frequency categorical encoder, a histogram GBDT with warm-start
//! continuation, AUC scoring, the sliding-window drift pipeline, and a
//! synthetic drifting-stream generator. File formats and the command line
//! live in the `driftboost` crate.
//!
//! Enable the `std` feature for `std::error::Error` impls, and `parallel`
//! to build split histograms across features on the rayon pool.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod encode;
pub mod error;
pub mod gbdt;
mod math;
pub mod metrics;
pub mod pipeline;
pub mod schema;
pub mod synth;

pub use encode::{fit_encoders, transform_batch, EncoderState, FeatureMatrix};
pub use error::{Error, Result};
pub use gbdt::{GbdtModel, TrainParams};
pub use metrics::{auc, batch_report, BatchReport};
pub use pipeline::{LrSchedule, Pipeline, PipelineConfig, Predictor};
pub use schema::{Batch, ColumnData, FeatureSchema, Role};
