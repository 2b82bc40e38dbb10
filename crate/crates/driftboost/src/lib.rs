//! File formats, stream simulation and the command line around
//! [`driftboost_core`].
//!
//! * [`manifest`]: dataset manifests (`key=value` lines).
//! * [`tsv`]: batch files, one header line then one row per line.
//! * [`model`]: the versioned text model file.
//! * [`report`]: per-batch AUC reports.
//! * [`sim`]: test-then-train simulation over a manifest with a wall clock.
//! * [`gen`]: writes synthetic drifting streams to disk.
//! * [`cli`]: argument parsing and the subcommands.

pub mod cli;
pub mod error;
pub mod gen;
pub mod manifest;
pub mod model;
pub mod report;
pub mod sim;
pub mod tsv;

pub use error::{Error, Result};
pub use manifest::{load_manifest, DatasetManifest};
pub use tsv::{load_batch, write_batch};
