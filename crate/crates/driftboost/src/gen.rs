//! Writes synthetic drifting streams as a manifest plus batch files.

use std::path::{Path, PathBuf};

use driftboost_core::synth::{generate, DriftSpec};

use crate::error::{Error, Result};
use crate::manifest::DatasetManifest;
use crate::tsv::save_batch;

pub const MANIFEST_NAME: &str = "manifest.txt";

pub fn batch_file_name(index: u32, batches: u32) -> String {
    let width = batches.to_string().len().max(2);
    format!("batch_{index:0width$}.tsv")
}

/// Generates the stream and writes `manifest.txt` and one TSV per batch
/// into `out_dir`, creating it if needed.
pub fn gen_stream(spec: &DriftSpec, out_dir: &Path, budget_seconds: f64) -> Result<DatasetManifest> {
    let stream = generate(spec)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut paths: Vec<PathBuf> = Vec::with_capacity(stream.batches.len());
    for batch in &stream.batches {
        let path = out_dir.join(batch_file_name(batch.index(), spec.batches));
        save_batch(&path, batch, &stream.schema)?;
        paths.push(path);
    }
    let manifest = DatasetManifest::new(stream.schema, paths, budget_seconds)?;
    let path = out_dir.join(MANIFEST_NAME);
    std::fs::write(&path, manifest.render(out_dir)).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
