//! Pipeline glue for the `phkm` command: file formats, the simulated
//! experiment runner, mesh ingestion and SVG plots.

pub mod experiment;
pub mod ingest;
pub mod io;
pub mod pipeline;
pub mod plot;

use std::path::Path;

use anyhow::Result;
use phkm_core::PersistenceDiagram;

pub use experiment::{run_experiment, run_repetition, ExperimentConfig, ExperimentReport, RepetitionRun};
pub use ingest::ingest_mesh_dir;
pub use pipeline::{ClusterResult, Dataset, Representation};

/// The degree-`degree` diagrams listed in a diagram manifest, with the
/// manifest itself.
pub fn load_diagram_set(manifest_path: &Path, degree: usize) -> Result<(Vec<PersistenceDiagram>, io::Manifest)> {
    let manifest: io::Manifest = io::read_json(manifest_path)?;
    let diagrams = manifest
        .resolve(manifest_path)
        .iter()
        .map(|p| io::read_diagram(p, degree))
        .collect::<Result<Vec<_>>>()?;
    Ok((diagrams, manifest))
}
