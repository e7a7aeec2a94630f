//! File formats for intermediate artifacts.
//!
//! * clouds: CSV with one point per row and a header `x,y,z` (or `x1..xd`
//!   for other dimensions);
//! * manifests: JSON listing artifact files with their class labels;
//! * diagrams: JSON array with one diagram per homology degree;
//! * measures: JSON object `{"dimension", "atoms"}`;
//! * vectors: CSV with one embedding per row plus a `.grid.json` sidecar.
//!
//! Floats are written in shortest round-trip form, so every format reads
//! back exactly what was written.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use phkm_core::embeddings::{EmbeddingKind, EmbeddingVector, Grid};
use phkm_core::{PersistenceDiagram, PersistenceMeasure, PointCloud};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the manifest's directory.
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// An ordered list of artifact files with their class labels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn labels(&self) -> Result<Vec<String>> {
        self.entries
            .iter()
            .map(|e| e.label.clone().with_context(|| format!("manifest entry {} has no label", e.file)))
            .collect()
    }

    pub fn resolve(&self, manifest_path: &Path) -> Vec<PathBuf> {
        let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
        self.entries.iter().map(|e| base.join(&e.file)).collect()
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn csv_header(dim: usize) -> Vec<String> {
    if dim == 3 {
        vec!["x".into(), "y".into(), "z".into()]
    } else {
        (1..=dim).map(|i| format!("x{i}")).collect()
    }
}

pub fn write_cloud_csv(path: &Path, pc: &PointCloud) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(csv_header(pc.dim()))?;
    for p in pc.points() {
        w.write_record(p.iter().map(|c| c.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn parse_row(record: &csv::StringRecord, path: &Path, row: usize) -> Result<Vec<f64>> {
    record
        .iter()
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("{}: row {row}: bad number '{s}'", path.display())))
        .collect()
}

pub fn read_cloud_csv(path: &Path) -> Result<PointCloud> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut points = Vec::new();
    for (i, rec) in r.records().enumerate() {
        points.push(parse_row(&rec?, path, i + 1)?);
    }
    PointCloud::new(points).with_context(|| format!("{}", path.display()))
}

pub fn write_diagrams(path: &Path, diagrams: &[PersistenceDiagram]) -> Result<()> {
    write_json(path, diagrams)
}

pub fn read_diagrams(path: &Path) -> Result<Vec<PersistenceDiagram>> {
    read_json(path)
}

/// The diagram of the given degree from a diagram file.
pub fn read_diagram(path: &Path, degree: usize) -> Result<PersistenceDiagram> {
    let all = read_diagrams(path)?;
    match all.into_iter().find(|d| d.dimension() == degree) {
        Some(d) => Ok(d),
        None => bail!("{} has no diagram in degree {degree}", path.display()),
    }
}

pub fn write_measure(path: &Path, m: &PersistenceMeasure) -> Result<()> {
    write_json(path, m)
}

pub fn read_measure(path: &Path) -> Result<PersistenceMeasure> {
    read_json(path)
}

/// Sidecar describing the rows of a vectors file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorsMeta {
    pub kind: EmbeddingKind,
    pub grid: Grid,
    pub degree: usize,
    /// One entry per row.
    pub labels: Vec<Option<String>>,
}

pub fn sidecar_path(vectors: &Path) -> PathBuf {
    let mut s = vectors.as_os_str().to_owned();
    s.push(".grid.json");
    PathBuf::from(s)
}

pub fn write_vectors(path: &Path, vectors: &[EmbeddingVector], degree: usize, labels: &[Option<String>]) -> Result<()> {
    let first = vectors.first().context("no vectors to write")?;
    ensure!(labels.len() == vectors.len(), "{} labels for {} vectors", labels.len(), vectors.len());
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("writing {}", path.display()))?;
    for v in vectors {
        ensure!(v.grid == first.grid && v.kind == first.kind, "vectors on different grids");
        w.write_record(v.values.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    let meta = VectorsMeta { kind: first.kind, grid: first.grid.clone(), degree, labels: labels.to_vec() };
    write_json(&sidecar_path(path), &meta)
}

pub fn read_vectors(path: &Path) -> Result<(Vec<Vec<f64>>, VectorsMeta)> {
    let meta: VectorsMeta = read_json(&sidecar_path(path))?;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        rows.push(parse_row(&rec?, path, i + 1)?);
    }
    ensure!(rows.len() == meta.labels.len(), "{}: {} rows but {} labels", path.display(), rows.len(), meta.labels.len());
    Ok((rows, meta))
}

/// Rebuilds the embedding vectors of a vectors file.
pub fn vectors_as_embeddings(rows: Vec<Vec<f64>>, meta: &VectorsMeta) -> Vec<EmbeddingVector> {
    rows.into_iter().map(|values| EmbeddingVector { values, kind: meta.kind, grid: meta.grid.clone() }).collect()
}
