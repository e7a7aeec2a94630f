//! Point clouds from triangle-mesh vertices (OFF and OBJ).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use log::warn;
use phkm_core::shapes::rng_from_seed;
use phkm_core::PointCloud;
use rand::seq::index;
use walkdir::WalkDir;

use crate::experiment::derive_seed;

fn numbers(line: &str, what: &str, count: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = line
        .split_whitespace()
        .take(count)
        .map(|t| t.parse::<f64>().with_context(|| format!("bad {what} '{t}'")))
        .collect::<Result<_>>()?;
    ensure!(v.len() == count, "expected {count} values in {what} line '{line}'");
    Ok(v)
}

/// Vertex coordinates of an OFF file.
pub fn parse_off(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    let header = lines.next().context("empty OFF file")?;
    let rest = header.strip_prefix("OFF").context("missing OFF header")?.trim();
    let counts = if rest.is_empty() { lines.next().context("missing OFF counts")? } else { rest };
    let nv = numbers(counts, "count", 1)?[0];
    ensure!(nv >= 0.0 && nv.fract() == 0.0, "bad vertex count {nv}");
    let nv = nv as usize;
    let mut verts = Vec::with_capacity(nv);
    for _ in 0..nv {
        let line = lines.next().with_context(|| format!("OFF file ends before its {nv} vertices"))?;
        verts.push(numbers(line, "vertex", 3)?);
    }
    Ok(verts)
}

/// Vertex coordinates (`v x y z` lines) of an OBJ file.
pub fn parse_obj(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut verts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("v ").or_else(|| line.strip_prefix("v\t")) {
            verts.push(numbers(rest, "vertex", 3).with_context(|| format!("line {}", i + 1))?);
        }
    }
    Ok(verts)
}

pub fn read_mesh(path: &Path) -> Result<PointCloud> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let verts = match ext.as_deref() {
        Some("off") => parse_off(&text),
        Some("obj") => parse_obj(&text),
        _ => bail!("{} is neither OFF nor OBJ", path.display()),
    }
    .with_context(|| format!("parsing {}", path.display()))?;
    PointCloud::new(verts).with_context(|| format!("{}", path.display()))
}

/// Uniform sample of `target` points without replacement, in their original
/// order. Clouds with at most `target` points are returned unchanged.
pub fn subsample(pc: &PointCloud, target: usize, seed: u64) -> Result<PointCloud> {
    ensure!(target >= 1, "subsample target must be at least 1");
    if pc.len() <= target {
        return Ok(pc.clone());
    }
    let mut idx = index::sample(&mut rng_from_seed(seed), pc.len(), target).into_vec();
    idx.sort_unstable();
    let mut out = PointCloud::new(idx.iter().map(|&i| pc.point(i).to_vec()).collect())?;
    out.label = pc.label.clone();
    out.seed = Some(seed);
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct IngestedMesh {
    pub path: PathBuf,
    pub label: String,
    pub cloud: PointCloud,
}

/// Reads every OFF/OBJ file below `dir`, labeling each by the name of the
/// first-level subdirectory that contains it. Files are visited in path
/// order. Unreadable files and files outside a class subdirectory are
/// skipped with a warning.
pub fn ingest_mesh_dir(dir: &Path, target: Option<usize>, seed: u64) -> Result<Vec<IngestedMesh>> {
    ensure!(dir.is_dir(), "{} is not a directory", dir.display());
    let mut out = Vec::new();
    let mut visited = 0u64;
    let walker = WalkDir::new(dir).sort_by_file_name();
    for entry in walker {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                warn!("skipping: {e}");
                continue;
            }
        };
        let path = entry.path();
        let is_mesh = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("off") || e.eq_ignore_ascii_case("obj"));
        if !entry.file_type().is_file() || !is_mesh {
            continue;
        }
        visited += 1;
        let rel = path.strip_prefix(dir).unwrap_or(path);
        let label = match rel.components().count() {
            n if n >= 2 => rel.components().next().unwrap().as_os_str().to_string_lossy().into_owned(),
            _ => {
                warn!("skipping {}: not inside a class subdirectory", path.display());
                continue;
            }
        };
        let loaded = read_mesh(path).and_then(|pc| {
            let pc = pc.with_label(label.clone());
            match target {
                Some(t) => subsample(&pc, t, derive_seed(seed, &[visited])),
                None => Ok(pc),
            }
        });
        match loaded {
            Ok(cloud) => out.push(IngestedMesh { path: path.to_path_buf(), label, cloud }),
            Err(e) => warn!("skipping {}: {e:#}", path.display()),
        }
    }
    if out.is_empty() {
        warn!("no meshes found in {}", dir.display());
    }
    Ok(out)
}
