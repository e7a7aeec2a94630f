//! Vectorizations of persistence diagrams: Betti curves, persistence
//! landscapes and persistence images.

use std::f64::consts::PI;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram::PersistenceDiagram;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingKind {
    Betti,
    Landscape,
    Image,
}

impl EmbeddingKind {
    pub const ALL: [EmbeddingKind; 3] = [EmbeddingKind::Betti, EmbeddingKind::Landscape, EmbeddingKind::Image];

    pub fn name(&self) -> &'static str {
        match self {
            EmbeddingKind::Betti => "betti",
            EmbeddingKind::Landscape => "landscape",
            EmbeddingKind::Image => "image",
        }
    }
}

impl FromStr for EmbeddingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown embedding kind '{s}' (expected betti, landscape or image)")))
    }
}

/// Sampling grid of an embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grid {
    Betti { t_min: f64, t_max: f64, resolution: usize },
    Landscape { t_min: f64, t_max: f64, resolution: usize, layers: usize },
    Image { birth_range: [f64; 2], pers_range: [f64; 2], resolution: usize, sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub kind: EmbeddingKind,
    pub grid: Grid,
}

fn check_line(t_min: f64, t_max: f64, g: usize) -> Result<()> {
    if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
        return Err(Error::arg(format!("grid range [{t_min}, {t_max}] is empty")));
    }
    if g < 2 {
        return Err(Error::arg("grid resolution must be at least 2"));
    }
    Ok(())
}

/// `G` equally spaced samples from `t_min` to `t_max` inclusive.
pub fn grid_points(t_min: f64, t_max: f64, g: usize) -> Vec<f64> {
    let step = (t_max - t_min) / (g - 1) as f64;
    (0..g).map(|i| if i + 1 == g { t_max } else { t_min + i as f64 * step }).collect()
}

/// `values[i] = #{(b, d) ∈ D : b ≤ tᵢ < d}`, counted with multiplicity.
pub fn betti_curve(d: &PersistenceDiagram, t_min: f64, t_max: f64, g: usize) -> Result<EmbeddingVector> {
    check_line(t_min, t_max, g)?;
    let values = grid_points(t_min, t_max, g)
        .into_iter()
        .map(|t| {
            d.points().iter().filter(|p| p.birth <= t && t < p.death).map(|p| u64::from(p.multiplicity)).sum::<u64>() as f64
        })
        .collect();
    Ok(EmbeddingVector { values, kind: EmbeddingKind::Betti, grid: Grid::Betti { t_min, t_max, resolution: g } })
}

/// Layers `λ₁..λ_K` sampled on the grid, stored layer after layer.
pub fn persistence_landscape(
    d: &PersistenceDiagram,
    layers: usize,
    t_min: f64,
    t_max: f64,
    g: usize,
) -> Result<EmbeddingVector> {
    check_line(t_min, t_max, g)?;
    if layers == 0 {
        return Err(Error::arg("landscape needs at least one layer"));
    }
    let pts = d.expanded();
    let mut values = vec![0.0; layers * g];
    let mut tents = Vec::with_capacity(pts.len());
    for (i, t) in grid_points(t_min, t_max, g).into_iter().enumerate() {
        tents.clear();
        tents.extend(pts.iter().map(|&(b, e)| (t - b).min(e - t).max(0.0)));
        tents.sort_by(|a, b| b.total_cmp(a));
        for (k, &v) in tents.iter().take(layers).enumerate() {
            values[k * g + i] = v;
        }
    }
    Ok(EmbeddingVector {
        values,
        kind: EmbeddingKind::Landscape,
        grid: Grid::Landscape { t_min, t_max, resolution: g, layers },
    })
}

/// Gaussian persistence surface in (birth, persistence) coordinates,
/// weighted by `pers / pers_range[1]` clamped to `[0, 1]` and integrated
/// over a `G × G` grid by the midpoint rule. Row `r` covers the `r`-th
/// persistence band from the bottom; columns run along birth.
pub fn persistence_image(
    d: &PersistenceDiagram,
    g: usize,
    sigma: f64,
    birth_range: [f64; 2],
    pers_range: [f64; 2],
) -> Result<EmbeddingVector> {
    if g == 0 {
        return Err(Error::arg("image resolution must be at least 1"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::arg("sigma must be positive"));
    }
    for r in [birth_range, pers_range] {
        if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
            return Err(Error::arg(format!("image range [{}, {}] is empty", r[0], r[1])));
        }
    }
    if pers_range[1] <= 0.0 {
        return Err(Error::arg("persistence range must reach above zero"));
    }
    let wb = (birth_range[1] - birth_range[0]) / g as f64;
    let wp = (pers_range[1] - pers_range[0]) / g as f64;
    let norm = wb * wp / (2.0 * PI * sigma * sigma);
    let mut values = vec![0.0; g * g];
    for p in d.points() {
        let pers = p.persistence();
        let w = (pers / pers_range[1]).clamp(0.0, 1.0) * p.multiplicity as f64;
        if w == 0.0 {
            continue;
        }
        for r in 0..g {
            let y = pers_range[0] + (r as f64 + 0.5) * wp;
            let gy = (-(y - pers).powi(2) / (2.0 * sigma * sigma)).exp();
            for c in 0..g {
                let x = birth_range[0] + (c as f64 + 0.5) * wb;
                let gx = (-(x - p.birth).powi(2) / (2.0 * sigma * sigma)).exp();
                values[r * g + c] += w * norm * gx * gy;
            }
        }
    }
    Ok(EmbeddingVector {
        values,
        kind: EmbeddingKind::Image,
        grid: Grid::Image { birth_range, pers_range, resolution: g, sigma },
    })
}

/// Filtration, birth and persistence ranges of a dataset, each padded by 5%
/// of its width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetRanges {
    pub t: [f64; 2],
    pub birth: [f64; 2],
    pub pers: [f64; 2],
}

fn padded(lo: f64, hi: f64) -> [f64; 2] {
    if !(lo.is_finite() && hi.is_finite()) {
        return [0.0, 1.0];
    }
    let width = hi - lo;
    let pad = if width > 0.0 { 0.05 * width } else { 0.05 * hi.abs().max(1.0) };
    [lo - pad, hi + pad]
}

impl DatasetRanges {
    pub fn from_diagrams(diagrams: &[PersistenceDiagram]) -> Self {
        let pts = || diagrams.iter().flat_map(|d| d.points());
        let fold = |f: fn(&crate::diagram::DiagramPoint) -> f64| {
            pts().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (bmin, bmax) = fold(|p| p.birth);
        let (_, dmax) = fold(|p| p.death);
        let (pmin, pmax) = fold(|p| p.persistence());
        let t = padded(bmin, dmax);
        let birth = padded(bmin, bmax);
        let mut pers = padded(pmin, pmax);
        pers[0] = pers[0].max(0.0);
        Self { t, birth, pers }
    }
}

/// Embedding parameters; ranges default to the dataset's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingSpec {
    pub kind: EmbeddingKind,
    /// Samples per landscape layer or Betti curve.
    pub resolution: usize,
    pub layers: usize,
    /// Pixels per image side.
    pub image_resolution: usize,
    /// Image bandwidth; `None` means 5% of the persistence range.
    pub sigma: Option<f64>,
    pub ranges: Option<DatasetRanges>,
}

impl Default for EmbeddingSpec {
    fn default() -> Self {
        Self { kind: EmbeddingKind::Landscape, resolution: 100, layers: 5, image_resolution: 20, sigma: None, ranges: None }
    }
}

impl EmbeddingSpec {
    pub fn with_kind(kind: EmbeddingKind) -> Self {
        Self { kind, ..Self::default() }
    }

    pub fn embed(&self, d: &PersistenceDiagram, ranges: &DatasetRanges) -> Result<EmbeddingVector> {
        match self.kind {
            EmbeddingKind::Betti => betti_curve(d, ranges.t[0], ranges.t[1], self.resolution),
            EmbeddingKind::Landscape => persistence_landscape(d, self.layers, ranges.t[0], ranges.t[1], self.resolution),
            EmbeddingKind::Image => {
                let sigma = self.sigma.unwrap_or(0.05 * (ranges.pers[1] - ranges.pers[0]));
                persistence_image(d, self.image_resolution, sigma, ranges.birth, ranges.pers)
            }
        }
    }

    /// Embeds every diagram on one shared grid.
    pub fn embed_all(&self, diagrams: &[PersistenceDiagram]) -> Result<Vec<EmbeddingVector>> {
        let ranges = self.ranges.unwrap_or_else(|| DatasetRanges::from_diagrams(diagrams));
        diagrams.par_iter().map(|d| self.embed(d, &ranges)).collect()
    }
}
