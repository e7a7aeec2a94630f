use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An off-diagonal point of a persistence diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub birth: f64,
    pub death: f64,
    pub multiplicity: u32,
}

impl DiagramPoint {
    pub fn new(birth: f64, death: f64) -> Self {
        Self { birth, death, multiplicity: 1 }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn coords(&self) -> (f64, f64) {
        (self.birth, self.death)
    }
}

pub(crate) fn cmp_pair(a: &(f64, f64), b: &(f64, f64)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
}

/// A finite multiset of points strictly above the diagonal, for one homology
/// degree. Diagonal points are implicit.
///
/// Points are kept sorted by `(birth, death)` with coincident points merged
/// into one entry carrying a multiplicity, so two diagrams are equal as
/// multisets exactly when they compare equal.
///
/// The JSON form is `{"dimension": k, "points": [[b, d], ...]}` with a
/// repeated pair for every unit of multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiagramRepr", into = "DiagramRepr")]
pub struct PersistenceDiagram {
    dimension: usize,
    points: Vec<DiagramPoint>,
}

#[derive(Serialize, Deserialize)]
struct DiagramRepr {
    dimension: usize,
    points: Vec<[f64; 2]>,
}

impl TryFrom<DiagramRepr> for PersistenceDiagram {
    type Error = Error;

    fn try_from(r: DiagramRepr) -> Result<Self> {
        PersistenceDiagram::new(r.dimension, r.points.into_iter().map(|[b, d]| (b, d)))
    }
}

impl From<PersistenceDiagram> for DiagramRepr {
    fn from(d: PersistenceDiagram) -> Self {
        DiagramRepr {
            dimension: d.dimension,
            points: d.expanded().into_iter().map(|(b, d)| [b, d]).collect(),
        }
    }
}

impl PersistenceDiagram {
    /// The empty diagram `D_∅` in the given degree.
    pub fn empty(dimension: usize) -> Self {
        Self { dimension, points: Vec::new() }
    }

    /// Builds a diagram from `(birth, death)` pairs; repeated pairs add
    /// multiplicity.
    pub fn new(dimension: usize, pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::from_points(dimension, pairs.into_iter().map(|(b, d)| DiagramPoint::new(b, d)))
    }

    pub fn from_points(dimension: usize, points: impl IntoIterator<Item = DiagramPoint>) -> Result<Self> {
        let mut pts: Vec<DiagramPoint> = Vec::new();
        for p in points {
            if !p.birth.is_finite() || !p.death.is_finite() {
                return Err(Error::input(format!("non-finite diagram point ({}, {})", p.birth, p.death)));
            }
            if p.birth >= p.death {
                return Err(Error::input(format!(
                    "diagram point ({}, {}) is not above the diagonal",
                    p.birth, p.death
                )));
            }
            if p.multiplicity > 0 {
                pts.push(p);
            }
        }
        pts.sort_by(|a, b| cmp_pair(&a.coords(), &b.coords()));
        let mut merged: Vec<DiagramPoint> = Vec::with_capacity(pts.len());
        for p in pts {
            match merged.last_mut() {
                Some(last) if last.birth == p.birth && last.death == p.death => {
                    last.multiplicity += p.multiplicity;
                }
                _ => merged.push(p),
            }
        }
        Ok(Self { dimension, points: merged })
    }

    /// Like [`new`](Self::new) but silently drops pairs with `birth >= death`.
    pub fn from_pairs_lossy(dimension: usize, pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::new(dimension, pairs.into_iter().filter(|(b, d)| b < d))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Distinct points with multiplicities, sorted by `(birth, death)`.
    pub fn points(&self) -> &[DiagramPoint] {
        &self.points
    }

    /// Number of off-diagonal points counted with multiplicity.
    pub fn cardinality(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One `(birth, death)` entry per unit of multiplicity, in sorted order.
    pub fn expanded(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.coords(), p.multiplicity as usize))
            .collect()
    }

    /// Persistence values counted with multiplicity, largest first.
    pub fn persistences(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.expanded().into_iter().map(|(b, d)| d - b).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Multiset union of two diagrams of the same degree.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.dimension != other.dimension {
            return Err(Error::arg("cannot merge diagrams of different homology degree"));
        }
        Self::from_points(self.dimension, self.points.iter().chain(&other.points).copied())
    }

    /// Multiplies every multiplicity by `factor`.
    pub fn scale_multiplicity(&self, factor: u32) -> Self {
        let points = if factor == 0 {
            Vec::new()
        } else {
            self.points.iter().map(|p| DiagramPoint { multiplicity: p.multiplicity * factor, ..*p }).collect()
        };
        Self { dimension: self.dimension, points }
    }
}
