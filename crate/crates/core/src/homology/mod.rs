//! Vietoris–Rips filtrations and persistent homology over Z/2Z.

mod boundary;
mod cohomology;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shapes::PointCloud;

pub use boundary::compute_persistence_boundary;
pub use cohomology::compute_persistence;

/// A simplex with its filtration value. Vertices are sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simplex {
    pub vertices: Vec<u32>,
    pub value: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

fn simplex_order(a: &Simplex, b: &Simplex) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.vertices.len().cmp(&b.vertices.len()))
        .then_with(|| a.vertices.cmp(&b.vertices))
}

/// Multiplicative word hasher for vertex-tuple keys; SipHash dominates the
/// run time on complexes with millions of simplices.
#[derive(Default, Clone, Copy)]
pub(crate) struct WordHasher(u64);

impl Hasher for WordHasher {
    fn write(&mut self, bytes: &[u8]) {
        let mut chunks = bytes.chunks_exact(8);
        for c in &mut chunks {
            self.write_u64(u64::from_le_bytes(c.try_into().unwrap()));
        }
        let rest = chunks.remainder();
        if !rest.is_empty() {
            let mut buf = [0u8; 8];
            buf[..rest.len()].copy_from_slice(rest);
            self.write_u64(u64::from_le_bytes(buf));
        }
    }

    fn write_u64(&mut self, i: u64) {
        self.0 = (self.0.rotate_left(5) ^ i).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
    }

    fn write_usize(&mut self, i: usize) {
        self.write_u64(i as u64);
    }

    fn finish(&self) -> u64 {
        self.0
    }
}


/// Simplices ordered by `(value, dimension, vertex tuple)`.
///
/// `max_dim` is the highest homology degree the complex supports; it holds
/// simplices up to dimension `max_dim + 1` so that classes in degree
/// `max_dim` can die. `max_scale` is the truncation value reported as the
/// death of classes that never die inside the complex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredComplex {
    simplices: Vec<Simplex>,
    max_dim: usize,
    max_scale: f64,
}

impl FilteredComplex {
    /// Wraps an arbitrary simplex list, sorting it into filtration order.
    /// Validity (faces present and entering no later than their cofaces) is
    /// checked by [`validate`](Self::validate), which persistence calls.
    pub fn from_simplices(mut simplices: Vec<Simplex>, max_dim: usize, max_scale: f64) -> Result<Self> {
        if !(max_scale > 0.0 && max_scale.is_finite()) {
            return Err(Error::arg("max_scale must be positive and finite"));
        }
        for s in &mut simplices {
            if s.vertices.is_empty() {
                return Err(Error::input("simplex with no vertices"));
            }
            if !s.value.is_finite() || s.value > max_scale {
                return Err(Error::input(format!(
                    "simplex {:?} has value {} outside [.., max_scale = {max_scale}]",
                    s.vertices, s.value
                )));
            }
            if s.vertices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::input(format!(
                    "simplex {:?} vertices must be strictly ascending",
                    s.vertices
                )));
            }
            if s.dim() > max_dim + 1 {
                return Err(Error::input(format!(
                    "simplex {:?} exceeds dimension max_dim + 1 = {}",
                    s.vertices,
                    max_dim + 1
                )));
            }
        }
        simplices.sort_by(simplex_order);
        Ok(Self { simplices, max_dim, max_scale })
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn max_scale(&self) -> f64 {
        self.max_scale
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn count_by_dim(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_dim + 2];
        for s in &self.simplices {
            counts[s.dim()] += 1;
        }
        counts
    }

    /// Index of every simplex, keyed by its vertex tuple.
    pub(crate) fn index(&self) -> Result<SimplexIndex> {
        SimplexIndex::build(&self.simplices)
    }

    /// Checks that every face of every simplex is present with a value no
    /// larger than the simplex's own.
    pub fn validate(&self) -> Result<()> {
        self.validate_with(&self.index()?)
    }

    pub(crate) fn validate_with(&self, index: &SimplexIndex) -> Result<()> {
        let mut face = Vec::new();
        for s in &self.simplices {
            if s.vertices.len() < 2 {
                continue;
            }
            for skip in 0..s.vertices.len() {
                face.clear();
                face.extend(s.vertices.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, v)| *v));
                match index.get(&face) {
                    None => {
                        return Err(Error::input(format!(
                            "face {:?} of simplex {:?} is missing",
                            face, s.vertices
                        )))
                    }
                    Some(f) if self.simplices[f].value > s.value => {
                        return Err(Error::input(format!(
                            "face {:?} enters at {} after simplex {:?} at {}",
                            face, self.simplices[f].value, s.vertices, s.value
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

const DENSE_LIMIT: u128 = 1 << 24;
const ABSENT: u32 = u32::MAX;

enum Table {
    Dense(Vec<u32>),
    Sparse(HashMap<u128, u32, BuildHasherDefault<WordHasher>>),
}

/// Position of each simplex in filtration order, keyed by vertex tuple.
///
/// Tuples of at most four vertices are ranked in the combinatorial number
/// system; a rank table is dense when it fits in memory and hashed
/// otherwise. Larger simplices fall back to hashing the tuple itself.
pub(crate) struct SimplexIndex {
    binom: Vec<[u128; 5]>,
    tables: Vec<Table>,
    wide: HashMap<Vec<u32>, u32, BuildHasherDefault<WordHasher>>,
}

impl SimplexIndex {
    fn build(simplices: &[Simplex]) -> Result<Self> {
        let n_vertices = simplices.iter().flat_map(|s| s.vertices.last()).max().map_or(0, |&v| v as usize + 1);
        let mut binom = vec![[0u128; 5]; n_vertices + 1];
        for (v, row) in binom.iter_mut().enumerate() {
            row[0] = 1;
            for k in 1..5 {
                // C(v, k) = C(v, k-1) * (v - k + 1) / k
                row[k] = if v + 1 > k { row[k - 1] * (v + 1 - k) as u128 / k as u128 } else { 0 };
            }
        }
        let mut counts = [0usize; 4];
        for s in simplices {
            if s.vertices.len() <= 4 {
                counts[s.vertices.len() - 1] += 1;
            }
        }
        let tables = (1..=4)
            .map(|k| {
                let size = binom[n_vertices][k];
                if size <= DENSE_LIMIT {
                    Table::Dense(if counts[k - 1] > 0 { vec![ABSENT; size as usize] } else { Vec::new() })
                } else {
                    Table::Sparse(HashMap::with_capacity_and_hasher(counts[k - 1], Default::default()))
                }
            })
            .collect();
        let mut index = SimplexIndex { binom, tables, wide: HashMap::default() };
        for (i, s) in simplices.iter().enumerate() {
            let fresh = if s.vertices.len() <= 4 {
                let key = index.rank(&s.vertices);
                match &mut index.tables[s.vertices.len() - 1] {
                    Table::Dense(t) => std::mem::replace(&mut t[key as usize], i as u32) == ABSENT,
                    Table::Sparse(m) => m.insert(key, i as u32).is_none(),
                }
            } else {
                index.wide.insert(s.vertices.clone(), i as u32).is_none()
            };
            if !fresh {
                return Err(Error::input(format!("simplex {:?} listed twice", s.vertices)));
            }
        }
        Ok(index)
    }

    fn rank(&self, vertices: &[u32]) -> u128 {
        vertices.iter().enumerate().map(|(k, &v)| self.binom[v as usize][k + 1]).sum()
    }

    pub(crate) fn get(&self, vertices: &[u32]) -> Option<usize> {
        if vertices.is_empty() {
            return None;
        }
        if vertices.len() > 4 {
            return self.wide.get(vertices).map(|&i| i as usize);
        }
        if vertices.last().is_some_and(|&v| v as usize + 1 >= self.binom.len()) {
            return None;
        }
        let key = self.rank(vertices);
        let found = match &self.tables[vertices.len() - 1] {
            Table::Dense(t) => t.get(key as usize).copied().filter(|&i| i != ABSENT),
            Table::Sparse(m) => m.get(&key).copied(),
        };
        found.map(|i| i as usize)
    }

    /// Like [`get`](Self::get) for faces already known to exist.
    pub(crate) fn at(&self, vertices: &[u32]) -> usize {
        self.get(vertices).expect("face of a validated complex")
    }
}

/// Builds the Vietoris–Rips filtration of `pc` under the Euclidean metric.
///
/// Every vertex set of at most `max_dim + 2` points whose diameter is
/// `<= max_scale` becomes a simplex whose filtration value is that diameter.
pub fn build_vr_filtration(pc: &PointCloud, max_scale: f64, max_dim: usize) -> Result<FilteredComplex> {
    if pc.is_empty() {
        return Err(Error::arg("cannot build a filtration on an empty cloud"));
    }
    if !(max_scale > 0.0 && max_scale.is_finite()) {
        return Err(Error::arg(format!("max_scale must be positive, got {max_scale}")));
    }
    let n = pc.len();
    if n > u32::MAX as usize {
        return Err(Error::arg("too many points"));
    }
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = pc.distance(i, j);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let max_vertices = max_dim + 2;
    // Higher-indexed neighbors within max_scale.
    let neighbors: Vec<Vec<u32>> = (0..n)
        .map(|i| ((i + 1)..n).filter(|&j| dist[i * n + j] <= max_scale).map(|j| j as u32).collect())
        .collect();

    let mut simplices: Vec<Simplex> = (0..n as u32).map(|v| Simplex { vertices: vec![v], value: 0.0 }).collect();
    let mut stack: Vec<u32> = Vec::with_capacity(max_vertices);
    for v in 0..n {
        stack.push(v as u32);
        expand_cliques(&mut stack, 0.0, &neighbors[v], &neighbors, &dist, n, max_vertices, &mut simplices);
        stack.pop();
    }
    simplices.sort_by(simplex_order);
    Ok(FilteredComplex { simplices, max_dim, max_scale })
}

#[allow(clippy::too_many_arguments)]
fn expand_cliques(
    clique: &mut Vec<u32>,
    value: f64,
    candidates: &[u32],
    neighbors: &[Vec<u32>],
    dist: &[f64],
    n: usize,
    max_vertices: usize,
    out: &mut Vec<Simplex>,
) {
    if clique.len() == max_vertices {
        return;
    }
    for (k, &c) in candidates.iter().enumerate() {
        let c_us = c as usize;
        let new_value = clique.iter().fold(value, |acc, &u| acc.max(dist[u as usize * n + c_us]));
        clique.push(c);
        out.push(Simplex { vertices: clique.clone(), value: new_value });
        if clique.len() < max_vertices {
            // Intersect remaining candidates with c's higher neighbors.
            let next: Vec<u32> = candidates[k + 1..]
                .iter()
                .copied()
                .filter(|w| neighbors[c_us].binary_search(w).is_ok())
                .collect();
            if !next.is_empty() {
                expand_cliques(clique, new_value, &next, neighbors, dist, n, max_vertices, out);
            }
        }
        clique.pop();
    }
}
