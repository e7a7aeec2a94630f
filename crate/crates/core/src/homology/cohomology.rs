//! Persistence by reducing the coboundary matrix (persistent cohomology).
//!
//! Degree 0 is handled by union-find under the elder rule. For degree
//! `d >= 1` the columns are the `d`-simplices in reverse filtration order and
//! each column lists the simplex's cofaces; the pivot of a column is its
//! earliest coface. A `d`-simplex that was a pivot in degree `d - 1` has a
//! coboundary that reduces to zero and is skipped (clearing).

use crate::diagram::PersistenceDiagram;
use crate::error::{Error, Result};

use super::FilteredComplex;

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

/// Symmetric difference of two ascending index lists.
fn add_columns(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Persistence diagrams in degrees `0..=max_homology_dim`.
///
/// Classes still alive at the end of the filtration are reported with death
/// equal to the complex's `max_scale`; zero-length pairs are dropped.
pub fn compute_persistence(fc: &FilteredComplex, max_homology_dim: usize) -> Result<Vec<PersistenceDiagram>> {
    if max_homology_dim > fc.max_dim() {
        return Err(Error::arg(format!(
            "complex supports homology up to degree {}, asked for {max_homology_dim}",
            fc.max_dim()
        )));
    }
    let index = fc.index()?;
    fc.validate_with(&index)?;
    let simplices = fc.simplices();
    let n = simplices.len();
    let scale = fc.max_scale();
    let dim_of = |i: usize| simplices[i].vertices.len() - 1;

    let mut pairs: Vec<Vec<(f64, f64)>> = vec![Vec::new(); max_homology_dim + 1];
    // Simplices that killed a class one degree down.
    let mut cleared = vec![false; n];

    // Degree 0: union-find, the younger component dies at the merging edge.
    let mut parent: Vec<u32> = (0..n as u32).collect();
    for (i, s) in simplices.iter().enumerate() {
        if s.vertices.len() != 2 {
            continue;
        }
        let a = index.at(&s.vertices[..1]) as u32;
        let b = index.at(&s.vertices[1..]) as u32;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            continue;
        }
        // Roots are vertex indices; a larger index entered later.
        let (elder, younger) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[younger as usize] = elder;
        pairs[0].push((simplices[younger as usize].value, s.value));
        cleared[i] = true;
    }
    for (i, s) in simplices.iter().enumerate() {
        if s.vertices.len() == 1 && find(&mut parent, i as u32) == i as u32 {
            pairs[0].push((s.value, scale));
        }
    }

    if max_homology_dim >= 1 {
        // Coface lists (compressed rows) for simplices of degree 1..=max.
        let mut counts = vec![0u32; n + 1];
        let mut face = Vec::with_capacity(max_homology_dim + 2);
        for s in simplices {
            let d = s.vertices.len() - 1;
            if d < 2 || d > max_homology_dim + 1 {
                continue;
            }
            for skip in 0..s.vertices.len() {
                face.clear();
                face.extend(s.vertices.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, v)| *v));
                counts[index.at(&face) + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let mut fill = offsets.clone();
        let mut cofaces = vec![0u32; offsets[n] as usize];
        for (i, s) in simplices.iter().enumerate() {
            let d = s.vertices.len() - 1;
            if d < 2 || d > max_homology_dim + 1 {
                continue;
            }
            for skip in 0..s.vertices.len() {
                face.clear();
                face.extend(s.vertices.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, v)| *v));
                let f = index.at(&face);
                cofaces[fill[f] as usize] = i as u32;
                fill[f] += 1;
            }
        }
        // Simplices are visited in filtration order, so each list is sorted.

        let mut owner: Vec<u32> = vec![u32::MAX; n];
        let mut reduced: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut scratch = Vec::new();
        for dim in 1..=max_homology_dim {
            for col in (0..n).rev() {
                if dim_of(col) != dim || cleared[col] {
                    continue;
                }
                let mut column: Vec<u32> = cofaces[offsets[col] as usize..offsets[col + 1] as usize].to_vec();
                while let Some(&pivot) = column.first() {
                    let other = owner[pivot as usize];
                    if other == u32::MAX {
                        break;
                    }
                    add_columns(&column, &reduced[other as usize], &mut scratch);
                    std::mem::swap(&mut column, &mut scratch);
                }
                match column.first() {
                    Some(&pivot) => {
                        owner[pivot as usize] = col as u32;
                        cleared[pivot as usize] = true;
                        pairs[dim].push((simplices[col].value, simplices[pivot as usize].value));
                        reduced[col] = column;
                    }
                    None => pairs[dim].push((simplices[col].value, scale)),
                }
            }
            // Columns of this degree are never added to the next degree's.
            for (col, r) in reduced.iter_mut().enumerate() {
                if dim_of(col) == dim {
                    *r = Vec::new();
                }
            }
        }
    }

    pairs
        .into_iter()
        .enumerate()
        .map(|(dim, p)| PersistenceDiagram::from_pairs_lossy(dim, p))
        .collect()
}
