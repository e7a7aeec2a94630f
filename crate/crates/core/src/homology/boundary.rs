//! Boundary-matrix column reduction over Z/2Z with clearing.
//!
//! Kept as a reference implementation: [`compute_persistence`] reduces the
//! coboundary matrix instead, which is much faster on Rips complexes. Both
//! produce the same diagrams.
//!
//! [`compute_persistence`]: super::compute_persistence

use crate::diagram::PersistenceDiagram;
use crate::error::{Error, Result};

use super::FilteredComplex;

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
pub fn compute_persistence_boundary(fc: &FilteredComplex, max_homology_dim: usize) -> Result<Vec<PersistenceDiagram>> {
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

    // Column indices grouped by dimension, in filtration order.
    let top = max_homology_dim + 1;
    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    for (i, s) in simplices.iter().enumerate() {
        if s.dim() <= top {
            by_dim[s.dim()].push(i);
        }
    }

    let mut pivot_of_row: Vec<Option<u32>> = vec![None; n];
    let mut cleared = vec![false; n];
    let mut reduced: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut face = Vec::with_capacity(top + 1);
    let mut scratch = Vec::new();

    for dim in (1..=top).rev() {
        for &col in &by_dim[dim] {
            if cleared[col] {
                continue;
            }
            let verts = &simplices[col].vertices;
            let mut column: Vec<u32> = Vec::with_capacity(verts.len());
            for skip in 0..verts.len() {
                face.clear();
                face.extend(verts.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, v)| *v));
                column.push(index.at(&face) as u32);
            }
            column.sort_unstable();
            while let Some(&low) = column.last() {
                match pivot_of_row[low as usize] {
                    Some(other) => {
                        add_columns(&column, &reduced[other as usize], &mut scratch);
                        std::mem::swap(&mut column, &mut scratch);
                    }
                    None => break,
                }
            }
            if let Some(&low) = column.last() {
                pivot_of_row[low as usize] = Some(col as u32);
                cleared[low as usize] = true;
                reduced[col] = column;
            }
        }
    }

    let scale = fc.max_scale();
    let mut pairs: Vec<Vec<(f64, f64)>> = vec![Vec::new(); max_homology_dim + 1];
    let mut is_death = vec![false; n];
    for (row, pivot) in pivot_of_row.iter().enumerate() {
        if let Some(col) = pivot {
            is_death[*col as usize] = true;
            let dim = simplices[row].dim();
            if dim <= max_homology_dim {
                pairs[dim].push((simplices[row].value, simplices[*col as usize].value));
            }
        }
    }
    for (i, s) in simplices.iter().enumerate() {
        let dim = s.dim();
        if dim <= max_homology_dim && pivot_of_row[i].is_none() && !is_death[i] {
            pairs[dim].push((s.value, scale));
        }
    }

    pairs
        .into_iter()
        .enumerate()
        .map(|(dim, p)| PersistenceDiagram::from_pairs_lossy(dim, p))
        .collect()
}
