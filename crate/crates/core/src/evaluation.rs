//! Agreement between two clusterings of the same items.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

fn pairs(n: u64) -> i128 {
    let n = n as i128;
    n * (n - 1) / 2
}

/// Adjusted Rand index from the pair-counting contingency table. Labels are
/// opaque; only the partitions they induce matter.
///
/// When the expected and maximal indices coincide (both partitions a single
/// cluster, or both all singletons) the index is 1 for equal partitions and
/// 0 otherwise.
pub fn adjusted_rand_index<A: Eq + Hash, B: Eq + Hash>(a: &[A], b: &[B]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::arg(format!("label vectors differ in length ({} vs {})", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::arg("at least two items are required"));
    }
    let mut ids_a: HashMap<&A, usize> = HashMap::new();
    let mut ids_b: HashMap<&B, usize> = HashMap::new();
    let mut cells: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: Vec<u64> = Vec::new();
    let mut cols: Vec<u64> = Vec::new();
    for (x, y) in a.iter().zip(b) {
        let next = ids_a.len();
        let i = *ids_a.entry(x).or_insert(next);
        let next = ids_b.len();
        let j = *ids_b.entry(y).or_insert(next);
        if i == rows.len() {
            rows.push(0);
        }
        if j == cols.len() {
            cols.push(0);
        }
        rows[i] += 1;
        cols[j] += 1;
        *cells.entry((i, j)).or_insert(0) += 1;
    }
    // Pair counts are integers; one final division keeps the result
    // correctly rounded.
    let index: i128 = cells.values().map(|&c| pairs(c)).sum();
    let sum_a: i128 = rows.iter().map(|&c| pairs(c)).sum();
    let sum_b: i128 = cols.iter().map(|&c| pairs(c)).sum();
    let total = pairs(a.len() as u64);
    let num = 2 * (index * total - sum_a * sum_b);
    let den = (sum_a + sum_b) * total - 2 * sum_a * sum_b;
    if den == 0 {
        let same = rows.len() == cols.len() && cells.len() == rows.len();
        return Ok(if same { 1.0 } else { 0.0 });
    }
    Ok(num as f64 / den as f64)
}
