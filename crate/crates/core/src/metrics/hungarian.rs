//! Dense min-cost assignment by shortest augmenting paths with column
//! prices (Jonker–Volgenant style): column reduction, a greedy pass over
//! tight cells, then one Dijkstra-like augmentation per free row.

const FREE: usize = usize::MAX;

/// Minimum-cost perfect assignment on an `n × n` row-major cost matrix.
/// Returns `assignment[row] = col`.
///
/// Ties are resolved deterministically: among equally short augmenting
/// columns the lowest index wins.
pub fn solve(n: usize, cost: &[f64]) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    if n == 0 {
        return Vec::new();
    }
    // Column prices start at the column minima, so every reduced cost
    // `c_ij - v_j` is non-negative.
    let mut v: Vec<f64> = (0..n).map(|j| (0..n).map(|i| cost[i * n + j]).fold(f64::INFINITY, f64::min)).collect();
    let mut row_of = vec![FREE; n];
    let mut col_of = vec![FREE; n];
    for i in 0..n {
        let row = &cost[i * n..(i + 1) * n];
        if let Some(j) = (0..n).find(|&j| row_of[j] == FREE && row[j] == v[j]) {
            row_of[j] = i;
            col_of[i] = j;
        }
    }

    let mut d = vec![0.0f64; n];
    let mut pred = vec![0usize; n];
    let mut done = vec![false; n];
    let mut scanned: Vec<usize> = Vec::with_capacity(n);
    for free in 0..n {
        if col_of[free] != FREE {
            continue;
        }
        let row = &cost[free * n..(free + 1) * n];
        for j in 0..n {
            d[j] = row[j] - v[j];
            pred[j] = free;
            done[j] = false;
        }
        scanned.clear();
        let (sink, mu) = loop {
            let mut j_min = FREE;
            let mut mu = f64::INFINITY;
            for j in 0..n {
                if !done[j] && d[j] < mu {
                    mu = d[j];
                    j_min = j;
                }
            }
            let j = j_min;
            done[j] = true;
            let i = row_of[j];
            if i == FREE {
                break (j, mu);
            }
            scanned.push(j);
            let row_i = &cost[i * n..(i + 1) * n];
            let h = row_i[j] - v[j] - mu;
            for k in 0..n {
                if !done[k] {
                    let alt = row_i[k] - v[k] - h;
                    if alt < d[k] {
                        d[k] = alt;
                        pred[k] = i;
                    }
                }
            }
        };
        for &j in &scanned {
            v[j] += d[j] - mu;
        }
        let mut j = sink;
        loop {
            let i = pred[j];
            row_of[j] = i;
            let prev = col_of[i];
            col_of[i] = j;
            if i == free {
                break;
            }
            j = prev;
        }
    }
    col_of
}
