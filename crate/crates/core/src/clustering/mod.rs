//! k-means over any [`Space`]: k-means++ seeding, alternating assignment
//! and centroid updates until the assignment is stable, and partial
//! optimality diagnostics.
//!
//! Assignments are stored as labels (`labels[j]` is the cluster of item
//! `j`), the extreme points of the column-stochastic relaxation; see
//! [`omega_matrix`] for the 0/1 matrix form.

mod kkt;
mod spaces;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shapes::rng_from_seed;

pub use kkt::{directional_derivative, verify_partial_optimality, ClusterDiagnostics, KktOptions, KktReport};
pub use spaces::{DiagramSpace, Euclidean, MeasureSpace, Space};

/// Costs around one iteration: `start = F(ω^t, Z^t)`,
/// `after_update = F(ω^t, Z^{t+1})`, `after_assignment = F(ω^{t+1}, Z^{t+1})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationCosts {
    pub start: f64,
    pub after_update: f64,
    pub after_assignment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterState<T> {
    pub labels: Vec<usize>,
    pub centroids: Vec<T>,
    /// `F` after seeding and after every iteration.
    pub cost_trace: Vec<f64>,
    pub steps: Vec<IterationCosts>,
    pub iterations: usize,
    pub converged: bool,
    /// Empty clusters re-seeded during updates.
    pub reseeds: usize,
    /// Updates where the centroid rule raised the cluster's cost and the
    /// previous centroid was kept.
    pub kept_centroids: usize,
}

impl<T> ClusterState<T> {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn final_cost(&self) -> f64 {
        *self.cost_trace.last().unwrap_or(&f64::INFINITY)
    }

    /// Largest amount by which an update or an assignment raised the cost.
    pub fn descent_violation(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| (s.after_update - s.start).max(s.after_assignment - s.after_update))
            .fold(0.0, f64::max)
    }
}

/// The `k × n` 0/1 matrix `ω` of a label vector.
pub fn omega_matrix(labels: &[usize], k: usize) -> Vec<Vec<u8>> {
    let mut m = vec![vec![0u8; labels.len()]; k];
    for (j, &l) in labels.iter().enumerate() {
        m[l][j] = 1;
    }
    m
}

/// Labels of a 0/1 matrix whose columns each sum to one.
pub fn labels_from_omega(omega: &[Vec<u8>]) -> Result<Vec<usize>> {
    let n = omega.first().map_or(0, Vec::len);
    if omega.iter().any(|row| row.len() != n) {
        return Err(Error::arg("assignment matrix rows differ in length"));
    }
    (0..n)
        .map(|j| {
            let ones: Vec<usize> = (0..omega.len()).filter(|&i| omega[i][j] != 0).collect();
            if ones.len() != 1 || omega[ones[0]][j] != 1 {
                return Err(Error::arg(format!("column {j} of the assignment matrix does not sum to one")));
            }
            Ok(ones[0])
        })
        .collect()
}

fn check_labels(labels: &[usize], k: usize, n: usize) -> Result<()> {
    if labels.len() != n {
        return Err(Error::arg(format!("{} labels for {n} items", labels.len())));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::arg(format!("label {l} out of range for {k} centroids")));
    }
    Ok(())
}

/// `F(ω, Z) = Σⱼ dist²(Dⱼ, Z_{label j})`.
pub fn cluster_cost<S: Space>(space: &S, data: &[S::Item], labels: &[usize], centroids: &[S::Item]) -> Result<f64> {
    check_labels(labels, centroids.len(), data.len())?;
    let d: Vec<f64> = data
        .par_iter()
        .zip(labels.par_iter())
        .map(|(x, &l)| space.dist2(x, &centroids[l]))
        .collect::<Result<_>>()?;
    Ok(d.iter().sum())
}

/// Squared distances `d[i][j] = dist²(Dⱼ, Zᵢ)`.
pub fn distance_table<S: Space>(space: &S, data: &[S::Item], centroids: &[S::Item]) -> Result<Vec<Vec<f64>>> {
    let k = centroids.len();
    let flat: Vec<f64> = (0..k * data.len())
        .into_par_iter()
        .map(|idx| space.dist2(&data[idx % data.len()], &centroids[idx / data.len()]))
        .collect::<Result<_>>()?;
    Ok(flat.chunks(data.len().max(1)).map(<[f64]>::to_vec).collect())
}

/// Nearest centroid per item; ties go to the lowest index.
fn assign(table: &[Vec<f64>], n: usize) -> (Vec<usize>, f64) {
    let mut labels = vec![0; n];
    let mut cost = 0.0;
    for (j, l) in labels.iter_mut().enumerate() {
        let mut best = 0;
        for i in 1..table.len() {
            if table[i][j] < table[best][j] {
                best = i;
            }
        }
        *l = best;
        cost += table[best][j];
    }
    (labels, cost)
}

/// k-means++ seeding on a precomputed squared-distance function over item
/// indices. Returns the chosen indices.
pub fn kmeans_pp_indices(n: usize, k: usize, seed: u64, dist2: impl Fn(usize, usize) -> Result<f64>) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::arg("k must be at least 1"));
    }
    if k > n {
        return Err(Error::arg(format!("k = {k} exceeds the number of items ({n})")));
    }
    let mut rng = rng_from_seed(seed);
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut nearest: Vec<f64> = (0..n).map(|j| dist2(chosen[0], j)).collect::<Result<_>>()?;
    nearest[chosen[0]] = 0.0;
    while chosen.len() < k {
        let next = match WeightedIndex::new(&nearest) {
            Ok(w) => w.sample(&mut rng),
            // Every remaining item coincides with a chosen one.
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|j| !chosen.contains(j)).collect();
                free[rng.gen_range(0..free.len())]
            }
        };
        chosen.push(next);
        for (j, d) in nearest.iter_mut().enumerate() {
            *d = if chosen.contains(&j) { 0.0 } else { d.min(dist2(next, j)?) };
        }
    }
    Ok(chosen)
}

/// k-means++ seeding: the first centroid uniform over the data, each next
/// one drawn with probability proportional to the squared distance to the
/// nearest centroid so far. Centroids are copies of data items.
pub fn kmeans_pp_init<S: Space>(space: &S, data: &[S::Item], k: usize, seed: u64) -> Result<Vec<S::Item>> {
    let idx = kmeans_pp_indices(data.len(), k, seed, |a, b| space.dist2(&data[a], &data[b]))?;
    Ok(idx.into_iter().map(|i| data[i].clone()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmeansOptions {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
}

/// Algorithm 1 from k-means++ seeds.
pub fn kmeans<S: Space>(space: &S, data: &[S::Item], opts: &KmeansOptions) -> Result<ClusterState<S::Item>> {
    let init = kmeans_pp_init(space, data, opts.k, opts.seed)?;
    kmeans_from(space, data, init, opts.max_iter)
}

/// Alternates centroid updates and nearest-centroid assignment from the
/// given centroids until the assignment no longer changes or `max_iter`
/// updates have run.
///
/// An empty cluster takes the item farthest from its own centroid (among
/// clusters with more than one member) as its new centroid. A centroid
/// update that would raise its cluster's cost is not applied.
pub fn kmeans_from<S: Space>(
    space: &S,
    data: &[S::Item],
    init: Vec<S::Item>,
    max_iter: usize,
) -> Result<ClusterState<S::Item>> {
    kmeans_cached(space, data, init, max_iter, &mut RowCache::default())
}

/// Distance rows `dist²(·, c)` over the data, keyed by centroid.
struct RowCache<T> {
    rows: Vec<(T, Vec<f64>)>,
}

impl<T> Default for RowCache<T> {
    fn default() -> Self {
        Self { rows: Vec::new() }
    }
}

impl<T: Clone + PartialEq + Send + Sync> RowCache<T> {
    fn get(&self, c: &T) -> Option<&Vec<f64>> {
        self.rows.iter().find(|(k, _)| k == c).map(|(_, r)| r)
    }

    fn row<S: Space<Item = T>>(&mut self, space: &S, data: &[T], c: &T) -> Result<Vec<f64>> {
        if let Some(r) = self.get(c) {
            return Ok(r.clone());
        }
        let r: Vec<f64> = data.par_iter().map(|x| space.dist2(x, c)).collect::<Result<_>>()?;
        self.rows.push((c.clone(), r.clone()));
        Ok(r)
    }
}

fn kmeans_cached<S: Space>(
    space: &S,
    data: &[S::Item],
    init: Vec<S::Item>,
    max_iter: usize,
    cache: &mut RowCache<S::Item>,
) -> Result<ClusterState<S::Item>> {
    let (n, k) = (data.len(), init.len());
    if k == 0 || k > n {
        return Err(Error::arg(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    if max_iter == 0 {
        return Err(Error::arg("max_iter must be at least 1"));
    }
    let mut centroids = init;
    let mut table: Vec<Vec<f64>> = centroids.iter().map(|c| cache.row(space, data, c)).collect::<Result<_>>()?;
    let (mut labels, mut cost) = assign(&table, n);
    let mut state = ClusterState {
        labels: Vec::new(),
        centroids: Vec::new(),
        cost_trace: vec![cost],
        steps: Vec::new(),
        iterations: 0,
        converged: false,
        reseeds: 0,
        kept_centroids: 0,
    };

    while state.iterations < max_iter {
        state.iterations += 1;
        let start = cost;

        // Empty clusters take over the worst-served item.
        let mut sizes = vec![0usize; k];
        labels.iter().for_each(|&l| sizes[l] += 1);
        for i in 0..k {
            if sizes[i] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&j| sizes[labels[j]] > 1)
                .max_by(|&a, &b| table[labels[a]][a].total_cmp(&table[labels[b]][b]).then(b.cmp(&a)))
                .ok_or_else(|| Error::InvalidState("no item available to re-seed an empty cluster".into()))?;
            sizes[labels[far]] -= 1;
            sizes[i] = 1;
            labels[far] = i;
            centroids[i] = data[far].clone();
            table[i] = cache.row(space, data, &centroids[i])?;
            state.reseeds += 1;
        }

        // Centroid update, one cluster at a time in parallel.
        let candidates: Vec<S::Item> = (0..k)
            .into_par_iter()
            .map(|i| {
                let members: Vec<&S::Item> = (0..n).filter(|&j| labels[j] == i).map(|j| &data[j]).collect();
                space.mean(&members, Some(&centroids[i]))
            })
            .collect::<Result<_>>()?;
        for (i, candidate) in candidates.into_iter().enumerate() {
            if candidate == centroids[i] {
                continue;
            }
            let row = cache.row(space, data, &candidate)?;
            let old: f64 = (0..n).filter(|&j| labels[j] == i).map(|j| table[i][j]).sum();
            let new: f64 = (0..n).filter(|&j| labels[j] == i).map(|j| row[j]).sum();
            if new <= old {
                centroids[i] = candidate;
                table[i] = row;
            } else {
                state.kept_centroids += 1;
            }
        }
        let after_update: f64 = (0..n).map(|j| table[labels[j]][j]).sum();

        let (next, next_cost) = assign(&table, n);
        state.steps.push(IterationCosts { start, after_update, after_assignment: next_cost });
        state.cost_trace.push(next_cost);
        cost = next_cost;
        let stable = next == labels;
        labels = next;
        if stable {
            state.converged = true;
            break;
        }
    }
    state.labels = labels;
    state.centroids = centroids;
    Ok(state)
}

/// Outcome of several seeded k-means runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartResult<T> {
    pub best: ClusterState<T>,
    pub best_restart: usize,
    pub restart_costs: Vec<f64>,
    pub restart_seeds: Vec<u64>,
    /// Largest descent violation over all restarts.
    pub descent_violation: f64,
}

/// Seed of restart `r`.
pub fn restart_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_add((r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Runs k-means `restarts` times and keeps the lowest final cost (ties go to
/// the earliest restart). Item-to-item distances are computed once, and
/// distances to every centroid met are shared between restarts.
pub fn kmeans_restarts<S: Space>(
    space: &S,
    data: &[S::Item],
    opts: &KmeansOptions,
    restarts: usize,
) -> Result<RestartResult<S::Item>> {
    if restarts == 0 {
        return Err(Error::arg("restarts must be at least 1"));
    }
    let n = data.len();
    if opts.k == 0 || opts.k > n {
        return Err(Error::arg(format!("need 1 <= k <= n, got k = {}, n = {n}", opts.k)));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let d: Vec<f64> = pairs.par_iter().map(|&(i, j)| space.dist2(&data[i], &data[j])).collect::<Result<_>>()?;
    let mut cache = vec![0.0; n * n];
    for (&(i, j), v) in pairs.iter().zip(d) {
        cache[i * n + j] = v;
        cache[j * n + i] = v;
    }
    let mut rows = RowCache { rows: data.iter().cloned().zip(cache.chunks(n).map(<[f64]>::to_vec)).collect() };
    let mut best: Option<(usize, ClusterState<S::Item>)> = None;
    let mut costs = Vec::with_capacity(restarts);
    let mut violation = 0.0f64;
    let mut seeds = Vec::with_capacity(restarts);
    for r in 0..restarts {
        let seed = restart_seed(opts.seed, r);
        let idx = kmeans_pp_indices(n, opts.k, seed, |a, b| Ok(cache[a * n + b]))?;
        let state = kmeans_cached(space, data, idx.into_iter().map(|i| data[i].clone()).collect(), opts.max_iter, &mut rows)?;
        costs.push(state.final_cost());
        seeds.push(seed);
        violation = violation.max(state.descent_violation());
        if best.as_ref().is_none_or(|(_, b)| state.final_cost() < b.final_cost()) {
            best = Some((r, state));
        }
    }
    let (best_restart, best) = best.expect("at least one restart");
    Ok(RestartResult { best, best_restart, restart_costs: costs, restart_seeds: seeds, descent_violation: violation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn distinct_items_form_their_own_clusters() {
        let data = pts(&[0.0, 5.0, 9.0]);
        let s = kmeans(&Euclidean, &data, &KmeansOptions { k: 3, seed: 1, max_iter: 50 }).unwrap();
        assert!(s.converged && s.iterations <= 2);
        assert_eq!(s.final_cost(), 0.0);
        let mut l = s.labels.clone();
        l.sort();
        assert_eq!(l, vec![0, 1, 2]);
    }

    #[test]
    fn far_duplicate_is_always_the_second_seed() {
        let data = pts(&[0.0, 0.0, 0.0, 10.0, 10.0]);
        for seed in 0..20 {
            let idx = kmeans_pp_indices(5, 2, seed, |a, b| Euclidean.dist2(&data[a], &data[b])).unwrap();
            assert_ne!(data[idx[0]], data[idx[1]]);
        }
    }

    #[test]
    fn k_equal_n_seeds_every_item() {
        let data = pts(&[1.0, 1.0, 2.0, 3.0]);
        let mut idx = kmeans_pp_indices(4, 4, 3, |a, b| Euclidean.dist2(&data[a], &data[b])).unwrap();
        idx.sort();
        assert_eq!(idx, vec![0, 1, 2, 3]);
        assert!(kmeans_pp_indices(4, 5, 3, |_, _| Ok(0.0)).is_err());
    }

    #[test]
    fn empty_cluster_is_reseeded() {
        let data = pts(&[0.0, 1.0, 10.0, 11.0]);
        let init = vec![vec![0.5], vec![100.0]];
        let s = kmeans_from(&Euclidean, &data, init, 20).unwrap();
        assert_eq!(s.reseeds, 1);
        assert!(s.converged);
        assert_eq!(s.labels[0], s.labels[1]);
        assert_eq!(s.labels[2], s.labels[3]);
        assert_ne!(s.labels[0], s.labels[2]);
    }

    #[test]
    fn omega_round_trip() {
        let labels = vec![1, 0, 2, 1];
        assert_eq!(labels_from_omega(&omega_matrix(&labels, 3)).unwrap(), labels);
        assert!(labels_from_omega(&[vec![1, 1], vec![0, 1]]).is_err());
    }

    #[test]
    fn cost_rejects_bad_labels() {
        let data = pts(&[0.0, 1.0]);
        assert!(cluster_cost(&Euclidean, &data, &[0, 2], &[vec![0.0], vec![1.0]]).is_err());
        assert!(cluster_cost(&Euclidean, &data, &[0], &[vec![0.0]]).is_err());
        assert_eq!(cluster_cost(&Euclidean, &data, &[0, 1], &[vec![0.0], vec![1.0]]).unwrap(), 0.0);
    }
}
