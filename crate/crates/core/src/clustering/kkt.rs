use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shapes::rng_from_seed;

use super::{check_labels, distance_table, ClusterState, Space};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktOptions {
    /// Random perturbations tried per centroid.
    pub perturbations: usize,
    /// Perturbation size relative to the centroid's length scale.
    pub relative_scale: f64,
    /// Relative slack when comparing Fréchet values.
    pub slack: f64,
    /// Bound on the Euclidean gradient norm.
    pub gradient_tol: f64,
    pub seed: u64,
}

impl Default for KktOptions {
    fn default() -> Self {
        Self { perturbations: 16, relative_scale: 0.02, slack: 1e-9, gradient_tol: 1e-6, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDiagnostics {
    pub size: usize,
    /// `Σ dist²(Dⱼ, Zᵢ)` over members.
    pub value: f64,
    /// Lowest value found among perturbed centroids.
    pub best_perturbed: Option<f64>,
    /// Value after re-running the centroid rule from `Zᵢ`.
    pub rerun: f64,
    pub gradient_norm: Option<f64>,
    pub centroid_ok: bool,
}

/// Partial optimality and KKT diagnostics of a converged state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// No single item is closer to another centroid than to its own.
    pub is_partial_optimal_assignment: bool,
    /// No probed centroid beats the current one on its cluster.
    pub is_partial_optimal_centroids: bool,
    /// `μⱼ = −minᵢ dist²(Dⱼ, Zᵢ)`.
    pub multipliers: Vec<f64>,
    /// Largest of the complementary-slackness residual
    /// `|dist²(Dⱼ, Z_{label j}) + μⱼ|`, the dual-feasibility residual
    /// `max(0, −(dist²(Dⱼ, Zᵢ) + μⱼ))`, the Euclidean gradient norm, and any
    /// improvement found over a centroid's value.
    pub max_first_order_violation: f64,
    pub clusters: Vec<ClusterDiagnostics>,
}

/// Checks the two conditions of a partial optimal point: (i) each item's
/// assigned centroid is a nearest one, exactly; (ii) each centroid is not
/// improved by random perturbations nor by re-running the centroid rule
/// from it (and, for vectors, the gradient vanishes).
pub fn verify_partial_optimality<S: Space>(
    space: &S,
    data: &[S::Item],
    state: &ClusterState<S::Item>,
    opts: &KktOptions,
) -> Result<KktReport> {
    if !state.converged {
        return Err(Error::InvalidState("partial optimality is only defined for a converged state".into()));
    }
    let (n, k) = (data.len(), state.centroids.len());
    check_labels(&state.labels, k, n)?;
    let table = distance_table(space, data, &state.centroids)?;

    let mut assignment_ok = true;
    let mut violation = 0.0f64;
    let mut multipliers = Vec::with_capacity(n);
    for j in 0..n {
        let own = table[state.labels[j]][j];
        let min = (0..k).map(|i| table[i][j]).fold(f64::INFINITY, f64::min);
        if min < own {
            assignment_ok = false;
        }
        let mu = -min;
        multipliers.push(mu);
        violation = violation.max((own + mu).abs());
        for row in &table {
            violation = violation.max(-(row[j] + mu));
        }
    }

    let mut rng = rng_from_seed(opts.seed);
    let mut clusters = Vec::with_capacity(k);
    let mut centroids_ok = true;
    for (i, z) in state.centroids.iter().enumerate() {
        let members: Vec<&S::Item> = (0..n).filter(|&j| state.labels[j] == i).map(|j| &data[j]).collect();
        let value: f64 = (0..n).filter(|&j| state.labels[j] == i).map(|j| table[i][j]).sum();
        let tol = opts.slack * (1.0 + value);
        let cluster_value = |c: &S::Item| -> Result<f64> { members.iter().map(|m| space.dist2(m, c)).sum() };

        let mut best_perturbed: Option<f64> = None;
        let scale = opts.relative_scale * space.length_scale(z).max(f64::MIN_POSITIVE);
        for _ in 0..opts.perturbations {
            let v = cluster_value(&space.perturb(z, scale, &mut rng))?;
            best_perturbed = Some(best_perturbed.map_or(v, |b: f64| b.min(v)));
        }
        let rerun = if members.is_empty() { value } else { cluster_value(&space.mean(&members, Some(z))?)? };
        let gradient_norm = space.gradient_norm(z, &members);

        let mut ok = rerun >= value - tol && best_perturbed.is_none_or(|b| b >= value - tol);
        violation = violation.max(value - rerun).max(best_perturbed.map_or(0.0, |b| value - b));
        if let Some(g) = gradient_norm {
            ok &= g <= opts.gradient_tol;
            violation = violation.max(g);
        }
        centroids_ok &= ok;
        clusters.push(ClusterDiagnostics {
            size: members.len(),
            value,
            best_perturbed,
            rerun,
            gradient_norm,
            centroid_ok: ok,
        });
    }

    Ok(KktReport {
        is_partial_optimal_assignment: assignment_ok,
        is_partial_optimal_centroids: centroids_ok,
        multipliers,
        max_first_order_violation: violation.max(0.0),
        clusters,
    })
}

/// `Σᵢⱼ vᵢⱼ dist²(Dⱼ, Zᵢ)` at the supplied minimizing centroids, for a
/// direction `v` (`k × n`) feasible at `labels`: columns of `v` sum to zero
/// and `vᵢⱼ ≥ 0` wherever item `j` is not in cluster `i`.
pub fn directional_derivative<S: Space>(
    space: &S,
    data: &[S::Item],
    labels: &[usize],
    v: &[Vec<f64>],
    centroids: &[S::Item],
) -> Result<f64> {
    let (n, k) = (data.len(), centroids.len());
    check_labels(labels, k, n)?;
    if v.len() != k || v.iter().any(|row| row.len() != n) {
        return Err(Error::arg(format!("direction must be {k} x {n}")));
    }
    for j in 0..n {
        let col: f64 = (0..k).map(|i| v[i][j]).sum();
        let scale: f64 = (0..k).map(|i| v[i][j].abs()).sum();
        if col.abs() > 1e-12 * (1.0 + scale) {
            return Err(Error::arg(format!("column {j} of the direction does not sum to zero")));
        }
        if let Some(i) = (0..k).find(|&i| i != labels[j] && v[i][j] < 0.0) {
            return Err(Error::arg(format!("direction leaves the feasible set at ({i}, {j})")));
        }
    }
    let mut total = 0.0;
    for (i, row) in v.iter().enumerate() {
        for (j, &vij) in row.iter().enumerate() {
            if vij != 0.0 {
                total += vij * space.dist2(&data[j], &centroids[i])?;
            }
        }
    }
    Ok(total)
}
