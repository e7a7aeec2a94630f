//! Representations and the clustering step shared by the subcommands and the
//! experiment runner.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use phkm_core::clustering::{
    kmeans_restarts, verify_partial_optimality, ClusterState, DiagramSpace, Euclidean, IterationCosts, KktOptions,
    KktReport, KmeansOptions, MeasureSpace, RestartResult, Space,
};
use phkm_core::embeddings::{EmbeddingKind, EmbeddingSpec, EmbeddingVector};
use phkm_core::homology::{build_vr_filtration, compute_persistence};
use phkm_core::metrics::diagram_to_measure;
use phkm_core::{PersistenceDiagram, PersistenceMeasure, PointCloud};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// The five inputs to k-means compared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Pd,
    Pm,
    Betti,
    Landscape,
    Image,
}

impl Representation {
    pub const ALL: [Representation; 5] =
        [Representation::Pd, Representation::Pm, Representation::Betti, Representation::Landscape, Representation::Image];

    pub fn name(self) -> &'static str {
        match self {
            Representation::Pd => "pd",
            Representation::Pm => "pm",
            Representation::Betti => "betti",
            Representation::Landscape => "landscape",
            Representation::Image => "image",
        }
    }

    pub fn embedding(self) -> Option<EmbeddingKind> {
        match self {
            Representation::Pd | Representation::Pm => None,
            Representation::Betti => Some(EmbeddingKind::Betti),
            Representation::Landscape => Some(EmbeddingKind::Landscape),
            Representation::Image => Some(EmbeddingKind::Image),
        }
    }
}

impl From<EmbeddingKind> for Representation {
    fn from(k: EmbeddingKind) -> Self {
        match k {
            EmbeddingKind::Betti => Representation::Betti,
            EmbeddingKind::Landscape => Representation::Landscape,
            EmbeddingKind::Image => Representation::Image,
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Representation {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| anyhow!("unknown representation '{s}' (expected pd, pm, betti, landscape or image)"))
    }
}

/// Filtration settings for turning clouds into diagrams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HomologyParams {
    /// Homology degree whose diagrams are clustered.
    pub degree: usize,
    /// Largest filtration value; classes alive there die at it.
    pub max_scale: f64,
}

impl Default for HomologyParams {
    fn default() -> Self {
        Self { degree: 1, max_scale: 4.5 }
    }
}

/// Diagrams in degrees `0..=max_dim` of a cloud.
pub fn cloud_diagrams(pc: &PointCloud, max_scale: f64, max_dim: usize) -> Result<Vec<PersistenceDiagram>> {
    let fc = build_vr_filtration(pc, max_scale, max_dim)?;
    Ok(compute_persistence(&fc, max_dim)?)
}

/// Items of one representation, ready for k-means.
#[derive(Debug, Clone)]
pub enum Dataset {
    Diagrams(Vec<PersistenceDiagram>),
    Measures(Vec<PersistenceMeasure>),
    Vectors(EmbeddingKind, Vec<EmbeddingVector>),
}

impl Dataset {
    pub fn prepare(rep: Representation, diagrams: &[PersistenceDiagram], embedding: &EmbeddingSpec) -> Result<Self> {
        Ok(match rep.embedding() {
            None if rep == Representation::Pd => Dataset::Diagrams(diagrams.to_vec()),
            None => Dataset::Measures(diagrams.iter().map(diagram_to_measure).collect()),
            Some(kind) => {
                let spec = EmbeddingSpec { kind, ..embedding.clone() };
                Dataset::Vectors(kind, spec.embed_all(diagrams)?)
            }
        })
    }

    pub fn representation(&self) -> Representation {
        match self {
            Dataset::Diagrams(_) => Representation::Pd,
            Dataset::Measures(_) => Representation::Pm,
            Dataset::Vectors(kind, _) => (*kind).into(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Dataset::Diagrams(d) => d.len(),
            Dataset::Measures(m) => m.len(),
            Dataset::Vectors(_, v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn values(v: &[EmbeddingVector]) -> Vec<Vec<f64>> {
        v.iter().map(|e| e.values.clone()).collect()
    }

    pub fn cluster(&self, opts: &KmeansOptions, restarts: usize) -> Result<ClusterResult> {
        let rep = self.representation();
        match self {
            Dataset::Diagrams(d) => ClusterResult::from_run(rep, opts, kmeans_restarts(&DiagramSpace::default(), d, opts, restarts)?),
            Dataset::Measures(m) => ClusterResult::from_run(rep, opts, kmeans_restarts(&MeasureSpace, m, opts, restarts)?),
            Dataset::Vectors(_, v) => ClusterResult::from_run(rep, opts, kmeans_restarts(&Euclidean, &Self::values(v), opts, restarts)?),
        }
    }

    pub fn verify(&self, result: &ClusterResult, opts: &KktOptions) -> Result<KktReport> {
        if result.representation != self.representation() {
            bail!("result is for {} but the data is {}", result.representation, self.representation());
        }
        if result.labels.len() != self.len() {
            bail!("result has {} labels for {} items", result.labels.len(), self.len());
        }
        match self {
            Dataset::Diagrams(d) => verify_with(&DiagramSpace::default(), d, result, opts),
            Dataset::Measures(m) => verify_with(&MeasureSpace, m, result, opts),
            Dataset::Vectors(_, v) => verify_with(&Euclidean, &Self::values(v), result, opts),
        }
    }
}

fn verify_with<S: Space>(space: &S, data: &[S::Item], result: &ClusterResult, opts: &KktOptions) -> Result<KktReport>
where
    S::Item: DeserializeOwned,
{
    let state = result.state::<S::Item>()?;
    Ok(verify_partial_optimality(space, data, &state, opts)?)
}

/// Outcome of clustering, as written by `cluster` and read by `kkt-check`,
/// `eval` and `plot`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub representation: Representation,
    pub k: usize,
    pub seed: u64,
    pub labels: Vec<usize>,
    /// Centroids in the representation's own file format.
    pub centroids: serde_json::Value,
    pub cost_trace: Vec<f64>,
    pub steps: Vec<IterationCosts>,
    pub iterations: usize,
    pub converged: bool,
    pub reseeds: usize,
    pub kept_centroids: usize,
    pub best_restart: usize,
    pub restart_costs: Vec<f64>,
    /// Largest rise in cost across any iteration of any restart.
    #[serde(default)]
    pub descent_violation: f64,
    pub final_cost: f64,
}

impl ClusterResult {
    fn from_run<T: Serialize>(rep: Representation, opts: &KmeansOptions, run: RestartResult<T>) -> Result<Self> {
        let best = run.best;
        Ok(Self {
            representation: rep,
            k: opts.k,
            seed: opts.seed,
            final_cost: best.final_cost(),
            labels: best.labels,
            centroids: serde_json::to_value(&best.centroids)?,
            cost_trace: best.cost_trace,
            steps: best.steps,
            iterations: best.iterations,
            converged: best.converged,
            reseeds: best.reseeds,
            kept_centroids: best.kept_centroids,
            best_restart: run.best_restart,
            restart_costs: run.restart_costs,
            descent_violation: run.descent_violation,
        })
    }

    /// The clustering state with typed centroids.
    pub fn state<T: DeserializeOwned>(&self) -> Result<ClusterState<T>> {
        let centroids: Vec<T> =
            serde_json::from_value(self.centroids.clone()).context("centroids do not match the representation")?;
        Ok(ClusterState {
            labels: self.labels.clone(),
            centroids,
            cost_trace: self.cost_trace.clone(),
            steps: self.steps.clone(),
            iterations: self.iterations,
            converged: self.converged,
            reseeds: self.reseeds,
            kept_centroids: self.kept_centroids,
        })
    }
}
