//! Simulated clustering experiments over noise levels and representations.

use std::path::PathBuf;

use anyhow::{ensure, Result};
use phkm_core::clustering::KmeansOptions;
use phkm_core::embeddings::EmbeddingSpec;
use phkm_core::evaluation::adjusted_rand_index;
use phkm_core::shapes::{add_uniform_noise, ShapeKind, ShapeParams};
use phkm_core::{PersistenceDiagram, PointCloud};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::pipeline::{cloud_diagrams, ClusterResult, Dataset, HomologyParams, Representation};

/// Embedding grid sizes; ranges always come from each dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingParams {
    pub resolution: usize,
    pub layers: usize,
    pub image_resolution: usize,
    pub sigma: Option<f64>,
}

impl Default for EmbeddingParams {
    fn default() -> Self {
        let s = EmbeddingSpec::default();
        Self { resolution: s.resolution, layers: s.layers, image_resolution: s.image_resolution, sigma: s.sigma }
    }
}

impl EmbeddingParams {
    pub fn spec(&self) -> EmbeddingSpec {
        EmbeddingSpec {
            resolution: self.resolution,
            layers: self.layers,
            image_resolution: self.image_resolution,
            sigma: self.sigma,
            ..EmbeddingSpec::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub classes: Vec<ShapeKind>,
    pub shapes: ShapeParams,
    pub per_class: usize,
    pub points: usize,
    pub noise: Vec<f64>,
    pub representations: Vec<Representation>,
    pub k: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub repetitions: usize,
    /// Base seed; repetition `r` draws every random choice from
    /// `repetition_seed(seed, r)`.
    pub seed: u64,
    pub homology: HomologyParams,
    pub embedding: EmbeddingParams,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            classes: ShapeKind::ALL.to_vec(),
            shapes: ShapeParams::default(),
            per_class: 10,
            points: 200,
            noise: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 10.0],
            representations: Representation::ALL.to_vec(),
            k: 3,
            restarts: 5,
            max_iter: 100,
            repetitions: 1,
            seed: 0,
            homology: HomologyParams::default(),
            embedding: EmbeddingParams::default(),
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(!self.classes.is_empty(), "at least one shape class is required");
        ensure!(!self.representations.is_empty(), "at least one representation is required");
        ensure!(!self.noise.is_empty(), "at least one noise level is required");
        ensure!(self.noise.iter().all(|s| s.is_finite() && *s >= 0.0), "noise levels must be finite and non-negative");
        ensure!(self.repetitions >= 1, "repetitions must be at least 1");
        ensure!(self.restarts >= 1, "restarts must be at least 1");
        ensure!(self.max_iter >= 1, "max_iter must be at least 1");
        ensure!(self.per_class >= 1 && self.points >= 1, "per_class and points must be at least 1");
        let n = self.classes.len() * self.per_class;
        ensure!(self.k >= 1 && self.k <= n, "k = {} must lie in 1..={n}", self.k);
        ensure!(
            self.homology.max_scale.is_finite() && self.homology.max_scale > 0.0,
            "max_scale must be positive"
        );
        Ok(())
    }
}

/// SplitMix64 finalizer, used to derive independent seeds.
fn mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix(seed), |acc, &p| mix(acc ^ mix(p)))
}

pub fn repetition_seed(seed: u64, repetition: usize) -> u64 {
    derive_seed(seed, &[repetition as u64])
}

/// The labeled clouds of one repetition at one noise level. The noise-free
/// shapes are the same at every noise level.
pub fn simulate_dataset(cfg: &ExperimentConfig, repetition: usize, noise: f64) -> Result<Vec<PointCloud>> {
    let rs = repetition_seed(cfg.seed, repetition);
    let mut out = Vec::with_capacity(cfg.classes.len() * cfg.per_class);
    for (ci, &class) in cfg.classes.iter().enumerate() {
        for j in 0..cfg.per_class {
            let shape_seed = derive_seed(rs, &[1, ci as u64, j as u64]);
            let noise_seed = derive_seed(rs, &[2, ci as u64, j as u64]);
            let pc = cfg.shapes.sample(class, cfg.points, shape_seed)?;
            let mut pc = add_uniform_noise(&pc, noise, noise_seed)?.with_label(class.name());
            pc.seed = Some(shape_seed);
            out.push(pc);
        }
    }
    Ok(out)
}

/// Scores of one representation at one noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub noise: f64,
    pub representation: Representation,
    /// ARI per repetition; `None` where the repetition failed.
    pub scores: Vec<Option<f64>>,
    pub mean: Option<f64>,
    /// Sample standard deviation (`n − 1` denominator).
    pub sd: Option<f64>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub cells: Vec<CellReport>,
    pub failures: usize,
}

impl ExperimentReport {
    pub fn cell(&self, noise: f64, rep: Representation) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.noise == noise && c.representation == rep)
    }

    /// Noise levels as rows and representations as columns, each entry
    /// `mean (sd)`.
    pub fn table(&self) -> String {
        let reps = &self.config.representations;
        let mut s = format!("{:>6}", "noise");
        for r in reps {
            s += &format!(" {:>16}", r.name());
        }
        s.push('\n');
        for &noise in &self.config.noise {
            s += &format!("{noise:>6.1}");
            for &r in reps {
                let entry = match self.cell(noise, r) {
                    Some(CellReport { mean: Some(m), sd: Some(sd), .. }) => format!("{m:.3} ({sd:.3})"),
                    Some(CellReport { mean: Some(m), .. }) => format!("{m:.3}"),
                    _ => "failed".to_string(),
                };
                s += &format!(" {entry:>16}");
            }
            s.push('\n');
        }
        s
    }
}

pub fn mean_sd(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.len() > 1).then(|| (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (Some(mean), sd)
}

type Outcome = Result<f64, String>;

/// Everything one repetition at one noise level produced.
#[derive(Debug, Clone)]
pub struct RepetitionRun {
    pub diagrams: Vec<PersistenceDiagram>,
    pub truth: Vec<String>,
    /// Per configured representation: the clustering and its ARI.
    pub runs: Vec<Result<(ClusterResult, f64), String>>,
}

/// Simulates one repetition, computes its diagrams once and clusters every
/// configured representation on them.
pub fn run_repetition(cfg: &ExperimentConfig, noise: f64, repetition: usize) -> Result<RepetitionRun> {
    let clouds = simulate_dataset(cfg, repetition, noise)?;
    let truth: Vec<String> = clouds.iter().map(|c| c.label.clone().unwrap_or_default()).collect();
    let diagrams = clouds
        .par_iter()
        .map(|pc| {
            let mut all = cloud_diagrams(pc, cfg.homology.max_scale, cfg.homology.degree)?;
            Ok(all.swap_remove(cfg.homology.degree))
        })
        .collect::<Result<Vec<_>>>()?;
    let opts = KmeansOptions {
        k: cfg.k,
        seed: derive_seed(repetition_seed(cfg.seed, repetition), &[3]),
        max_iter: cfg.max_iter,
    };
    let spec = cfg.embedding.spec();
    let runs = cfg
        .representations
        .par_iter()
        .map(|&rep| -> Result<(ClusterResult, f64)> {
            let result = Dataset::prepare(rep, &diagrams, &spec)?.cluster(&opts, cfg.restarts)?;
            let ari = adjusted_rand_index(&result.labels, &truth)?;
            Ok((result, ari))
        })
        .map(|r| r.map_err(|e| format!("{e:#}")))
        .collect();
    Ok(RepetitionRun { diagrams, truth, runs })
}

fn run_job(cfg: &ExperimentConfig, noise: f64, repetition: usize) -> Vec<Outcome> {
    match run_repetition(cfg, noise, repetition) {
        Ok(run) => run.runs.into_iter().map(|r| r.map(|(_, ari)| ari)).collect(),
        Err(e) => vec![Err(format!("{e:#}")); cfg.representations.len()],
    }
}

/// Runs every (noise, repetition) job, scoring each representation on the
/// same clouds. Failures are recorded in their cell and counted.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> =
        (0..cfg.noise.len()).flat_map(|ni| (0..cfg.repetitions).map(move |r| (ni, r))).collect();
    let outcomes: Vec<Vec<Outcome>> = jobs.par_iter().map(|&(ni, r)| run_job(cfg, cfg.noise[ni], r)).collect();

    let mut cells = Vec::new();
    let mut failures = 0;
    for (ni, &noise) in cfg.noise.iter().enumerate() {
        for (ri, &rep) in cfg.representations.iter().enumerate() {
            let mut scores = Vec::with_capacity(cfg.repetitions);
            let mut errors = Vec::new();
            for (job, out) in jobs.iter().zip(&outcomes).filter(|(j, _)| j.0 == ni) {
                match &out[ri] {
                    Ok(s) => scores.push(Some(*s)),
                    Err(e) => {
                        scores.push(None);
                        errors.push(format!("repetition {}: {e}", job.1));
                        failures += 1;
                    }
                }
            }
            let ok: Vec<f64> = scores.iter().flatten().copied().collect();
            let (mean, sd) = mean_sd(&ok);
            cells.push(CellReport { noise, representation: rep, scores, mean, sd, errors });
        }
    }
    Ok(ExperimentReport { config: cfg.clone(), cells, failures })
}
