use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use phkm::experiment::{simulate_dataset, EmbeddingParams};
use phkm::io::{self, Manifest, ManifestEntry};
use phkm::pipeline::{cloud_diagrams, Dataset, Representation};
use phkm::{load_diagram_set, plot, ClusterResult, ExperimentConfig};
use phkm_core::clustering::{KktOptions, KmeansOptions};
use phkm_core::embeddings::{grid_points, EmbeddingKind, EmbeddingSpec, Grid};
use phkm_core::evaluation::adjusted_rand_index;
use phkm_core::means::{frechet_mean, mean_measure, MeanInit};
use phkm_core::metrics::{diagram_to_measure, ot_distance, wasserstein, Order};
use phkm_core::shapes::ShapeKind;
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "phkm", version, about = "k-means clustering of persistent homology")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample labeled circle, sphere and torus point clouds.
    Simulate(SimulateArgs),
    /// Compute persistence diagrams of point clouds.
    Compute(ComputeArgs),
    /// Vectorize diagrams as Betti curves, landscapes or images.
    Embed(EmbedArgs),
    /// Distance between two diagrams or two measures.
    Dist(DistArgs),
    /// Fréchet mean of diagrams or mean of measures.
    Mean(MeanArgs),
    /// k-means on diagrams, measures or embeddings.
    Cluster(ClusterArgs),
    /// Check partial optimality of a clustering result.
    KktCheck(KktArgs),
    /// Adjusted Rand index of a clustering against manifest labels.
    Eval(EvalArgs),
    /// Run a simulated experiment over noise levels and representations.
    Experiment(ExperimentArgs),
    /// Render a diagram, curves or a cost trace as SVG.
    Plot(PlotArgs),
    /// Read OFF/OBJ meshes into point clouds labeled by subdirectory.
    Ingest(IngestArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_delimiter = ',', default_value = "circle,sphere,torus")]
    classes: Vec<ShapeKind>,
    #[arg(long, default_value_t = 10)]
    per_class: usize,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    circle_radius: Option<f64>,
    #[arg(long)]
    sphere_radius: Option<f64>,
    #[arg(long)]
    torus_major: Option<f64>,
    #[arg(long)]
    torus_minor: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ComputeArgs {
    /// Cloud manifest written by `simulate` or `ingest`.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 4.5)]
    max_scale: f64,
    /// Highest homology degree computed.
    #[arg(long, default_value_t = 1)]
    max_dim: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct EmbeddingArgs {
    #[arg(long, default_value_t = 100)]
    resolution: usize,
    #[arg(long, default_value_t = 5)]
    layers: usize,
    #[arg(long, default_value_t = 20)]
    image_resolution: usize,
    /// Image bandwidth; defaults to 5% of the persistence range.
    #[arg(long)]
    sigma: Option<f64>,
}

impl EmbeddingArgs {
    fn spec(&self) -> EmbeddingSpec {
        EmbeddingParams {
            resolution: self.resolution,
            layers: self.layers,
            image_resolution: self.image_resolution,
            sigma: self.sigma,
        }
        .spec()
    }
}

#[derive(Args)]
struct EmbedArgs {
    /// Diagram manifest written by `compute`.
    #[arg(long)]
    diagrams: PathBuf,
    #[arg(long)]
    kind: EmbeddingKind,
    #[arg(long, default_value_t = 1)]
    degree: usize,
    #[command(flatten)]
    embedding: EmbeddingArgs,
    /// Vectors CSV; the grid is written next to it as `<out>.grid.json`.
    #[arg(long)]
    out: PathBuf,
}

fn parse_q(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => s.parse().map_err(|e| format!("{e}")),
    }
}

#[derive(Args)]
struct DistArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Inputs are measure files rather than diagram files.
    #[arg(long)]
    measure: bool,
    #[arg(long, default_value_t = 1)]
    degree: usize,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Ground norm exponent; `inf` for the max norm.
    #[arg(long, default_value = "2", value_parser = parse_q)]
    q: f64,
    /// Write the optimal plan here.
    #[arg(long)]
    plan: Option<PathBuf>,
}

#[derive(Args)]
struct MeanArgs {
    #[arg(long)]
    diagrams: PathBuf,
    #[arg(long, default_value_t = 1)]
    degree: usize,
    /// `pd` for the Fréchet mean, `pm` for the mean measure.
    #[arg(long, default_value = "pd")]
    rep: Representation,
    /// `best`, `random:<seed>` or a diagram file.
    #[arg(long, default_value = "best")]
    init: String,
    #[arg(long, default_value_t = phkm_core::means::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = phkm_core::means::DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InputArgs {
    /// Diagram manifest written by `compute`.
    #[arg(long, conflicts_with = "vectors", required_unless_present = "vectors")]
    diagrams: Option<PathBuf>,
    /// Vectors CSV written by `embed`.
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Representation built from the diagrams.
    #[arg(long, default_value = "pd")]
    rep: Representation,
    #[arg(long, default_value_t = 1)]
    degree: usize,
    #[command(flatten)]
    embedding: EmbeddingArgs,
}

impl InputArgs {
    fn load(&self) -> Result<(Dataset, Vec<Option<String>>)> {
        if let Some(path) = &self.vectors {
            let (rows, meta) = io::read_vectors(path)?;
            let labels = meta.labels.clone();
            return Ok((Dataset::Vectors(meta.kind, io::vectors_as_embeddings(rows, &meta)), labels));
        }
        let path = self.diagrams.as_ref().context("either --diagrams or --vectors is required")?;
        let (diagrams, manifest) = load_diagram_set(path, self.degree)?;
        let labels = manifest.entries.iter().map(|e| e.label.clone()).collect();
        Ok((Dataset::prepare(self.rep, &diagrams, &self.embedding.spec())?, labels))
    }
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct KktArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    result: PathBuf,
    #[arg(long, default_value_t = 16)]
    perturbations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    noise: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    reps: Option<Vec<Representation>>,
    #[arg(long, value_delimiter = ',')]
    classes: Option<Vec<ShapeKind>>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    per_class: Option<usize>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    max_scale: Option<f64>,
    #[arg(long)]
    degree: Option<usize>,
    /// Directory for `report.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Diagram file; every degree is drawn unless `--degree` is given.
    #[arg(long, group = "what")]
    diagram: Option<PathBuf>,
    /// Betti or landscape vectors CSV.
    #[arg(long, group = "what")]
    vectors: Option<PathBuf>,
    /// Clustering result whose cost trace is drawn.
    #[arg(long, group = "what")]
    trace: Option<PathBuf>,
    #[arg(long)]
    degree: Option<usize>,
    /// Rows of the vectors file to draw.
    #[arg(long, value_delimiter = ',')]
    rows: Option<Vec<usize>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    /// Directory with one subdirectory of meshes per class.
    #[arg(long)]
    dir: PathBuf,
    /// Subsample each mesh to at most this many vertices.
    #[arg(long)]
    subsample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "item".into())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg = ExperimentConfig { classes: a.classes, per_class: a.per_class, points: a.points, seed: a.seed, ..Default::default() };
    let s = &mut cfg.shapes;
    s.circle_radius = a.circle_radius.unwrap_or(s.circle_radius);
    s.sphere_radius = a.sphere_radius.unwrap_or(s.sphere_radius);
    s.torus_major = a.torus_major.unwrap_or(s.torus_major);
    s.torus_minor = a.torus_minor.unwrap_or(s.torus_minor);
    let clouds = simulate_dataset(&cfg, 0, a.noise)?;
    fs::create_dir_all(&a.out)?;
    let mut manifest = Manifest::default();
    for (i, pc) in clouds.iter().enumerate() {
        let label = pc.label.clone().unwrap_or_default();
        let file = format!("{label}_{:03}.csv", i % cfg.per_class);
        io::write_cloud_csv(&a.out.join(&file), pc)?;
        manifest.entries.push(ManifestEntry { file, label: Some(label), seed: pc.seed });
    }
    io::write_json(&a.out.join("manifest.json"), &manifest)?;
    println!("wrote {} clouds to {}", clouds.len(), a.out.display());
    Ok(())
}

fn compute(a: ComputeArgs) -> Result<()> {
    let manifest: Manifest = io::read_json(&a.manifest)?;
    let paths = manifest.resolve(&a.manifest);
    fs::create_dir_all(&a.out)?;
    let files: Vec<String> = paths
        .par_iter()
        .map(|p| -> Result<String> {
            let pc = io::read_cloud_csv(p)?;
            let diagrams = cloud_diagrams(&pc, a.max_scale, a.max_dim).with_context(|| format!("{}", p.display()))?;
            let file = format!("{}.diagrams.json", stem(p));
            io::write_diagrams(&a.out.join(&file), &diagrams)?;
            info!("{}: {:?} points per degree", p.display(), diagrams.iter().map(|d| d.cardinality()).collect::<Vec<_>>());
            Ok(file)
        })
        .collect::<Result<_>>()?;
    let out = Manifest {
        entries: manifest
            .entries
            .iter()
            .zip(files)
            .map(|(e, file)| ManifestEntry { file, label: e.label.clone(), seed: e.seed })
            .collect(),
    };
    io::write_json(&a.out.join("diagrams.json"), &out)?;
    println!("wrote {} diagram files to {}", out.entries.len(), a.out.display());
    Ok(())
}

fn embed(a: EmbedArgs) -> Result<()> {
    let (diagrams, manifest) = load_diagram_set(&a.diagrams, a.degree)?;
    let spec = EmbeddingSpec { kind: a.kind, ..a.embedding.spec() };
    let vectors = spec.embed_all(&diagrams)?;
    let labels: Vec<Option<String>> = manifest.entries.iter().map(|e| e.label.clone()).collect();
    io::write_vectors(&a.out, &vectors, a.degree, &labels)?;
    println!("wrote {} {} vectors of length {}", vectors.len(), a.kind.name(), vectors.first().map_or(0, |v| v.values.len()));
    Ok(())
}

fn dist(a: DistArgs) -> Result<()> {
    let order = Order::new(a.p, a.q)?;
    let (d, plan) = if a.measure {
        ot_distance(&io::read_measure(&a.a)?, &io::read_measure(&a.b)?, order)?
    } else {
        wasserstein(&io::read_diagram(&a.a, a.degree)?, &io::read_diagram(&a.b, a.degree)?, order)?
    };
    if let Some(p) = &a.plan {
        io::write_json(p, &plan)?;
    }
    println!("{d}");
    Ok(())
}

fn mean(a: MeanArgs) -> Result<()> {
    let (diagrams, _) = load_diagram_set(&a.diagrams, a.degree)?;
    match a.rep {
        Representation::Pd => {
            let init = match a.init.as_str() {
                "best" => MeanInit::BestInput,
                s if s.starts_with("random:") => MeanInit::RandomInput(s["random:".len()..].parse().context("bad random seed")?),
                path => MeanInit::Diagram(io::read_diagram(Path::new(path), a.degree)?),
            };
            let state = frechet_mean(&diagrams, &init, a.tol, a.max_iter)?;
            io::write_json(&a.out, &state)?;
            println!("frechet value {} after {} iterations (converged: {})", state.frechet_value, state.iterations, state.converged);
        }
        Representation::Pm => {
            let measures: Vec<_> = diagrams.iter().map(diagram_to_measure).collect();
            let m = mean_measure(&measures)?;
            io::write_measure(&a.out, &m)?;
            println!("mean measure with {} atoms, total mass {}", m.atoms().len(), m.total_mass());
        }
        other => bail!("no mean for representation {other}; use pd or pm"),
    }
    Ok(())
}

fn cluster(a: ClusterArgs) -> Result<()> {
    let (data, _) = a.input.load()?;
    let opts = KmeansOptions { k: a.k, seed: a.seed, max_iter: a.max_iter };
    let result = data.cluster(&opts, a.restarts)?;
    io::write_json(&a.out, &result)?;
    println!(
        "{}: cost {} after {} iterations (converged: {}), labels {:?}",
        result.representation, result.final_cost, result.iterations, result.converged, result.labels
    );
    Ok(())
}

fn kkt_check(a: KktArgs) -> Result<()> {
    let (data, _) = a.input.load()?;
    let result: ClusterResult = io::read_json(&a.result)?;
    let opts = KktOptions { perturbations: a.perturbations, seed: a.seed, ..KktOptions::default() };
    let report = data.verify(&result, &opts)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let result: ClusterResult = io::read_json(&a.pred)?;
    let truth = io::read_json::<Manifest>(&a.truth)?.labels()?;
    println!("{}", adjusted_rand_index(&result.labels, &truth)?);
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<bool> {
    let mut cfg: ExperimentConfig = match &a.config {
        Some(p) => io::read_json(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = a.noise {
        cfg.noise = v;
    }
    if let Some(v) = a.reps {
        cfg.representations = v;
    }
    if let Some(v) = a.classes {
        cfg.classes = v;
    }
    cfg.repetitions = a.repetitions.unwrap_or(cfg.repetitions);
    cfg.k = a.k.unwrap_or(cfg.k);
    cfg.restarts = a.restarts.unwrap_or(cfg.restarts);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.per_class = a.per_class.unwrap_or(cfg.per_class);
    cfg.points = a.points.unwrap_or(cfg.points);
    cfg.homology.max_scale = a.max_scale.unwrap_or(cfg.homology.max_scale);
    cfg.homology.degree = a.degree.unwrap_or(cfg.homology.degree);
    if a.out.is_some() {
        cfg.output = a.out;
    }
    let report = phkm::run_experiment(&cfg)?;
    print!("{}", report.table());
    if let Some(dir) = &cfg.output {
        io::write_json(&dir.join("report.json"), &report)?;
        println!("report written to {}", dir.join("report.json").display());
    }
    for c in report.cells.iter().filter(|c| !c.errors.is_empty()) {
        for e in &c.errors {
            eprintln!("noise {} {}: {e}", c.noise, c.representation);
        }
    }
    Ok(report.failures == 0)
}

fn plot_cmd(a: PlotArgs) -> Result<()> {
    let svg = if let Some(p) = &a.diagram {
        let mut diagrams = io::read_diagrams(p)?;
        if let Some(k) = a.degree {
            diagrams.retain(|d| d.dimension() == k);
        }
        plot::diagram_svg(&diagrams, &stem(p))
    } else if let Some(p) = &a.vectors {
        let (rows, meta) = io::read_vectors(p)?;
        let picked: Vec<usize> = a.rows.clone().unwrap_or_else(|| (0..rows.len()).collect());
        if let Some(&bad) = picked.iter().find(|&&r| r >= rows.len()) {
            bail!("row {bad} out of range ({} rows)", rows.len());
        }
        let (grid, curves) = match meta.grid {
            Grid::Betti { t_min, t_max, resolution } => {
                (grid_points(t_min, t_max, resolution), picked.iter().map(|&r| rows[r].clone()).collect::<Vec<_>>())
            }
            Grid::Landscape { t_min, t_max, resolution, .. } => (
                grid_points(t_min, t_max, resolution),
                picked.iter().flat_map(|&r| rows[r].chunks(resolution).map(<[f64]>::to_vec).collect::<Vec<_>>()).collect(),
            ),
            Grid::Image { .. } => bail!("images are not curves; plot their diagrams instead"),
        };
        plot::curves_svg(&grid, &curves, &stem(p))
    } else if let Some(p) = &a.trace {
        let result: ClusterResult = io::read_json(p)?;
        plot::trace_svg(&result.cost_trace, &format!("{} cost", result.representation))
    } else {
        bail!("one of --diagram, --vectors or --trace is required");
    };
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&a.out, svg).with_context(|| format!("writing {}", a.out.display()))?;
    println!("wrote {}", a.out.display());
    Ok(())
}

fn ingest(a: IngestArgs) -> Result<()> {
    let meshes = phkm::ingest_mesh_dir(&a.dir, a.subsample, a.seed)?;
    fs::create_dir_all(&a.out)?;
    let mut manifest = Manifest::default();
    for (i, m) in meshes.iter().enumerate() {
        let file = format!("{}_{i:04}_{}.csv", m.label, stem(&m.path));
        io::write_cloud_csv(&a.out.join(&file), &m.cloud)?;
        manifest.entries.push(ManifestEntry { file, label: Some(m.label.clone()), seed: m.cloud.seed });
    }
    io::write_json(&a.out.join("manifest.json"), &manifest)?;
    println!("wrote {} clouds to {}", meshes.len(), a.out.display());
    Ok(())
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("PHKM_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("PHKM_THREADS must be a positive integer, got '{v}'"))?;
        if n == 0 {
            bail!("PHKM_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let run = configure_threads().and_then(|()| match cli.command {
        Command::Simulate(a) => simulate(a).map(|()| true),
        Command::Compute(a) => compute(a).map(|()| true),
        Command::Embed(a) => embed(a).map(|()| true),
        Command::Dist(a) => dist(a).map(|()| true),
        Command::Mean(a) => mean(a).map(|()| true),
        Command::Cluster(a) => cluster(a).map(|()| true),
        Command::KktCheck(a) => kkt_check(a).map(|()| true),
        Command::Eval(a) => eval(a).map(|()| true),
        Command::Experiment(a) => experiment(a),
        Command::Plot(a) => plot_cmd(a).map(|()| true),
        Command::Ingest(a) => ingest(a).map(|()| true),
    });
    match run {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
