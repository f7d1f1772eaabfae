use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use signgraph::graph::{PartialLabels, WeightConvention};
use signgraph::harness::{self, Dataset, SynthKind};
use signgraph::pipeline::{run_method, BlockSize, GraphParams, Method, MethodConfig};
use signgraph::solver::{rejection_rate, SolverConfig};
use signgraph::spectral::EpsilonRule;

#[derive(Parser)]
#[command(name = "signgraph", version, about = "Robust graph-signal classifiers on signed similarity graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Restore one signal from a feature file and observed labels; writes JSON.
    Classify(ClassifyArgs),
    /// Noise-rate sweep over random train/test splits; writes CSV and JSON.
    Experiment(ExperimentArgs),
    /// Compare eigenvalue lower bounds against the dense oracle; writes CSV.
    BoundStudy(BoundStudyArgs),
    /// Generate a synthetic two-class dataset CSV.
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct FeatureArgs {
    /// Gaussian kernel bandwidth.
    #[arg(long, default_value_t = 1.0)]
    bandwidth: f64,
    /// Comma-separated diagonal feature weights (default: all ones).
    #[arg(long, value_delimiter = ',')]
    feature_weights: Option<Vec<f64>>,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Nearest neighbours per node in the kNN graph.
    #[arg(long, default_value_t = 3)]
    omega: usize,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    centroid_weight: f64,
    #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
    boundary_weight: f64,
    /// Boundary pairs as a fraction of the positive edge count.
    #[arg(long, default_value_t = 0.05)]
    negative_fraction: f64,
    /// `proportional` or `inverse`.
    #[arg(long, default_value = "proportional")]
    convention: WeightConvention,
    /// Block size for the eigenvalue bound: an integer or `sqrt`.
    #[arg(long, default_value = "sqrt")]
    block_size: BlockSize,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// `coupling` or `fixed`.
    #[arg(long, default_value = "coupling")]
    epsilon_rule: EpsilonRule,
}

impl GraphArgs {
    fn params(&self) -> GraphParams {
        GraphParams {
            omega: self.omega,
            centroid_weight: self.centroid_weight,
            boundary_weight: self.boundary_weight,
            negative_fraction: self.negative_fraction,
            convention: self.convention,
            block_size: self.block_size,
            epsilon: self.epsilon,
            epsilon_rule: self.epsilon_rule,
            record_bound_gap: false,
        }
    }
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 0.01)]
    mu1: f64,
    #[arg(long, default_value_t = 0.0)]
    mu2: f64,
    #[arg(long, default_value_t = 1e-4)]
    irls_epsilon: f64,
    #[arg(long, default_value_t = 50)]
    max_outer_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    outer_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    cg_tol: f64,
    #[arg(long, default_value_t = 2000)]
    cg_max_iter: usize,
    /// Reject threshold τ.
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    /// Comma-separated β schedule for the hybrid methods.
    #[arg(long, value_delimiter = ',', default_value = "1,0.75,0.5,0.25,0")]
    beta_schedule: Vec<f64>,
    /// Target rejection fraction for ProposedRej.
    #[arg(long, default_value_t = 0.095)]
    reject_target: f64,
}

impl SolverArgs {
    fn config(&self, graph: GraphParams) -> MethodConfig {
        MethodConfig {
            graph,
            solver: SolverConfig {
                mu1: self.mu1,
                mu2: self.mu2,
                irls_epsilon: self.irls_epsilon,
                max_outer_iter: self.max_outer_iter,
                outer_tol: self.outer_tol,
                cg_tol: self.cg_tol,
                cg_max_iter: self.cg_max_iter,
                reject_threshold: self.tau,
                beta_schedule: self.beta_schedule.clone(),
            },
            reject_target: self.reject_target,
        }
    }
}

#[derive(Args)]
struct DataSource {
    /// CSV with feature columns and a final ±1 label column.
    #[arg(long, conflicts_with = "synth")]
    dataset: Option<PathBuf>,
    /// Use a generated dataset instead: `crescents` or `blobs`.
    #[arg(long)]
    synth: Option<SynthKind>,
    #[arg(long, default_value_t = 300)]
    synth_n: usize,
    #[arg(long, default_value_t = 0.1)]
    synth_noise: f64,
    #[arg(long, default_value_t = 0)]
    synth_seed: u64,
}

impl DataSource {
    fn load(&self, feat: &FeatureArgs) -> Result<Dataset> {
        let data = match (&self.dataset, self.synth) {
            (Some(path), _) => harness::load_dataset(path)
                .with_context(|| format!("reading {}", path.display()))?,
            (None, Some(kind)) => harness::generate(kind, self.synth_n, self.synth_noise, self.synth_seed)?,
            (None, None) => bail!("either --dataset or --synth is required"),
        };
        apply_features(data, feat)
    }
}

fn apply_features(data: Dataset, feat: &FeatureArgs) -> Result<Dataset> {
    let mut features = data.features.with_bandwidth(feat.bandwidth)?;
    if let Some(w) = &feat.feature_weights {
        features = features.with_weights(w.clone())?;
    }
    Ok(Dataset::new(features, data.labels)?)
}

#[derive(Args)]
struct ClassifyArgs {
    /// Feature CSV, one row per sample.
    #[arg(long)]
    features: PathBuf,
    /// Observed labels CSV with columns `index,label`.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value = "ProposedHybrid")]
    method: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    feature: FeatureArgs,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    source: DataSource,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', default_value = "ProposedHybrid,GraphPos")]
    methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2")]
    noise_rates: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    #[arg(long)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    feature: FeatureArgs,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct BoundStudyArgs {
    #[command(flatten)]
    source: DataSource,
    /// Use the built-in signed-graph corpus with this many members instead of a dataset.
    #[arg(long, conflicts_with_all = ["dataset", "synth"])]
    corpus: Option<usize>,
    /// Which negative edges to add.
    #[arg(long, default_value = "ProposedHybrid")]
    method: Method,
    #[arg(long, default_value_t = 30)]
    trials: usize,
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    /// Comma-separated block sizes (integers or `sqrt`).
    #[arg(long, value_delimiter = ',', default_value = "sqrt")]
    block_sizes: Vec<BlockSize>,
    #[arg(long)]
    seed: u64,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    feature: FeatureArgs,
    #[command(flatten)]
    graph: GraphArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value = "crescents")]
    kind: SynthKind,
    #[arg(long, default_value_t = 300)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn classify(args: ClassifyArgs) -> Result<()> {
    let features = harness::read_features(
        File::open(&args.features).with_context(|| format!("reading {}", args.features.display()))?,
        args.feature.feature_weights.clone(),
        args.feature.bandwidth,
    )?;
    let observed = harness::read_labels(
        File::open(&args.labels).with_context(|| format!("reading {}", args.labels.display()))?,
    )?;
    let labels = PartialLabels::new(features.len(), observed)?;
    let config = args.solver.config(args.graph.params());
    let out = run_method(args.method, &features, &labels, &config, args.seed)?;
    let mut echo = serde_json::to_value(&config.solver)?;
    echo["rejectThreshold"] = json!(out.threshold);
    let report = json!({
        "method": args.method.name(),
        "values": out.signal.values,
        "decisions": out.signal.decisions,
        "iterations": out.signal.iterations,
        "finalObjective": out.signal.final_objective,
        "converged": out.signal.converged,
        "rejectionRate": rejection_rate(&out.signal.decisions),
        "bounds": out.bounds,
        "config": echo,
        "graph": config.graph,
    });
    match args.out {
        Some(path) => {
            let mut w = create(&path)?;
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
            w.flush()?;
        }
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let data = args.source.load(&args.feature)?;
    let spec = harness::ExperimentSpec {
        methods: args.methods.clone(),
        noise_rates: args.noise_rates.clone(),
        trials: args.trials,
        train_fraction: args.train_fraction,
        seed: args.seed,
        config: args.solver.config(args.graph.params()),
    };
    let report = harness::run_experiment(&data, &spec)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    harness::write_results_csv(create(&args.out.join("results.csv"))?, &report)?;
    harness::write_summary_csv(create(&args.out.join("summary.csv"))?, &report)?;
    let mut w = create(&args.out.join("report.json"))?;
    serde_json::to_writer_pretty(&mut w, &json!({ "spec": spec, "summary": report.summary, "failures": report.failures }))?;
    w.flush()?;
    for s in &report.summary {
        println!(
            "{:<18} p={:<5} error {:.4} ± {:.4}  rejection {:.4}  ({} trials, {} failed)",
            s.method.name(),
            s.noise_rate,
            s.mean_error,
            s.std_error,
            s.mean_rejection,
            s.trials,
            s.failed
        );
    }
    if !report.failures.is_empty() {
        log::warn!("{} trial runs failed; see report.json", report.failures.len());
    }
    Ok(())
}

fn bound_study(args: BoundStudyArgs) -> Result<()> {
    let graph = args.graph.params();
    let rows = match args.corpus {
        Some(count) => {
            let corpus = harness::signed_graph_corpus(count, args.seed)?;
            corpus
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    harness::bound_row(
                        k,
                        &c.graph,
                        &[c.block_size],
                        graph.epsilon,
                        graph.epsilon_rule,
                        args.seed ^ k as u64,
                    )
                })
                .collect::<signgraph::Result<Vec<_>>>()?
        }
        None => {
            let data = args.source.load(&args.feature)?;
            let spec = harness::BoundStudySpec {
                method: args.method,
                trials: args.trials,
                train_fraction: args.train_fraction,
                seed: args.seed,
                graph,
                block_sizes: args.block_sizes.clone(),
            };
            harness::run_bound_study(&data, &spec)?
        }
    };
    harness::write_bound_csv(create(&args.out)?, &rows)?;
    let wins = rows.iter().filter(|r| r.eval_dominates()).count();
    println!(
        "{} graphs, all bounds sound; eval bound at least both alternatives in {}/{}",
        rows.len(),
        wins,
        rows.len()
    );
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let data = harness::generate(args.kind, args.n, args.noise, args.seed)?;
    let mut w = create(&args.out)?;
    harness::write_dataset(&mut w, &data)?;
    w.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Classify(a) => classify(a),
        Command::Experiment(a) => experiment(a),
        Command::BoundStudy(a) => bound_study(a),
        Command::Synth(a) => synth(a),
    }
}
