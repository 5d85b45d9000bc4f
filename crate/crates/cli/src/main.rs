//! `hcbm`: generate block correlation models, sample returns, cluster them,
//! run recovery experiments and evaluate the recovery bounds.
//!
//! Exit codes: 0 ok, 2 unreadable or malformed input, 3 invalid model or
//! parameters, 4 invalid data, 5 internal or output failure.

mod failure;
mod manifest;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hcbm::experiments::{run_convergence, run_isoquant, ExperimentConfig, IsoquantConfig};
use hcbm::separability::{concentration_bound, max_error_budget, recovery_confidence};
use hcbm::{
    build_correlation, correlation_matrix, correlation_to_distance, io, Algorithm, AlgorithmClass,
    Coefficient, CorrelationMatrix, Execution, Hierarchy, Model, Sampler,
};
use serde::Serialize;

use failure::{CliResult, Failure, EXIT_MODEL};
use manifest::{sidecar, Recorder};

#[derive(Parser)]
#[command(
    name = "hcbm",
    version,
    about = "Hierarchical correlation block models and cluster recovery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a model correlation matrix and write it as CSV.
    Generate(GenerateArgs),
    /// Draw a T x N return sample from a correlation matrix.
    Sample(SampleArgs),
    /// Cluster returns or a correlation matrix.
    Cluster(ClusterArgs),
    /// Run a Monte Carlo recovery experiment.
    Experiment(ExperimentArgs),
    /// Error budgets, concentration bound and recovery confidence.
    Bounds(BoundsArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Preset {
    /// 265 assets: two European markets of 7 industries each, plus Japan.
    Benchmark265,
}

#[derive(Args, Clone)]
#[group(multiple = false)]
struct ModelSource {
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Hierarchy config (JSON).
    #[arg(long, value_name = "FILE")]
    hierarchy: Option<PathBuf>,
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum ResolvedSource {
    Preset(Preset),
    Hierarchy(PathBuf),
}

impl ModelSource {
    fn resolved(&self) -> Option<ResolvedSource> {
        match (&self.preset, &self.hierarchy) {
            (_, Some(p)) => Some(ResolvedSource::Hierarchy(p.clone())),
            (Some(p), None) => Some(ResolvedSource::Preset(*p)),
            (None, None) => None,
        }
    }

    fn load(&self, rec: &mut Recorder) -> CliResult<Option<Hierarchy>> {
        if let Some(path) = &self.hierarchy {
            let text = rec.read_string(path)?;
            return Hierarchy::from_json(&text)
                .map(Some)
                .map_err(|e| Failure::input(path, e));
        }
        Ok(self
            .preset
            .map(|Preset::Benchmark265| hcbm::benchmark_hierarchy()))
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    source: ModelSource,
    /// Output correlation CSV.
    #[arg(long, short)]
    out: PathBuf,
    /// Also write the distance matrix `(1 - rho) / 2`.
    #[arg(long, value_name = "FILE")]
    distance: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    source: ModelSource,
    /// Correlation matrix CSV, instead of a hierarchy.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["preset", "hierarchy"])]
    correlation: Option<PathBuf>,
    /// gaussian, student_t (nu = 3) or student_t(NU).
    #[arg(long, default_value = "gaussian")]
    model: Model,
    /// Sample length T.
    #[arg(long, short = 't')]
    length: usize,
    #[arg(long, default_value_t = hcbm::experiments::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    /// Returns CSV (header row, one column per asset).
    #[arg(long, value_name = "FILE", required_unless_present = "correlation")]
    returns: Option<PathBuf>,
    /// Correlation matrix CSV.
    #[arg(long, value_name = "FILE", conflicts_with = "returns")]
    correlation: Option<PathBuf>,
    #[arg(long, default_value = "ward")]
    algorithm: Algorithm,
    /// Estimator applied to returns.
    #[arg(long, default_value = "spearman")]
    coefficient: Coefficient,
    /// Cluster counts (repeat or comma-separate).
    #[arg(short, long = "clusters", value_delimiter = ',', required = true)]
    k: Vec<usize>,
    /// Seed for the k-means initialization.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    /// Recovery ratio against T on a hierarchy.
    Convergence,
    /// Recovery ratio over a (rho, T) grid on two blocks.
    Isoquant,
}

#[derive(Args)]
struct ExperimentArgs {
    kind: ExperimentKind,
    /// Experiment config (JSON); defaults to the built-in study.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Coarse grid and few trials.
    #[arg(long)]
    quick: bool,
    /// Overrides the trial count L.
    #[arg(long)]
    trials: Option<usize>,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "HCBM_THREADS")]
    threads: Option<usize>,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Skip the SVG chart.
    #[arg(long)]
    no_plot: bool,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    source: ModelSource,
    /// Number of assets; defaults to the hierarchy size.
    #[arg(short = 'n', long)]
    n: Option<usize>,
    /// Sample length.
    #[arg(short = 't', long)]
    t: usize,
    /// Separation used for the recovery confidence.
    #[arg(short = 'd', long)]
    d: f64,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> hcbm::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| Failure::new(failure::EXIT_INTERNAL, e.to_string()))?;
    Ok(buf)
}

fn generate(args: GenerateArgs) -> CliResult {
    let mut rec = Recorder::new("generate");
    let h = args
        .source
        .load(&mut rec)?
        .ok_or_else(|| Failure::new(failure::EXIT_PARSE, "give --preset or --hierarchy"))?;
    let sigma = build_correlation(&h)?;
    rec.write(&args.out, &csv_bytes(|b| io::write_correlation(b, &sigma))?)?;
    if let Some(path) = &args.distance {
        let d = correlation_to_distance(&sigma);
        rec.write(path, &csv_bytes(|b| io::write_distance(b, &d))?)?;
    }
    log::info!(
        "{} x {} correlation matrix, depth {}",
        h.n(),
        h.n(),
        h.depth()
    );
    let config = serde_json::json!({ "source": args.source.resolved(), "spec": h.spec() });
    rec.finish(&sidecar(&args.out, "manifest.json"), &config, None)?;
    Ok(())
}

fn sample(args: SampleArgs) -> CliResult {
    let mut rec = Recorder::new("sample");
    let sigma: CorrelationMatrix = match (&args.correlation, args.source.load(&mut rec)?) {
        (Some(path), _) => {
            let bytes = rec.read(path)?;
            io::read_correlation(bytes.as_slice()).map_err(|e| Failure::input(path, e))?
        }
        (None, Some(h)) => build_correlation(&h)?,
        (None, None) => {
            return Err(Failure::new(
                failure::EXIT_PARSE,
                "give --preset, --hierarchy or --correlation",
            ))
        }
    };
    let s = Sampler::new(args.model, &sigma)?.sample(args.length, args.seed)?;
    rec.write(&args.out, &csv_bytes(|b| io::write_samples(b, &s))?)?;
    let config = serde_json::json!({
        "source": args.source.resolved(),
        "correlation": args.correlation,
        "model": args.model,
        "t": args.length,
    });
    rec.finish(
        &sidecar(&args.out, "manifest.json"),
        &config,
        Some(args.seed),
    )?;
    Ok(())
}

fn cluster(args: ClusterArgs) -> CliResult {
    let mut rec = Recorder::new("cluster");
    let sigma = match (&args.returns, &args.correlation) {
        (Some(path), _) => {
            let bytes = rec.read(path)?;
            let s = io::read_samples(bytes.as_slice()).map_err(|e| Failure::input(path, e))?;
            correlation_matrix(&s, args.coefficient).map_err(|e| Failure::input(path, e))?
        }
        (None, Some(path)) => {
            let bytes = rec.read(path)?;
            io::read_correlation(bytes.as_slice()).map_err(|e| Failure::input(path, e))?
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    let d = correlation_to_distance(&sigma);
    let partitions = args.algorithm.partitions(&d, &args.k, args.seed)?;
    for (k, p) in args.k.iter().zip(&partitions) {
        let path = args.out_dir.join(format!("partition_k{k}.csv"));
        rec.write(&path, &csv_bytes(|b| io::write_partition(b, p))?)?;
    }
    if let Some(dend) = args.algorithm.dendrogram(&d) {
        rec.write(
            &args.out_dir.join("dendrogram.csv"),
            &csv_bytes(|b| io::write_dendrogram(b, &dend))?,
        )?;
    }
    let config = serde_json::json!({
        "returns": args.returns,
        "correlation": args.correlation,
        "algorithm": args.algorithm,
        "coefficient": args.returns.as_ref().map(|_| args.coefficient),
        "k": args.k,
    });
    rec.finish(
        &args.out_dir.join("manifest.json"),
        &config,
        Some(args.seed),
    )?;
    Ok(())
}

fn quick_convergence() -> ExperimentConfig {
    ExperimentConfig {
        t_grid: vec![25, 50, 100, 250, 500],
        trials: 20,
        ..ExperimentConfig::benchmark()
    }
}

fn quick_isoquant() -> IsoquantConfig {
    IsoquantConfig {
        rho_grid: vec![0.1, 0.3, 0.5, 0.7],
        t_grid: vec![25, 100, 400],
        trials: 10,
        ..IsoquantConfig::desk()
    }
}

fn thread_pool(threads: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::new(EXIT_MODEL, "--threads must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Failure::new(failure::EXIT_INTERNAL, format!("thread pool: {e}")))
}

fn load_config<T: serde::de::DeserializeOwned>(rec: &mut Recorder, path: &Path) -> CliResult<T> {
    let text = rec.read_string(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::input(path, e.into()))
}

fn experiment(args: ExperimentArgs) -> CliResult {
    let mut rec = Recorder::new("experiment");
    let pool = thread_pool(args.threads)?;
    let dir = &args.out_dir;
    match args.kind {
        ExperimentKind::Convergence => {
            let mut config = match &args.config {
                Some(path) => load_config(&mut rec, path)?,
                None if args.quick => quick_convergence(),
                None => ExperimentConfig::benchmark(),
            };
            if args.quick && args.config.is_some() {
                config.trials = config.trials.min(20);
            }
            config.trials = args.trials.unwrap_or(config.trials);
            config.seed = args.seed.unwrap_or(config.seed);
            let report = pool.install(|| run_convergence(&config, Execution::Parallel))?;
            rec.write(&dir.join("convergence.csv"), report.to_csv().as_bytes())?;
            let meta =
                serde_json::to_string_pretty(&report.metadata).expect("metadata serializes") + "\n";
            rec.write(&dir.join("convergence.json"), meta.as_bytes())?;
            if !args.no_plot {
                let path = dir.join("convergence.svg");
                plot::convergence(&path, &config, &report)?;
                rec.write(
                    &path,
                    &std::fs::read(&path).map_err(|e| Failure::write(&path, e))?,
                )?;
            }
            rec.finish(&dir.join("manifest.json"), &config, Some(config.seed))?;
        }
        ExperimentKind::Isoquant => {
            let mut config = match &args.config {
                Some(path) => load_config(&mut rec, path)?,
                None if args.quick => quick_isoquant(),
                None => IsoquantConfig::desk(),
            };
            if args.quick && args.config.is_some() {
                config.trials = config.trials.min(10);
            }
            config.trials = args.trials.unwrap_or(config.trials);
            config.seed = args.seed.unwrap_or(config.seed);
            let report = pool.install(|| run_isoquant(&config, Execution::Parallel))?;
            rec.write(&dir.join("isoquant.csv"), report.to_csv().as_bytes())?;
            let meta =
                serde_json::to_string_pretty(&report.metadata).expect("metadata serializes") + "\n";
            rec.write(&dir.join("isoquant.json"), meta.as_bytes())?;
            if !args.no_plot {
                let path = dir.join("isoquant.svg");
                plot::isoquant(&path, &report)?;
                rec.write(
                    &path,
                    &std::fs::read(&path).map_err(|e| Failure::write(&path, e))?,
                )?;
            }
            rec.finish(&dir.join("manifest.json"), &config, Some(config.seed))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundsReport {
    n: usize,
    t: usize,
    d: f64,
    concentration_bound: f64,
    bound_valid: bool,
    validity_threshold: f64,
    recovery_confidence: f64,
    budgets: Vec<BudgetLine>,
}

#[derive(Serialize)]
struct BudgetLine {
    class: AlgorithmClass,
    value: f64,
    binding_level: usize,
}

fn bounds(args: BoundsArgs) -> CliResult {
    let mut rec = Recorder::new("bounds");
    let h = args.source.load(&mut rec)?;
    let n = match (args.n, &h) {
        (Some(n), _) => n,
        (None, Some(h)) => h.n(),
        (None, None) => return Err(Failure::new(failure::EXIT_PARSE, "give -n or a hierarchy")),
    };
    if n < 2 || args.t < 2 || !args.d.is_finite() {
        return Err(Failure::new(
            EXIT_MODEL,
            "need N >= 2, T >= 2 and a finite d",
        ));
    }
    let mut budgets = Vec::new();
    if let Some(h) = &h {
        if h.depth() > 0 {
            for class in [AlgorithmClass::SpaceConserving, AlgorithmClass::Ward] {
                let b = max_error_budget(h, class)?;
                budgets.push(BudgetLine {
                    class,
                    value: b.value,
                    binding_level: b.binding_level,
                });
            }
        }
    }
    let bound = concentration_bound(n, args.t);
    let report = BoundsReport {
        n,
        t: args.t,
        d: args.d,
        concentration_bound: bound.bound,
        bound_valid: bound.valid,
        validity_threshold: 24.0 / (args.t as f64).ln() + 2.0,
        recovery_confidence: recovery_confidence(n, args.t, args.d),
        budgets,
    };
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
        return Ok(());
    }
    println!("N = {}, T = {}, d = {}", report.n, report.t, report.d);
    for b in &report.budgets {
        let name = match b.class {
            AlgorithmClass::SpaceConserving => "space-conserving",
            AlgorithmClass::Ward => "ward",
        };
        let note = if b.value > 0.0 {
            ""
        } else {
            ", no error tolerated"
        };
        println!(
            "error budget ({name}): {:.6} (binding level {}{note})",
            b.value, b.binding_level
        );
    }
    println!(
        "concentration bound 24 sqrt(ln N / T): {:.6} (valid: {}, needs N >= {:.3})",
        report.concentration_bound, report.bound_valid, report.validity_threshold
    );
    println!(
        "recovery confidence 1 - 2 N^2 exp(-T d^2 / 24): {:.6}",
        report.recovery_confidence
    );
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Sample(a) => sample(a),
        Command::Cluster(a) => cluster(a),
        Command::Experiment(a) => experiment(a),
        Command::Bounds(a) => bounds(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
