//! ohmk: effective-resistance graph kernels from the command line.
//!
//! Subcommands: `fetch` retrieves TU Dortmund datasets, `gram` computes
//! kernel matrices, `benchmark` runs the repeated-split SVM protocol, and
//! `er-discriminate` runs the two-class edge-density experiment.
//!
//! Exit codes are stable for scripting: 0 success, 1 computation failure,
//! 2 usage or input error.

mod artifacts;
mod fetch;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use ohmkernel::graph::GraphError;
use ohmkernel::kernel::{self, FeatureMode, KernelError};
use ohmkernel::svm::{self, ProtocolConfig};
use ohmkernel::tudata::{self, TuError};

#[derive(Parser)]
#[command(name = "ohmk", version, about = "Effective-resistance graph kernel toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct DatasetArgs {
    /// Dataset name (directory `<dir>/<dataset>` holds the TU flat files)
    #[arg(long)]
    dataset: String,
    /// Parent directory of dataset directories
    #[arg(long, default_value_os_t = tudata::default_data_dir())]
    dir: PathBuf,
}

#[derive(Args, Debug)]
struct KernelArgs {
    /// Feature mode: full (all pairs) or reduced (ceil(sqrt(n)) samples)
    #[arg(long, default_value = "full")]
    mode: FeatureMode,
    /// RBF width gamma
    #[arg(long, default_value_t = kernel::DEFAULT_GAMMA)]
    gamma: f64,
    /// Master seed for sampling, splits, and solver fallbacks
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Download a TU Dortmund dataset archive, verify its checksum, unpack
    Fetch {
        /// Dataset name: AIDS, NCI1, PTC_MR, MUTAG, or PROTEINS
        #[arg(long)]
        dataset: String,
        /// Directory to unpack into
        #[arg(long, default_value_os_t = tudata::default_data_dir())]
        dir: PathBuf,
        /// Require this SHA-256 (hex) for the downloaded archive
        #[arg(long)]
        expect_sha256: Option<String>,
        /// Archive server (mirrors and tests)
        #[arg(long, default_value = fetch::DEFAULT_BASE_URL)]
        base_url: String,
    },
    /// Compute a dataset's Gram matrix and write CSV + JSON artifacts
    Gram {
        #[command(flatten)]
        data: DatasetArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        /// Output base path; writes <out>.csv and <out>.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the repeated-split SVM benchmark and write a JSON report
    Benchmark {
        #[command(flatten)]
        data: DatasetArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        /// Output path for the JSON report
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated C values overriding the default grid
        #[arg(long)]
        c_grid: Option<String>,
    },
    /// Two-class Erdos-Renyi discrimination experiment
    ErDiscriminate {
        /// Vertices per graph
        #[arg(long)]
        n: usize,
        /// Edge probability of class one
        #[arg(long)]
        p1: f64,
        /// Edge probability of class two
        #[arg(long)]
        p2: f64,
        /// Graphs per class
        #[arg(long, default_value_t = 4)]
        count_per_class: usize,
        #[command(flatten)]
        kernel: KernelArgs,
        /// Output base path; writes <out>.csv and <out>.json
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a grayscale heatmap as <out>.pgm
        #[arg(long)]
        render_pgm: bool,
    },
}

/// Marker for errors caused by the invocation rather than the computation.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

/// 2 for usage/input problems anywhere in the chain, 1 otherwise.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(tu) = cause.downcast_ref::<TuError>() {
            if matches!(tu, TuError::MissingFile { .. }) {
                return 2;
            }
        }
        if let Some(g) = cause.downcast_ref::<GraphError>() {
            if matches!(g, GraphError::InvalidProbability { .. }) {
                return 2;
            }
        }
        if let Some(k) = cause.downcast_ref::<KernelError>() {
            if matches!(k, KernelError::Graph(GraphError::InvalidProbability { .. })) {
                return 2;
            }
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fetch { dataset, dir, expect_sha256, base_url } => {
            fetch::run(&dataset, &dir, expect_sha256.as_deref(), &base_url)
        }
        Command::Gram { data, kernel, out } => cmd_gram(data, kernel, out),
        Command::Benchmark { data, kernel, out, c_grid } => {
            cmd_benchmark(data, kernel, out, c_grid)
        }
        Command::ErDiscriminate { n, p1, p2, count_per_class, kernel, out, render_pgm } => {
            cmd_er_discriminate(n, p1, p2, count_per_class, kernel, out, render_pgm)
        }
    }
}

fn init_threads(threads: Option<usize>) -> Result<()> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("thread pool setup failed")?;
    }
    Ok(())
}

fn load_dataset(args: &DatasetArgs) -> Result<tudata::Dataset> {
    let dir = args.dir.join(&args.dataset);
    let ds = tudata::load_tu(&dir, &args.dataset)
        .with_context(|| format!("cannot load dataset {} from {}", args.dataset, dir.display()))?;
    Ok(ds)
}

fn cmd_gram(data: DatasetArgs, kargs: KernelArgs, out: Option<PathBuf>) -> Result<()> {
    init_threads(kargs.threads)?;
    let ds = load_dataset(&data)?;
    let echo = artifacts::ConfigEcho {
        command: "gram",
        dataset: Some(ds.name().to_string()),
        dir: Some(data.dir.clone()),
        mode: Some(kargs.mode),
        gamma: Some(kargs.gamma),
        seed: Some(kargs.seed),
        threads: kargs.threads,
        ..Default::default()
    };

    let t0 = std::time::Instant::now();
    let features = kernel::extract_features(ds.graphs(), kargs.mode, kargs.seed)?;
    let features_ms = t0.elapsed().as_millis() as u64;
    let gram = kernel::gram(&features, kargs.gamma);

    let ids: Vec<String> = (0..ds.len()).map(|i| format!("{}_{i}", ds.name())).collect();
    let base = out.unwrap_or_else(|| {
        PathBuf::from(format!("{}_{}_gram", ds.name().to_lowercase(), kargs.mode))
    });
    let csv_path = base.with_extension("csv");
    let json_path = base.with_extension("json");
    artifacts::write_text(&csv_path, &gram.to_csv(&ids)?)?;
    artifacts::write_gram_json(
        &json_path,
        &gram,
        kargs.gamma,
        kargs.mode,
        kargs.seed,
        ds.name(),
        features.iter().map(|f| f.len()).collect(),
        features_ms,
        &echo,
    )?;

    println!(
        "{}: {} graphs, {} mode, feature extraction {features_ms} ms",
        ds.name(),
        ds.len(),
        kargs.mode
    );
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn parse_c_grid(spec: &str) -> Result<Vec<f64>> {
    let grid: Vec<f64> = spec
        .split(',')
        .map(|s| {
            let c: f64 = s
                .trim()
                .parse()
                .map_err(|_| usage(format!("--c-grid entry {s:?} is not a number")))?;
            if !(c > 0.0 && c.is_finite()) {
                return Err(usage(format!("--c-grid entry {c} must be positive and finite")));
            }
            Ok(c)
        })
        .collect::<Result<_>>()?;
    if grid.is_empty() {
        return Err(usage("--c-grid must list at least one value"));
    }
    Ok(grid)
}

fn cmd_benchmark(
    data: DatasetArgs,
    kargs: KernelArgs,
    out: Option<PathBuf>,
    c_grid: Option<String>,
) -> Result<()> {
    init_threads(kargs.threads)?;
    let ds = load_dataset(&data)?;
    let mut cfg = ProtocolConfig::default();
    if let Some(spec) = &c_grid {
        cfg.c_grid = parse_c_grid(spec)?;
    }
    let echo = artifacts::ConfigEcho {
        command: "benchmark",
        dataset: Some(ds.name().to_string()),
        dir: Some(data.dir.clone()),
        mode: Some(kargs.mode),
        gamma: Some(kargs.gamma),
        seed: Some(kargs.seed),
        threads: kargs.threads,
        c_grid: Some(cfg.c_grid.clone()),
        ..Default::default()
    };

    let report = svm::run_protocol_with(&ds, kargs.mode, kargs.gamma, kargs.seed, &cfg)?;

    println!("dataset {} ({} mode, gamma {})", report.dataset, report.mode, report.gamma);
    for row in &report.grid {
        println!("  C = {:>8}: {:5.1} +- {:.1}", row.c, row.mean, row.std);
    }
    println!(
        "  best: C = {} with {:.1} +- {:.1}",
        report.best.c, report.best.mean, report.best.std
    );

    let path = out.unwrap_or_else(|| {
        PathBuf::from(format!(
            "{}_{}_benchmark.json",
            report.dataset.to_lowercase(),
            report.mode
        ))
    });
    artifacts::write_benchmark_json(&path, &report, &echo)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_er_discriminate(
    n: usize,
    p1: f64,
    p2: f64,
    count_per_class: usize,
    kargs: KernelArgs,
    out: Option<PathBuf>,
    render_pgm: bool,
) -> Result<()> {
    init_threads(kargs.threads)?;
    if count_per_class == 0 {
        return Err(usage("--count-per-class must be at least 1"));
    }
    let (gram, stats) = kernel::er_experiment(
        n,
        p1,
        p2,
        count_per_class,
        kargs.mode,
        kargs.gamma,
        kargs.seed,
    )?;

    let echo = artifacts::ConfigEcho {
        command: "er-discriminate",
        mode: Some(kargs.mode),
        gamma: Some(kargs.gamma),
        seed: Some(kargs.seed),
        threads: kargs.threads,
        n: Some(n),
        p1: Some(p1),
        p2: Some(p2),
        count_per_class: Some(count_per_class),
        ..Default::default()
    };

    let ids: Vec<String> = (0..2 * count_per_class)
        .map(|i| {
            let class = if i < count_per_class { 1 } else { 2 };
            format!("c{class}_{}", i % count_per_class)
        })
        .collect();
    let base = out.unwrap_or_else(|| PathBuf::from(format!("er_{n}_{}", kargs.mode)));
    let csv_path = base.with_extension("csv");
    let json_path = base.with_extension("json");
    artifacts::write_text(&csv_path, &gram.to_csv(&ids)?)?;
    artifacts::write_er_json(&json_path, &gram, &stats, &echo)?;
    let mut written = format!("{} and {}", csv_path.display(), json_path.display());
    if render_pgm {
        let pgm_path = base.with_extension("pgm");
        artifacts::write_text(&pgm_path, &artifacts::gram_to_pgm(&gram))?;
        written = format!("{written} and {}", pgm_path.display());
    }

    println!(
        "n = {n}, p1 = {p1}, p2 = {p2}, {count_per_class}+{count_per_class} graphs, {} mode",
        kargs.mode
    );
    println!(
        "within-class mean {:.6}, between-class mean {:.6}, separation ratio {:.4}",
        stats.within_mean, stats.between_mean, stats.separation_ratio
    );
    println!("wrote {written}");
    Ok(())
}
