//! Command-line front end: `train`, `sweep`, `density` and `synth`.
//!
//! Every command reads a TOML [`RunConfig`], writes its artefacts under the
//! output directory and maps failures onto exit codes (see [`CliError`]).
//! CSV outputs begin with a `# config_sha256=<hex>` comment so results can be
//! traced back to the exact configuration that produced them.

pub mod config;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use sdcnn::graph::write_dataset;
use sdcnn::trainer::evaluate_all;
use sdcnn::{
    generate_synthetic, sweep, train, Checkpoint, DatasetPaths, DiffusionKernel, Error,
    MemoryReport, SweepReport,
};

pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "sdcnn", version, about = "Sparse diffusion-convolutional networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one model and write a checkpoint plus metrics.
    Train(CommonArgs),
    /// Retrain across `sweep.thresholds` and tabulate metrics and memory.
    Sweep(CommonArgs),
    /// Kernel density against threshold, one series per `sweep.hops` entry.
    Density(CommonArgs),
    /// Write the `[synthetic]` graph as edge, feature and label files.
    Synth(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `[output] dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for `sweep`; 1 runs sequentially.
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    /// Overrides `train.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// A failure with the process exit code it maps to:
/// 1 configuration, 2 data or I/O, 3 numeric, 4 failed sweep rows.
#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) => 1,
            Error::Input(_) | Error::Io { .. } => 2,
            Error::Numeric(_) | Error::Diverged { .. } => 3,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// Runs a parsed command, printing a summary; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Train(a) => prepare(&a).and_then(|ctx| cmd_train(&ctx)).map(|t| {
            println!(
                "trained {} epochs (best {}), kernel density {:.4}, test accuracy {:.4}",
                t.epochs, t.best_epoch, t.density, t.test_accuracy
            );
        }),
        Command::Sweep(a) => prepare(&a)
            .and_then(|ctx| cmd_sweep(&ctx, a.parallel))
            .and_then(|report| report_sweep(&report)),
        Command::Density(a) => prepare(&a).and_then(|ctx| cmd_density(&ctx)).map(|points| {
            for pt in &points {
                println!("H={} {} {:<8} density {:.6}", pt.hops, pt.mode, pt.threshold, pt.density);
            }
        }),
        Command::Synth(a) => prepare(&a).and_then(|ctx| cmd_synth(&ctx)).map(|paths| {
            println!("wrote {}", paths.edges.parent().unwrap_or(&paths.edges).display());
        }),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("sdcnn: {e}");
            e.code
        }
    }
}

/// Prints the sweep table; failed rows become exit code 4.
fn report_sweep(report: &SweepReport) -> Result<(), CliError> {
    for row in &report.rows {
        println!(
            "{} {:<8} density {:.5} peak {:>9} test acc {:.4}",
            row.mode, row.threshold, row.density, row.peak_entries, row.metrics.test.accuracy
        );
    }
    if let Some(cutoff) = report.edge_cutoff {
        println!("thresholds above {cutoff} remove every edge");
    }
    if report.failures.is_empty() {
        return Ok(());
    }
    let lines: Vec<&str> = report.failures.iter().map(|f| f.error.as_str()).collect();
    Err(CliError {
        code: 4,
        message: format!("{} sweep row(s) failed:\n  {}", lines.len(), lines.join("\n  ")),
    })
}

/// Resolved configuration plus its hash and output directory.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub hash: String,
    pub out_dir: PathBuf,
}

impl Context {
    /// Applies overrides, hashes the result and creates the output directory.
    pub fn new(mut config: RunConfig, out: Option<PathBuf>, seed: Option<u64>) -> Result<Self, CliError> {
        if let Some(seed) = seed {
            config.train.seed = seed;
        }
        if let Some(out) = out {
            config.output.dir = out;
        }
        config.validate()?;
        let out_dir = config.output.dir.clone();
        fs::create_dir_all(&out_dir).map_err(|e| CliError {
            code: 1,
            message: format!("output directory {}: {e}", out_dir.display()),
        })?;
        Ok(Self {
            hash: config.hash(),
            config,
            out_dir,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn header(&self) -> String {
        format!("# config_sha256={}\n", self.hash)
    }

    /// Writes `body` to `name` with the config-hash comment line first.
    fn write_csv(&self, name: &str, body: &[u8]) -> Result<PathBuf, CliError> {
        let mut bytes = self.header().into_bytes();
        bytes.extend_from_slice(body);
        self.write(name, &bytes)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }
}

fn prepare(args: &CommonArgs) -> Result<Context, CliError> {
    let config = RunConfig::load(&args.config).map_err(|e| CliError {
        code: 1,
        message: format!("{}: {e}", args.config.display()),
    })?;
    Context::new(config, args.out.clone(), args.seed)
}

fn csv_bytes<S: serde::Serialize>(rows: impl IntoIterator<Item = S>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| Error::Input(format!("csv: {e}")))?;
    }
    w.into_inner()
        .map_err(|e| Error::Input(format!("csv: {e}")).into())
}

#[derive(serde::Serialize)]
struct MetricsRow {
    split: &'static str,
    loss: f64,
    accuracy: f64,
    macro_f1: f64,
}

/// Paths written by `train` plus headline numbers.
#[derive(Debug)]
pub struct TrainArtifacts {
    pub checkpoint: PathBuf,
    pub metrics: PathBuf,
    pub history: PathBuf,
    pub epochs: usize,
    pub best_epoch: usize,
    pub density: f64,
    pub test_accuracy: f64,
}

pub fn cmd_train(ctx: &Context) -> Result<TrainArtifacts, CliError> {
    let dataset = ctx.config.dataset()?;
    let (kernel, outcome) = train(&dataset, &ctx.config.train)?;
    let metrics = evaluate_all(&outcome.model, &dataset, &kernel)?;
    let checkpoint = Checkpoint {
        model: outcome.model.clone(),
        mode: kernel.mode(),
    };
    let checkpoint_path = ctx.write("model.json", checkpoint.to_json().as_bytes())?;
    let rows = [
        ("train", metrics.train),
        ("valid", metrics.valid),
        ("test", metrics.test),
    ]
    .map(|(split, m)| MetricsRow {
        split,
        loss: m.loss,
        accuracy: m.accuracy,
        macro_f1: m.macro_f1,
    });
    let metrics_path = ctx.write_csv("metrics.csv", &csv_bytes(rows)?)?;
    let history_path = ctx.write_csv("history.csv", &csv_bytes(&outcome.history)?)?;
    Ok(TrainArtifacts {
        checkpoint: checkpoint_path,
        metrics: metrics_path,
        history: history_path,
        epochs: outcome.epochs_run(),
        best_epoch: outcome.best_epoch,
        density: kernel.density(),
        test_accuracy: metrics.test.accuracy,
    })
}

/// Runs the sweep and writes `sweep.csv` and `sweep.jsonl`. Failed rows are
/// left in the report for the caller.
pub fn cmd_sweep(ctx: &Context, threads: usize) -> Result<SweepReport, CliError> {
    let cfg = &ctx.config;
    let dataset = cfg.dataset()?;
    let run = || sweep(&dataset, &cfg.sweep.thresholds, cfg.sweep.mode, &cfg.train, threads > 1);
    let report = if threads > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError {
                code: 1,
                message: format!("thread pool: {e}"),
            })?
            .install(run)?
    } else {
        run()?
    };
    let mut body = Vec::new();
    report.write_csv(&mut body)?;
    ctx.write_csv("sweep.csv", &body)?;
    let mut log = Vec::new();
    report.write_log(&mut log)?;
    ctx.write("sweep.jsonl", &log)?;
    Ok(report)
}

/// One point of a density curve.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DensityPoint {
    pub hops: usize,
    pub threshold: f64,
    pub mode: &'static str,
    pub density: f64,
    pub log10_density: f64,
    pub peak_entries: usize,
}

/// Builds a kernel per (hops, threshold) pair without training. Writes
/// `density.csv` and one `memory_h<H>.csv` per hop count.
pub fn cmd_density(ctx: &Context) -> Result<Vec<DensityPoint>, CliError> {
    let cfg = &ctx.config;
    let dataset = cfg.dataset()?;
    let p = dataset.transition_matrix()?;
    let mut points = Vec::new();
    for hops in cfg.density_hops() {
        let mut reports = Vec::new();
        for &t in &cfg.sweep.thresholds {
            let kernel = DiffusionKernel::build(&p, cfg.sweep.mode.with_threshold(t), hops)?;
            points.push(DensityPoint {
                hops,
                threshold: t,
                mode: kernel.mode().name(),
                density: kernel.density(),
                log10_density: kernel.density().log10(),
                peak_entries: kernel.ledger().peak_stored_entries,
            });
            reports.push(kernel.memory_report());
        }
        let mut body = Vec::new();
        MemoryReport::write_csv(&reports, &mut body)?;
        ctx.write_csv(&format!("memory_h{hops}.csv"), &body)?;
    }
    ctx.write_csv("density.csv", &csv_bytes(&points)?)?;
    Ok(points)
}

/// Writes `edges.txt`, `features.txt` and `labels.txt` for the configured
/// synthetic graph.
pub fn cmd_synth(ctx: &Context) -> Result<DatasetPaths, CliError> {
    let spec = ctx.config.synthetic.as_ref().ok_or_else(|| CliError {
        code: 1,
        message: "synth needs a [synthetic] section".into(),
    })?;
    let dataset = generate_synthetic(spec)?;
    let paths = DatasetPaths {
        edges: ctx.path("edges.txt"),
        features: ctx.path("features.txt"),
        labels: ctx.path("labels.txt"),
    };
    write_dataset(&dataset, &paths)?;
    Ok(paths)
}
