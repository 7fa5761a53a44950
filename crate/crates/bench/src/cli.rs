//! Command-line interface. Every flag may also be given in a `key=value`
//! config file (`--config path`, keys are flag names without dashes);
//! flags on the command line win.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use compda::MatrixFamily;

use crate::bound::{bound_curve, write_bound_curve, BoundCurveConfig};
use crate::data::{DataConfig, DatasetKind, DatasetSpec};
use crate::error::{BenchError, Result};
use crate::experiment::{
    run_experiment, summarize, time_covariance_formation, write_records, ExperimentConfig, Method,
    MetricsRecord,
};
use crate::pca::{dump_pca, PcaMode};

#[derive(Debug, Parser)]
#[command(name = "compda", version, about = "Compressed discriminant analysis experiments")]
#[command(args_override_self = true)]
pub struct Cli {
    /// key=value file supplying defaults for any flag
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replicated error rates over methods and m
    Bench(BenchArgs),
    /// Covariance formation timing, full vs compressed
    TimeCov(TimeCovArgs),
    /// First two principal components of raw or compressed samples
    PcaDump(PcaArgs),
    /// Error bound next to the empirical excess error on Gaussian data
    BoundCurve(BoundArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long, default_value = "gauss")]
    pub dataset: String,
    /// Training file (zip, skin, eyestate, csv)
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Test file (zip, csv)
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// IDX training images (mnist)
    #[arg(long)]
    pub images: Option<PathBuf>,
    /// IDX training labels (mnist)
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub test_images: Option<PathBuf>,
    #[arg(long)]
    pub test_labels: Option<PathBuf>,
    /// Label column name or index (csv)
    #[arg(long, default_value = "label")]
    pub label_column: String,
    /// Label value mapped to class 1 (csv)
    #[arg(long, default_value = "1")]
    pub positive_label: String,
    /// Training fraction when there is no separate test set
    #[arg(long, default_value_t = 0.9)]
    pub train_frac: f64,
    /// Sub-sample the training set to this class-1 fraction
    #[arg(long)]
    pub skew_class1: Option<f64>,
    /// Synthetic training size
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Synthetic test size
    #[arg(long, default_value_t = 100_000)]
    pub n_test: usize,
    /// Synthetic dimension (default 10 for gauss, 100 for student-t)
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, default_value_t = 4.0)]
    pub delta_sq: f64,
    #[arg(long, default_value_t = 5)]
    pub df: u32,
    #[arg(long, default_value_t = 0.9)]
    pub rho: f64,
}

fn require(path: &Option<PathBuf>, flag: &str, dataset: &str) -> Result<PathBuf> {
    path.clone()
        .ok_or_else(|| BenchError::config(format!("--{flag} is required for --dataset {dataset}")))
}

impl DataArgs {
    pub fn to_config(&self) -> Result<DataConfig> {
        let kind: DatasetKind = self.dataset.parse()?;
        let name = kind.name();
        let spec = match kind {
            DatasetKind::Zip => DatasetSpec::Zip {
                train: require(&self.train, "train", name)?,
                test: require(&self.test, "test", name)?,
            },
            DatasetKind::Mnist => DatasetSpec::Mnist {
                images: require(&self.images, "images", name)?,
                labels: require(&self.labels, "labels", name)?,
                test: match (&self.test_images, &self.test_labels) {
                    (Some(i), Some(l)) => Some((i.clone(), l.clone())),
                    (None, None) => None,
                    _ => {
                        return Err(BenchError::config(
                            "--test-images and --test-labels go together",
                        ))
                    }
                },
            },
            DatasetKind::Skin => DatasetSpec::Skin {
                path: require(&self.train, "train", name)?,
            },
            DatasetKind::EyeState => DatasetSpec::EyeState {
                path: require(&self.train, "train", name)?,
            },
            DatasetKind::Csv => DatasetSpec::Csv {
                train: require(&self.train, "train", name)?,
                test: self.test.clone(),
                label_column: self.label_column.clone(),
                positive_label: self.positive_label.clone(),
            },
            DatasetKind::Gauss => DatasetSpec::Gauss {
                n: self.n,
                n_test: self.n_test,
                p: self.p.unwrap_or(10),
                delta_sq: self.delta_sq,
            },
            DatasetKind::StudentT => DatasetSpec::StudentT {
                n: self.n,
                n_test: self.n_test,
                p: self.p.unwrap_or(100),
                df: self.df,
                rho: self.rho,
            },
        };
        let config = DataConfig {
            spec,
            train_frac: self.train_frac,
            skew_class1: self.skew_class1,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated methods
    #[arg(long, default_value = "full-lda,compressed-lda,projected-lda,frf,subsampled-lda")]
    pub methods: String,
    /// Comma-separated reduced sample sizes
    #[arg(long, default_value = "500")]
    pub m: String,
    #[arg(long, default_value_t = 0.01)]
    pub s: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub gamma: f64,
    #[arg(long, default_value = "rademacher")]
    pub family: String,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Write zero in every time column so output depends only on the inputs
    #[arg(long)]
    pub omit_timings: bool,
}

#[derive(Debug, Args)]
pub struct TimeCovArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "2000")]
    pub m: String,
    #[arg(long, default_value_t = 0.01)]
    pub s: f64,
    #[arg(long, default_value = "rademacher")]
    pub family: String,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Number of points
    #[arg(long, default_value_t = 5000)]
    pub k: usize,
    /// raw or compressed
    #[arg(long, default_value = "raw")]
    pub mode: String,
    #[arg(long, default_value_t = 0.001)]
    pub s: f64,
    #[arg(long, default_value = "rademacher")]
    pub family: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, default_value_t = 10)]
    pub p: usize,
    #[arg(long, default_value_t = 4.0)]
    pub delta_sq: f64,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.01)]
    pub s: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, default_value = "rademacher")]
    pub family: String,
    #[arg(long, default_value = "100,200,400,800,1600,3200")]
    pub m: String,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,
    /// Absolute constant of the bound
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn parse_grid(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<usize>()
                .map_err(|_| BenchError::config(format!("bad m value {v:?}")))
        })
        .collect()
}

pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(str::parse)
        .collect()
}

fn parse_family(s: &str) -> Result<MatrixFamily> {
    s.parse()
        .map_err(|_| BenchError::config(format!("unknown matrix family {s:?}")))
}

impl BenchArgs {
    pub fn to_config(&self) -> Result<ExperimentConfig> {
        let config = ExperimentConfig {
            data: self.data.to_config()?,
            methods: parse_methods(&self.methods)?,
            m_grid: parse_grid(&self.m)?,
            s: self.s,
            gamma: self.gamma,
            family: parse_family(&self.family)?,
            reps: self.reps,
            seed: self.seed,
            record_timings: !self.omit_timings,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Reads `key=value` lines (blank lines and `#` comments ignored) into
/// command-line tokens. `key=true` becomes a bare flag, `key=false` is
/// dropped.
pub fn config_file_args(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::Io {
        path: path.to_owned(),
        source: e,
    })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            BenchError::config(format!("{}:{}: expected key=value", path.display(), i + 1))
        })?;
        let key = key.trim().trim_start_matches("--");
        if key == "config" {
            return Err(BenchError::config("config files cannot include other config files"));
        }
        match value.trim() {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => {
                out.push(format!("--{key}"));
                out.push(v.to_owned());
            }
        }
    }
    Ok(out)
}

/// Inserts config-file tokens right after the subcommand so that later
/// command-line flags override them.
pub fn expand_args(raw: Vec<String>) -> Result<Vec<String>> {
    let mut config = None;
    let mut sub = None;
    let mut i = 1;
    while i < raw.len() {
        let a = &raw[i];
        if a == "--config" {
            config = raw.get(i + 1).cloned();
            i += 2;
            continue;
        }
        if let Some(v) = a.strip_prefix("--config=") {
            config = Some(v.to_owned());
        } else if sub.is_none() && !a.starts_with('-') {
            sub = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(sub)) = (config, sub) else {
        return Ok(raw);
    };
    let extra = config_file_args(Path::new(&path))?;
    let mut out = raw[..=sub].to_vec();
    out.extend(extra);
    out.extend_from_slice(&raw[sub + 1..]);
    Ok(out)
}

fn write_csv_records(records: &[MetricsRecord], out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| BenchError::Io {
                path: path.clone(),
                source: e,
            })?;
            write_records(io::BufWriter::new(file), records)
        }
        None => write_records(io::stdout().lock(), records),
    }
}

fn print_summary(records: &[MetricsRecord]) {
    let mut err = io::stderr().lock();
    for s in summarize(records) {
        let _ = writeln!(
            err,
            "{:<16} m={:<7} R={:<4} mean={:.4}% se={:.4}%",
            s.method,
            s.m,
            s.count,
            100.0 * s.mean,
            100.0 * s.se
        );
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bench(args) => {
            let config = args.to_config()?;
            let records = if args.threads > 0 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(args.threads)
                    .build()
                    .map_err(|e| BenchError::config(e.to_string()))?
                    .install(|| run_experiment(&config))?
            } else {
                run_experiment(&config)?
            };
            write_csv_records(&records, &args.out)?;
            print_summary(&records);
        }
        Command::TimeCov(args) => {
            let data = args.data.to_config()?;
            let split = data.load(args.seed)?;
            let records = time_covariance_formation(
                data.name(),
                &split.train,
                &parse_grid(&args.m)?,
                args.s,
                parse_family(&args.family)?,
                args.reps,
                args.seed,
            )?;
            write_csv_records(&records, &args.out)?;
        }
        Command::PcaDump(args) => {
            let data = args.data.to_config()?;
            let split = data.load(args.seed)?;
            let mode: PcaMode = args.mode.parse()?;
            let k = dump_pca(
                &split.train,
                args.k,
                mode,
                args.s,
                parse_family(&args.family)?,
                args.seed,
                &args.out,
            )?;
            eprintln!("wrote {k} points to {}", args.out.display());
        }
        Command::BoundCurve(args) => {
            let config = BoundCurveConfig {
                p: args.p,
                delta_sq: args.delta_sq,
                n: args.n,
                s: args.s,
                gamma: args.gamma,
                family: parse_family(&args.family)?,
                m_grid: parse_grid(&args.m)?,
                reps: args.reps,
                eta: args.eta,
                c: args.c,
                seed: args.seed,
            };
            let rows = bound_curve(&config)?;
            write_bound_curve(&rows, &args.out)?;
        }
    }
    Ok(())
}
