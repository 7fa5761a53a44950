//! Replicated error-rate sweeps and covariance-formation timing.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use compda::discriminant::{
    class_statistics, compress_classes, compressed_within_class_covariance, fit_linear_timed,
    fit_quadratic_timed, misclassification_rate, sample_class_matrices, within_class_covariance,
    Classifier,
};
use compda::rng::child_seed;
use compda::{FitConfig, LabeledDataset, LinearVariant, MatrixFamily, QuadraticVariant};
use rayon::prelude::*;

use crate::data::{DataConfig, Split};
use crate::error::{BenchError, Context, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Linear(LinearVariant),
    Quadratic(QuadraticVariant),
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Linear(LinearVariant::Full),
        Method::Linear(LinearVariant::Compressed),
        Method::Linear(LinearVariant::Projected),
        Method::Linear(LinearVariant::Frf),
        Method::Linear(LinearVariant::Subsampled),
        Method::Quadratic(QuadraticVariant::Full),
        Method::Quadratic(QuadraticVariant::Compressed),
        Method::Quadratic(QuadraticVariant::Subsampled),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Linear(v) => v.name(),
            Method::Quadratic(v) => v.name(),
        }
    }

    /// Stable id used in seed derivation.
    pub fn id(self) -> u64 {
        Self::ALL.iter().position(|&m| m == self).expect("listed") as u64
    }

    /// Full-data methods are deterministic and run once.
    pub fn is_full(self) -> bool {
        matches!(
            self,
            Method::Linear(LinearVariant::Full) | Method::Quadratic(QuadraticVariant::Full)
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| BenchError::config(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: DataConfig,
    pub methods: Vec<Method>,
    pub m_grid: Vec<usize>,
    pub s: f64,
    pub gamma: f64,
    pub family: MatrixFamily,
    pub reps: usize,
    pub seed: u64,
    /// When false all time columns are written as zero, making the output a
    /// pure function of the configuration.
    pub record_timings: bool,
}

impl ExperimentConfig {
    pub fn new(data: DataConfig) -> Self {
        Self {
            data,
            methods: vec![
                Method::Linear(LinearVariant::Full),
                Method::Linear(LinearVariant::Compressed),
                Method::Linear(LinearVariant::Projected),
                Method::Linear(LinearVariant::Frf),
                Method::Linear(LinearVariant::Subsampled),
            ],
            m_grid: vec![500],
            s: 0.01,
            gamma: 1e-4,
            family: MatrixFamily::SparseRademacher,
            reps: 100,
            seed: 0,
            record_timings: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.data.validate()?;
        if self.reps == 0 {
            return Err(BenchError::config("reps must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(BenchError::config("no methods selected"));
        }
        if self.m_grid.iter().any(|&m| m < 2) {
            return Err(BenchError::config("every m must be at least 2"));
        }
        let needs_grid = self.methods.iter().any(|m| !m.is_full());
        if needs_grid && self.m_grid.is_empty() {
            return Err(BenchError::config("empty m grid"));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(BenchError::config(format!("s must lie in (0, 1), got {}", self.s)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(BenchError::config(format!(
                "gamma must be non-negative, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Number of records [`run_experiment`] produces.
    pub fn record_count(&self) -> usize {
        self.methods
            .iter()
            .map(|m| if m.is_full() { 1 } else { self.m_grid.len() * self.reps })
            .sum()
    }
}

/// One row of the output CSV. `error_rate` is empty for timing-only rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub dataset: String,
    pub method: String,
    pub m: usize,
    pub s: f64,
    pub gamma: f64,
    pub family: String,
    pub rep: usize,
    pub seed: u64,
    pub error_rate: Option<f64>,
    pub fit_ms: f64,
    pub compress_ms: f64,
    pub classify_ms: f64,
}

pub const CSV_HEADER: [&str; 12] = [
    "dataset",
    "method",
    "m",
    "s",
    "gamma",
    "family",
    "rep",
    "seed",
    "error_rate",
    "fit_ms",
    "compress_ms",
    "classify_ms",
];

impl MetricsRecord {
    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.error_rate {
            if !(0.0..=1.0).contains(&e) {
                return Err(BenchError::InvalidRecord(format!("error rate {e} outside [0, 1]")));
            }
        }
        for (name, t) in [
            ("fit_ms", self.fit_ms),
            ("compress_ms", self.compress_ms),
            ("classify_ms", self.classify_ms),
        ] {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(BenchError::InvalidRecord(format!("{name} = {t}")));
            }
        }
        Ok(())
    }

    fn fields(&self) -> [String; 12] {
        [
            self.dataset.clone(),
            self.method.clone(),
            self.m.to_string(),
            self.s.to_string(),
            self.gamma.to_string(),
            self.family.clone(),
            self.rep.to_string(),
            self.seed.to_string(),
            self.error_rate.map(|e| e.to_string()).unwrap_or_default(),
            format!("{:.3}", self.fit_ms),
            format!("{:.3}", self.compress_ms),
            format!("{:.3}", self.classify_ms),
        ]
    }
}

fn csv_err(e: csv::Error) -> BenchError {
    BenchError::InvalidRecord(e.to_string())
}

pub fn write_records<W: Write>(out: W, records: &[MetricsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record(r.fields()).map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| BenchError::InvalidRecord(format!("flushing csv: {e}")))
}

/// Parses CSV written by [`write_records`], validating every row.
pub fn read_records<R: Read>(input: R) -> Result<Vec<MetricsRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(BenchError::InvalidRecord(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let bad = |col: &str| BenchError::InvalidRecord(format!("row {}: bad {col}", i + 2));
        let num = |j: usize, col: &str| row[j].parse::<f64>().map_err(|_| bad(col));
        let record = MetricsRecord {
            dataset: row[0].to_owned(),
            method: row[1].to_owned(),
            m: row[2].parse().map_err(|_| bad("m"))?,
            s: num(3, "s")?,
            gamma: num(4, "gamma")?,
            family: row[5].to_owned(),
            rep: row[6].parse().map_err(|_| bad("rep"))?,
            seed: row[7].parse().map_err(|_| bad("seed"))?,
            error_rate: if row[8].is_empty() {
                None
            } else {
                Some(num(8, "error_rate")?)
            },
            fit_ms: num(9, "fit_ms")?,
            compress_ms: num(10, "compress_ms")?,
            classify_ms: num(11, "classify_ms")?,
        };
        record.validate()?;
        out.push(record);
    }
    Ok(out)
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    method: Method,
    m: usize,
    rep: usize,
    seed: u64,
}

fn cells(config: &ExperimentConfig, n: usize) -> Vec<Cell> {
    let mut out = Vec::with_capacity(config.record_count());
    for &method in &config.methods {
        if method.is_full() {
            out.push(Cell {
                method,
                m: n,
                rep: 0,
                seed: child_seed(config.seed, &[method.id(), n as u64, 0]),
            });
            continue;
        }
        for &m in &config.m_grid {
            for rep in 0..config.reps {
                out.push(Cell {
                    method,
                    m,
                    rep,
                    seed: child_seed(config.seed, &[method.id(), m as u64, rep as u64]),
                });
            }
        }
    }
    out
}

fn run_cell(
    config: &ExperimentConfig,
    dataset: &str,
    split: &Split,
    cell: Cell,
) -> Result<MetricsRecord> {
    let fit = FitConfig {
        m: cell.m,
        s: config.s,
        gamma: config.gamma,
        family: config.family,
        seed: cell.seed,
    };
    let tag = || format!("{} m={} rep={}", cell.method, cell.m, cell.rep);
    let (model, timings): (Box<dyn Classifier + Send>, _) = match cell.method {
        Method::Linear(v) => {
            let (model, t) = fit_linear_timed(&split.train, v, &fit).context(tag)?;
            (Box::new(model), t)
        }
        Method::Quadratic(v) => {
            let (model, t) = fit_quadratic_timed(&split.train, v, &fit).context(tag)?;
            (Box::new(model), t)
        }
    };
    let start = Instant::now();
    let error = misclassification_rate(model.as_ref(), &split.test).context(tag)?;
    let classify = start.elapsed();
    let keep = |d: Duration| if config.record_timings { ms(d) } else { 0.0 };
    Ok(MetricsRecord {
        dataset: dataset.to_owned(),
        method: cell.method.name().to_owned(),
        m: cell.m,
        s: config.s,
        gamma: config.gamma,
        family: config.family.name().to_owned(),
        rep: cell.rep,
        seed: cell.seed,
        error_rate: Some(error),
        fit_ms: keep(timings.total),
        compress_ms: keep(timings.compress),
        classify_ms: keep(classify),
    })
}

/// Loads the data and runs every `(method, m, replication)` cell.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<MetricsRecord>> {
    config.validate()?;
    let split = config.data.load(config.seed)?;
    run_on_split(config, config.data.name(), &split)
}

/// Runs every cell on already loaded data. Replications share the split and
/// differ only in compression matrices or sub-samples. Cells run in
/// parallel; output order is method, then m, then replication.
pub fn run_on_split(
    config: &ExperimentConfig,
    dataset: &str,
    split: &Split,
) -> Result<Vec<MetricsRecord>> {
    config.validate()?;
    let n = split.train.len();
    if let Some(&m) = config.m_grid.iter().find(|&&m| m > n) {
        return Err(BenchError::config(format!(
            "m = {m} exceeds the {n} training samples"
        )));
    }
    cells(config, n)
        .into_par_iter()
        .map(|cell| run_cell(config, dataset, split, cell))
        .collect()
}

/// Mean and standard error of the error rate per `(method, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub method: String,
    pub m: usize,
    pub count: usize,
    pub mean: f64,
    pub se: f64,
}

pub fn summarize(records: &[MetricsRecord]) -> Vec<Summary> {
    let mut out: Vec<Summary> = Vec::new();
    let mut groups: Vec<((String, usize), Vec<f64>)> = Vec::new();
    for r in records {
        let Some(e) = r.error_rate else { continue };
        let key = (r.method.clone(), r.m);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(e),
            None => groups.push((key, vec![e])),
        }
    }
    for ((method, m), v) in groups {
        let k = v.len() as f64;
        let mean = v.iter().sum::<f64>() / k;
        let se = if v.len() > 1 {
            let var = v.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        } else {
            0.0
        };
        out.push(Summary {
            method,
            m,
            count: v.len(),
            mean,
            se,
        });
    }
    out
}

pub const FULL_COV: &str = "full-cov";
pub const COMPRESSED_COV: &str = "compressed-cov";

/// Wall-clock time of forming the full within-class covariance and, per `m`,
/// the compressed one (drawing `Q`, compressing both classes and forming the
/// covariance). Both include the class means. Runs sequentially so timings
/// do not compete for cores.
pub fn time_covariance_formation(
    dataset: &str,
    train: &LabeledDataset,
    m_grid: &[usize],
    s: f64,
    family: MatrixFamily,
    reps: usize,
    seed: u64,
) -> Result<Vec<MetricsRecord>> {
    if reps == 0 {
        return Err(BenchError::config("reps must be at least 1"));
    }
    let n = train.len();
    if let Some(&m) = m_grid.iter().find(|&&m| m < 2 || m > n) {
        return Err(BenchError::config(format!("m = {m} outside [2, {n}]")));
    }
    let record = |method: &str, m: usize, rep: usize, seed: u64, t: Duration| MetricsRecord {
        dataset: dataset.to_owned(),
        method: method.to_owned(),
        m,
        s,
        gamma: 0.0,
        family: family.name().to_owned(),
        rep,
        seed,
        error_rate: None,
        fit_ms: ms(t),
        compress_ms: ms(t),
        classify_ms: 0.0,
    };
    let mut out = Vec::with_capacity(reps * (m_grid.len() + 1));
    for rep in 0..reps {
        let start = Instant::now();
        let stats = class_statistics(train).context(|| "full covariance".into())?;
        let s_w = within_class_covariance(train, &stats);
        let t = start.elapsed();
        std::hint::black_box(&s_w);
        out.push(record(FULL_COV, n, rep, 0, t));
    }
    for &m in m_grid {
        for rep in 0..reps {
            let cell_seed = child_seed(seed, &[u64::MAX, m as u64, rep as u64]);
            let fit = FitConfig {
                m,
                s,
                gamma: 0.0,
                family,
                seed: cell_seed,
            };
            let tag = || format!("compressed covariance m={m} rep={rep}");
            let start = Instant::now();
            let stats = class_statistics(train).context(tag)?;
            let q = sample_class_matrices(&stats, &fit).context(tag)?;
            let [c1, c2] = compress_classes(train, &stats, [&q[0], &q[1]]).context(tag)?;
            let s_wc = compressed_within_class_covariance(&c1, &c2, &stats).context(tag)?;
            let t = start.elapsed();
            std::hint::black_box(&s_wc);
            out.push(record(COMPRESSED_COV, m, rep, cell_seed, t));
        }
    }
    Ok(out)
}

/// Median of `fit_ms` over the records with the given method and `m`.
pub fn median_time(records: &[MetricsRecord], method: &str, m: usize) -> Option<f64> {
    let mut t: Vec<f64> = records
        .iter()
        .filter(|r| r.method == method && r.m == m)
        .map(|r| r.fit_ms)
        .collect();
    if t.is_empty() {
        return None;
    }
    t.sort_by(f64::total_cmp);
    let k = t.len();
    Some(if k % 2 == 1 {
        t[k / 2]
    } else {
        0.5 * (t[k / 2 - 1] + t[k / 2])
    })
}
