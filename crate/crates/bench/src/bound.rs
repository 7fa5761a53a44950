//! Error-bound curve: the theoretical `m^{-1/2}` bound next to the median
//! excess error `|R_c - R_opt|` of Compressed LDA on a Gaussian population.

use std::path::Path;

use compda::datasets::synthesize_gaussian;
use compda::discriminant::{
    class_statistics, compress_classes, compressed_within_class_covariance, sample_class_matrices,
};
use compda::rng::child_seed;
use compda::theory::{bayes_error, compressed_rule_error, excess_error_bound};
use compda::{ClassLabel, FitConfig, MatrixFamily, PopulationModel};
use rayon::prelude::*;

use crate::error::{BenchError, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurveConfig {
    pub p: usize,
    pub delta_sq: f64,
    /// Training size per replication; classes are `n / 2` each.
    pub n: usize,
    pub s: f64,
    pub gamma: f64,
    pub family: MatrixFamily,
    pub m_grid: Vec<usize>,
    pub reps: usize,
    pub eta: f64,
    pub c: f64,
    pub seed: u64,
}

impl Default for BoundCurveConfig {
    fn default() -> Self {
        Self {
            p: 10,
            delta_sq: 4.0,
            n: 10_000,
            s: 0.01,
            gamma: 0.0,
            family: MatrixFamily::SparseRademacher,
            m_grid: vec![100, 200, 400, 800, 1600, 3200],
            reps: 50,
            eta: 0.05,
            c: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub m: usize,
    pub bound: f64,
    pub median_excess: f64,
}

impl BoundCurveConfig {
    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(BenchError::config("reps must be at least 1"));
        }
        if self.n % 2 != 0 {
            return Err(BenchError::config("n must be even so the classes are equal"));
        }
        if let Some(&m) = self.m_grid.iter().find(|&&m| m < 2 || m > self.n) {
            return Err(BenchError::config(format!("m = {m} outside [2, {}]", self.n)));
        }
        Ok(())
    }
}

/// Replication `r` draws a fresh training set of size `n`; every `m` reuses
/// it with its own compression matrices.
pub fn bound_curve(cfg: &BoundCurveConfig) -> Result<Vec<BoundRow>> {
    cfg.validate()?;
    let pop = PopulationModel::isotropic(cfg.p, cfg.delta_sq).context(|| "population".into())?;
    let r_opt = bayes_error(&pop).context(|| "bayes error".into())?;

    let excess: Vec<Vec<f64>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let tag = || format!("bound curve rep={rep}");
            let train = synthesize_gaussian(&pop, cfg.n, child_seed(cfg.seed, &[rep as u64]))
                .context(tag)?;
            let stats = class_statistics(&train).context(tag)?;
            cfg.m_grid
                .iter()
                .map(|&m| {
                    let fit = FitConfig {
                        m,
                        s: cfg.s,
                        gamma: cfg.gamma,
                        family: cfg.family,
                        seed: child_seed(cfg.seed, &[rep as u64, m as u64]),
                    };
                    let q = sample_class_matrices(&stats, &fit).context(tag)?;
                    let [c1, c2] = compress_classes(&train, &stats, [&q[0], &q[1]]).context(tag)?;
                    let s_c = compressed_within_class_covariance(&c1, &c2, &stats)
                        .context(tag)?
                        .with_ridge(cfg.gamma);
                    let r_c = compressed_rule_error(
                        &pop,
                        stats.d(),
                        &s_c,
                        stats.mean(ClassLabel::One),
                        stats.mean(ClassLabel::Two),
                    )
                    .context(tag)?;
                    Ok((r_c - r_opt).abs())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    cfg.m_grid
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let mut col: Vec<f64> = excess.iter().map(|row| row[j]).collect();
            let bound = excess_error_bound(&pop, cfg.s, m, cfg.p, cfg.eta, cfg.c)
                .context(|| format!("bound at m={m}"))?;
            Ok(BoundRow {
                m,
                bound,
                median_excess: median(&mut col),
            })
        })
        .collect()
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn write_bound_curve(rows: &[BoundRow], path: &Path) -> Result<()> {
    let out_err = |e: csv::Error| BenchError::Output {
        path: path.to_owned(),
        reason: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(out_err)?;
    w.write_record(["m", "bound", "median_excess"]).map_err(out_err)?;
    for r in rows {
        w.write_record([r.m.to_string(), r.bound.to_string(), r.median_excess.to_string()])
            .map_err(out_err)?;
    }
    w.flush().map_err(|e| BenchError::Io {
        path: path.to_owned(),
        source: e,
    })
}
