use rayon::prelude::*;

use crate::clustering::Algorithm;
use crate::deployment::deploy;
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::trial::{PreparedSignal, TrialContext, TrialResult, TrialSeeds};
use crate::transform::{order_readings, transform_cluster, SortMode};

/// Summary of one grid cell over its trials. Energy statistics use only
/// trials where every head reached the BS.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub n_c: usize,
    pub sigma: f64,
    pub k: usize,
    pub route: usize,
    pub route_label: &'static str,
    pub algorithm: Algorithm,
    pub trials: usize,
    /// Trials that contributed energy statistics.
    pub complete_trials: usize,
    pub mean_intra: f64,
    pub sd_intra: f64,
    pub mean_tobs: f64,
    pub sd_tobs: f64,
    pub mean_total: f64,
    pub sd_total: f64,
    pub mean_hops: Option<f64>,
    pub mean_error: f64,
    pub sd_error: f64,
    /// Unreachable heads over all heads, across trials.
    pub unreachable_rate: f64,
}

/// Whole-network DCT of trial 0's readings, unsorted and sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub index: usize,
    pub reading: f64,
    pub coeff: f64,
    pub sorted_reading: f64,
    pub sorted_coeff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    /// Ordered by cell, then trial.
    pub results: Vec<TrialResult>,
    /// One row per cell, in grid order.
    pub aggregates: Vec<Aggregate>,
    pub spectrum: Option<Vec<SpectrumRow>>,
}

/// Sample mean and standard deviation (n − 1 denominator; 0 for a single value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

fn cell_key(cfg: &ExperimentConfig, r: &TrialResult) -> (usize, usize, usize, usize, usize) {
    let a = cfg
        .algorithms
        .iter()
        .position(|&x| x == r.cell.algorithm)
        .unwrap_or(0);
    let c = cfg
        .n_clusters
        .iter()
        .position(|&x| x == r.cell.n_c)
        .unwrap_or(0);
    let s = cfg
        .sigma
        .iter()
        .position(|&x| x == r.cell.sigma)
        .unwrap_or(0);
    let k = cfg
        .k_budget
        .iter()
        .position(|&x| x == r.cell.k)
        .unwrap_or(0);
    (a, c, s, k, r.cell.route)
}

fn run_group(
    cfg: &ExperimentConfig,
    signal: &PreparedSignal,
    algorithm: Algorithm,
    n_c_index: usize,
    trial: usize,
) -> Result<Vec<TrialResult>> {
    let ctx = TrialContext::new(cfg, signal, algorithm, n_c_index, trial)?;
    let trees = cfg
        .routes
        .iter()
        .map(|r| ctx.routing_tree(r))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(cfg.sigma.len() * cfg.k_budget.len() * cfg.routes.len());
    for &sigma in &cfg.sigma {
        for &k in &cfg.k_budget {
            let recon = ctx.reconstruct(sigma, k)?;
            for (ri, tree) in trees.iter().enumerate() {
                out.push(ctx.evaluate(sigma, k, ri, &recon, tree.as_ref())?);
            }
        }
    }
    Ok(out)
}

/// Run every cell of the grid for every trial.
///
/// `threads` caps the worker count; results do not depend on it.
pub fn run_sweep(config: &ExperimentConfig, threads: Option<usize>) -> Result<SweepOutput> {
    config.validate()?;
    let signal = PreparedSignal::new(config)?;
    let mut groups = Vec::new();
    for &alg in &config.algorithms {
        for ci in 0..config.n_clusters.len() {
            for t in 0..config.trials {
                groups.push((alg, ci, t));
            }
        }
    }
    let work = || -> Result<Vec<Vec<TrialResult>>> {
        groups
            .par_iter()
            .map(|&(alg, ci, t)| run_group(config, &signal, alg, ci, t))
            .collect()
    };
    let nested = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let mut results: Vec<TrialResult> = nested.into_iter().flatten().collect();
    results.sort_by_key(|r| (cell_key(config, r), r.trial));

    let aggregates = aggregate(config, &results);
    let spectrum = if config.spectrum {
        Some(signal_spectrum(config, &signal)?)
    } else {
        None
    };
    Ok(SweepOutput {
        results,
        aggregates,
        spectrum,
    })
}

/// Collapse sorted trial results into per-cell rows.
pub fn aggregate(config: &ExperimentConfig, results: &[TrialResult]) -> Vec<Aggregate> {
    results
        .chunk_by(|a, b| cell_key(config, a) == cell_key(config, b))
        .map(summarise)
        .collect()
}

fn summarise(rows: &[TrialResult]) -> Aggregate {
    let first = &rows[0];
    let complete: Vec<&TrialResult> = rows.iter().filter(|r| !r.partial).collect();
    let pick =
        |f: fn(&TrialResult) -> f64| mean_sd(&complete.iter().map(|r| f(r)).collect::<Vec<_>>());
    let (mean_intra, sd_intra) = pick(|r| r.energy.intra);
    let (mean_tobs, sd_tobs) = pick(|r| r.energy.to_bs);
    let (mean_total, sd_total) = pick(|r| r.energy.total);
    let hops: Vec<f64> = rows.iter().filter_map(|r| r.mean_hops).collect();
    let mean_hops = (!hops.is_empty()).then(|| mean_sd(&hops).0);
    let (mean_error, sd_error) = mean_sd(&rows.iter().map(|r| r.error).collect::<Vec<_>>());
    let heads: usize = rows.iter().map(|r| r.realized_nc).sum();
    let cut: usize = rows.iter().map(|r| r.unreachable).sum();
    Aggregate {
        n_c: first.cell.n_c,
        sigma: first.cell.sigma,
        k: first.cell.k,
        route: first.cell.route,
        route_label: first.route_label,
        algorithm: first.cell.algorithm,
        trials: rows.len(),
        complete_trials: complete.len(),
        mean_intra,
        sd_intra,
        mean_tobs,
        sd_tobs,
        mean_total,
        sd_total,
        mean_hops,
        mean_error,
        sd_error,
        unreachable_rate: if heads == 0 {
            0.0
        } else {
            cut as f64 / heads as f64
        },
    }
}

pub(crate) fn signal_spectrum(
    config: &ExperimentConfig,
    signal: &PreparedSignal,
) -> Result<Vec<SpectrumRow>> {
    let seeds = TrialSeeds::new(config.master_seed, 0);
    let dep = deploy(config.geometry, config.n_nodes, config.bs_li, seeds.deploy)?;
    let readings = signal.readings(&config.geometry, &dep, seeds.field)?;
    let (plain, coeff) = transform_cluster(&readings, SortMode::None)?;
    let sorted = order_readings(&readings, SortMode::Descending);
    let (_, sorted_coeff) = transform_cluster(&sorted, SortMode::None)?;
    Ok((0..readings.len())
        .map(|i| SpectrumRow {
            index: i,
            reading: plain[i].1,
            coeff: coeff[i],
            sorted_reading: sorted[i].1,
            sorted_coeff: sorted_coeff[i],
        })
        .collect())
}
