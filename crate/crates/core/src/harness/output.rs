use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clustering::cluster_size_histogram;
use crate::error::{Error, Result};
use crate::harness::config::{seed_format, ExperimentConfig};
use crate::harness::sweep::SweepOutput;
use crate::harness::trial::TrialSeeds;
use crate::rng::GENERATOR;

pub const AGGREGATE_HEADER: &str = "scenario,n_c,sigma,K,route,algorithm,trials,mean_intra,sd_intra,mean_tobs,sd_tobs,mean_total,sd_total,mean_hops,mean_error,sd_error,unreachable_rate";
pub const ENERGY_HEADER: &str = "trial,n_clusters,algorithm,route,intra,to_bs,total";
pub const TRIALS_HEADER: &str = "scenario,trial,seed,algorithm,n_c,realized_nc,sigma,K,route,range,intra,to_bs,total,analytic_intra,analytic_tobs,analytic_total,mean_hops,error,unreachable,partial";
pub const HISTOGRAM_HEADER: &str = "algorithm,n_c,bin_lo,bin_hi,count";
pub const SPECTRUM_HEADER: &str = "index,reading,coeff,sorted_reading,sorted_coeff";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftwareInfo {
    pub name: String,
    pub version: String,
    pub generator: String,
    /// Readings are re-sorted every collection round.
    pub sort_schedule: String,
}

impl Default for SoftwareInfo {
    fn default() -> Self {
        SoftwareInfo {
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            generator: GENERATOR.into(),
            sort_schedule: "per_round".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedTable {
    #[serde(with = "seed_format")]
    pub master: u64,
    /// Per-trial seeds as `0x…` strings.
    pub trials: Vec<String>,
}

/// Execution settings that do not change results.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Treat partial connectivity as a failure.
    #[serde(default)]
    pub strict: bool,
}

/// Everything needed to rerun a sweep bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub software: SoftwareInfo,
    #[serde(default)]
    pub run: RunOptions,
    pub config: ExperimentConfig,
    pub seeds: SeedTable,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig, run: &RunOptions) -> Self {
        Manifest {
            software: SoftwareInfo::default(),
            run: run.clone(),
            config: config.clone(),
            seeds: SeedTable {
                master: config.master_seed,
                trials: (0..config.trials)
                    .map(|t| format!("{:#018x}", TrialSeeds::new(config.master_seed, t).trial))
                    .collect(),
            },
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("manifest: {e}")))
    }
}

/// Parse a config file: either a bare config with an optional `[run]` table,
/// or a run manifest.
pub fn parse_config(text: &str) -> Result<(ExperimentConfig, RunOptions)> {
    let bad = |e: toml::de::Error| Error::Config(e.to_string());
    let mut table: toml::Table = text.parse().map_err(bad)?;
    let (cfg, run): (ExperimentConfig, RunOptions) =
        if table.contains_key("config") && table.contains_key("software") {
            let m: Manifest = toml::from_str(text).map_err(bad)?;
            (m.config, m.run)
        } else {
            let run = match table.remove("run") {
                Some(v) => v.try_into().map_err(bad)?,
                None => RunOptions::default(),
            };
            (toml::Value::Table(table).try_into().map_err(bad)?, run)
        };
    cfg.validate()?;
    Ok((cfg, run))
}

pub fn load_config(path: &Path) -> Result<(ExperimentConfig, RunOptions)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_file(path: PathBuf, body: &[u8]) -> Result<()> {
    let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    f.write_all(body).map_err(|e| Error::io(&path, e))
}

/// Write the aggregate table and its header only.
pub fn aggregate_csv(config: &ExperimentConfig, out: &SweepOutput) -> String {
    let mut s = String::from(AGGREGATE_HEADER);
    s.push('\n');
    for a in &out.aggregates {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            config.scenario,
            a.n_c,
            a.sigma,
            a.k,
            a.route_label,
            a.algorithm,
            a.trials,
            a.mean_intra,
            a.sd_intra,
            a.mean_tobs,
            a.sd_tobs,
            a.mean_total,
            a.sd_total,
            opt(a.mean_hops),
            a.mean_error,
            a.sd_error,
            a.unreachable_rate,
        ));
    }
    s
}

/// Write every result table plus `manifest.toml` into `dir`.
/// Returns the paths written.
pub fn write_results(
    config: &ExperimentConfig,
    run: &RunOptions,
    out: &SweepOutput,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut emit = |name: &str, body: String| -> Result<()> {
        let p = dir.join(name);
        write_file(p.clone(), body.as_bytes())?;
        written.push(p);
        Ok(())
    };

    emit("aggregate.csv", aggregate_csv(config, out))?;

    let mut trials = format!("{TRIALS_HEADER}\n");
    let mut energy = format!("{ENERGY_HEADER}\n");
    for r in &out.results {
        let (ai, at, atot) = match r.analytic {
            Some(a) => (Some(a.intra), Some(a.to_bs), Some(a.total)),
            None => (None, None, None),
        };
        trials.push_str(&format!(
            "{},{},{:#018x},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            config.scenario,
            r.trial,
            r.seed,
            r.cell.algorithm,
            r.cell.n_c,
            r.realized_nc,
            r.cell.sigma,
            r.cell.k,
            r.route_label,
            opt(r.cell.range),
            r.energy.intra,
            r.energy.to_bs,
            r.energy.total,
            opt(ai),
            opt(at),
            opt(atot),
            opt(r.mean_hops),
            r.error,
            r.unreachable,
            u8::from(r.partial),
        ));
        energy.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.trial,
            r.realized_nc,
            r.cell.algorithm,
            r.route_label,
            r.energy.intra,
            r.energy.to_bs,
            r.energy.total
        ));
    }
    emit("trials.csv", trials)?;
    emit("energy.csv", energy)?;

    // Cluster sizes do not depend on sigma, K or route; take the first of each.
    let mut hist = format!("{HISTOGRAM_HEADER}\n");
    for &alg in &config.algorithms {
        for &n_c in &config.n_clusters {
            let sizes: Vec<usize> = out
                .results
                .iter()
                .filter(|r| {
                    r.cell.algorithm == alg
                        && r.cell.n_c == n_c
                        && r.cell.sigma == config.sigma[0]
                        && r.cell.k == config.k_budget[0]
                        && r.cell.route == 0
                })
                .flat_map(|r| r.cluster_sizes.iter().copied())
                .collect();
            if sizes.is_empty() {
                continue;
            }
            for b in cluster_size_histogram(&sizes, config.histogram_bin_width)? {
                hist.push_str(&format!("{alg},{n_c},{},{},{}\n", b.lo, b.hi, b.count));
            }
        }
    }
    emit("histogram.csv", hist)?;

    if let Some(rows) = &out.spectrum {
        let mut s = format!("{SPECTRUM_HEADER}\n");
        for r in rows {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.index, r.reading, r.coeff, r.sorted_reading, r.sorted_coeff
            ));
        }
        emit("spectrum.csv", s)?;
    }

    emit("manifest.toml", Manifest::new(config, run).to_toml()?)?;
    Ok(written)
}
