use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::clustering::Algorithm;
use crate::deployment::AreaGeometry;
use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::routing::RoutingStrategy;
use crate::signals::FieldModel;
use crate::transform::{SelectionMode, SortMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RouteSpec {
    Direct,
    /// Multi-hop relaying; `ranges[i]` is the head range used with the
    /// `i`-th entry of the cluster-count list.
    Multihop {
        ranges: Vec<f64>,
        strategy: RoutingStrategy,
    },
}

impl RouteSpec {
    pub fn label(&self) -> &'static str {
        match self {
            RouteSpec::Direct => "direct",
            RouteSpec::Multihop { .. } => "multihop",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalSpec {
    /// A fresh Gaussian-bump field per trial; width is a fraction of the
    /// area's extent.
    RandomBumps {
        count: usize,
        width_frac: f64,
        amp_min: f64,
        amp_max: f64,
    },
    /// A low-frequency cosine field with per-trial phases.
    Fourier {
        cutoff: usize,
        amplitude: f64,
        offset: f64,
    },
    /// One fixed field for every trial.
    Field { model: FieldModel },
    /// Readings from a `node_id,epoch,value` CSV trace.
    Trace { path: PathBuf, epoch: u64 },
}

impl Default for SignalSpec {
    fn default() -> Self {
        SignalSpec::RandomBumps {
            count: 5,
            width_frac: 0.25,
            amp_min: 10.0,
            amp_max: 30.0,
        }
    }
}

/// Where noise enters the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisePoint {
    /// Measurement noise on readings before compression.
    Readings,
    /// Channel noise on the kept coefficients.
    Coefficients,
}

/// Full description of a sweep. Serialises to the `[config]` section of the
/// run manifest, and a manifest is accepted back as a config file. Omitted
/// keys take their default values, except `bs_li`, which stays unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    #[serde(with = "seed_format")]
    pub master_seed: u64,
    pub trials: usize,
    pub n_nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_li: Option<f64>,
    pub algorithms: Vec<Algorithm>,
    pub n_clusters: Vec<usize>,
    pub k_budget: Vec<usize>,
    pub sigma: Vec<f64>,
    pub sort_mode: SortMode,
    pub selection_mode: SelectionMode,
    pub noise_point: NoisePoint,
    /// Charge unreachable heads one direct hop instead of marking the trial partial.
    pub fallback_direct: bool,
    /// Charge one extra scalar per kept coefficient index under magnitude selection.
    pub charge_indices: bool,
    pub kmeans_max_iters: usize,
    pub histogram_bin_width: usize,
    /// Also emit the whole-network DCT spectrum of trial 0.
    pub spectrum: bool,
    pub geometry: AreaGeometry,
    pub energy: EnergyModel,
    pub signal: SignalSpec,
    pub routes: Vec<RouteSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: "custom".into(),
            master_seed: 1,
            trials: 20,
            n_nodes: 2000,
            bs_li: Some(300.0),
            algorithms: vec![Algorithm::Leach],
            n_clusters: vec![10, 50, 100, 200, 300],
            k_budget: vec![200],
            sigma: vec![0.0],
            sort_mode: SortMode::Descending,
            selection_mode: SelectionMode::TopKMagnitude,
            noise_point: NoisePoint::Readings,
            fallback_direct: false,
            charge_indices: false,
            kmeans_max_iters: 100,
            histogram_bin_width: 5,
            spectrum: false,
            geometry: AreaGeometry::Square { side: 100.0 },
            energy: EnergyModel::default(),
            signal: SignalSpec::default(),
            routes: vec![RouteSpec::Direct],
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(config_err("trials must be at least 1"));
        }
        if self.n_nodes == 0 {
            return Err(config_err("n_nodes must be at least 1"));
        }
        self.geometry
            .validate()
            .map_err(|e| config_err(e.to_string()))?;
        match (self.geometry, self.bs_li) {
            (AreaGeometry::Square { .. }, None) => {
                return Err(config_err("square areas need bs_li"))
            }
            (AreaGeometry::Disk { .. }, Some(_)) => {
                return Err(config_err(
                    "disk areas put the BS at the centre; remove bs_li",
                ))
            }
            (_, Some(li)) if !(li.is_finite() && li >= 0.0) => {
                return Err(config_err("bs_li must be finite and non-negative"))
            }
            _ => {}
        }
        if self.algorithms.is_empty() {
            return Err(config_err("algorithms must not be empty"));
        }
        if self.n_clusters.is_empty() || self.n_clusters.iter().any(|&c| c == 0 || c > self.n_nodes)
        {
            return Err(config_err(format!(
                "n_clusters must be a non-empty list of values in 1..={}",
                self.n_nodes
            )));
        }
        if self.k_budget.is_empty() || self.k_budget.iter().any(|&k| k == 0 || k > self.n_nodes) {
            return Err(config_err(format!(
                "k_budget must be a non-empty list of values in 1..={}",
                self.n_nodes
            )));
        }
        if self.sigma.is_empty() || self.sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(config_err(
                "sigma must be a non-empty list of non-negative values",
            ));
        }
        if self.routes.is_empty() {
            return Err(config_err("routes must not be empty"));
        }
        for r in &self.routes {
            if let RouteSpec::Multihop { ranges, .. } = r {
                if ranges.len() != self.n_clusters.len() {
                    return Err(config_err(format!(
                        "multihop needs one range per cluster count ({} ranges, {} counts)",
                        ranges.len(),
                        self.n_clusters.len()
                    )));
                }
                if ranges.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                    return Err(config_err("multihop ranges must be positive"));
                }
            }
        }
        if self.histogram_bin_width == 0 {
            return Err(config_err("histogram_bin_width must be at least 1"));
        }
        if self.kmeans_max_iters == 0 {
            return Err(config_err("kmeans_max_iters must be at least 1"));
        }
        match &self.signal {
            SignalSpec::RandomBumps {
                width_frac,
                amp_min,
                amp_max,
                ..
            } => {
                if !(width_frac.is_finite() && *width_frac > 0.0 && amp_min <= amp_max) {
                    return Err(config_err(
                        "random_bumps needs width_frac > 0 and amp_min <= amp_max",
                    ));
                }
            }
            SignalSpec::Fourier {
                amplitude, offset, ..
            } => {
                if !(amplitude.is_finite() && offset.is_finite()) {
                    return Err(config_err("fourier parameters must be finite"));
                }
            }
            SignalSpec::Field { .. } | SignalSpec::Trace { .. } => {}
        }
        Ok(())
    }
}

/// Seeds are written as TOML integers when they fit, and as `0x…` strings
/// otherwise. Both forms are accepted on input.
pub(crate) mod seed_format {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&format!("{seed:#018x}")),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Str(String),
    }

    pub fn parse(text: &str) -> Option<u64> {
        let t = text.trim();
        match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(hex, 16).ok(),
            None => t.parse().ok(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Int(v) => {
                u64::try_from(v).map_err(|_| de::Error::custom("seed must be non-negative"))
            }
            Raw::Str(s) => parse(&s).ok_or_else(|| de::Error::custom(format!("bad seed {s:?}"))),
        }
    }
}
