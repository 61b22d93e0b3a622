use crate::clustering::{cluster, Algorithm, ClusterSet};
use crate::deployment::{deploy, AreaGeometry, Deployment};
use crate::energy::{
    e_d2_disk, e_d2_square, empirical_energy, EnergyReport, Route, UnreachablePolicy,
};
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, NoisePoint, RouteSpec, SignalSpec};
use crate::rng::{child_seed, SimRng};
use crate::routing::{build_routing_tree, hop_statistics, RoutingTree};
use crate::signals::{
    add_noise, check_trace_matches, load_trace_csv, sample_field, FieldModel, NoiseSpec, Readings,
};
use crate::transform::{
    allocate_budget, compress_cluster, normalized_error, reconstruct_cluster, CompressedPayload,
    SelectionMode,
};

/// Seeds for one trial. All of them derive from the master seed and the trial
/// index only, so every cell of a sweep sees the same deployment, field,
/// election draws and noise draws for a given trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeds {
    pub trial: u64,
    pub deploy: u64,
    pub field: u64,
    pub cluster: u64,
    pub noise: u64,
}

impl TrialSeeds {
    pub fn new(master: u64, trial: usize) -> Self {
        let t = child_seed(master, "trial", trial as u64);
        TrialSeeds {
            trial: t,
            deploy: child_seed(t, "deploy", 0),
            field: child_seed(t, "field", 0),
            cluster: child_seed(t, "cluster", 0),
            noise: child_seed(t, "noise", 0),
        }
    }
}

/// One point of the sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub algorithm: Algorithm,
    pub n_c: usize,
    pub sigma: f64,
    pub k: usize,
    pub route: usize,
    /// Multi-hop range for this cluster count, if the route is multi-hop.
    pub range: Option<f64>,
}

/// Closed-form counterparts of a trial's energy, evaluated at the nominal
/// cluster count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticEnergy {
    pub intra: f64,
    pub to_bs: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub cell: Cell,
    pub route_label: &'static str,
    pub trial: usize,
    pub seed: u64,
    pub realized_nc: usize,
    pub cluster_sizes: Vec<usize>,
    pub coefficients: Vec<usize>,
    pub energy: EnergyReport,
    /// Present exactly when the energy model has closed forms.
    pub analytic: Option<AnalyticEnergy>,
    pub mean_hops: Option<f64>,
    pub error: f64,
    pub unreachable: usize,
    /// Some heads were cut off and left out of the relay cost.
    pub partial: bool,
}

/// Clean-signal source resolved once per sweep.
#[derive(Debug, Clone)]
pub(crate) enum PreparedSignal {
    Generated(SignalSpec),
    Fixed(Readings),
}

impl PreparedSignal {
    pub(crate) fn new(config: &ExperimentConfig) -> Result<Self> {
        match &config.signal {
            SignalSpec::Trace { path, epoch } => {
                let readings = load_trace_csv(path, *epoch)?;
                check_trace_matches(&readings, config.n_nodes)?;
                Ok(PreparedSignal::Fixed(readings))
            }
            other => Ok(PreparedSignal::Generated(other.clone())),
        }
    }

    pub(crate) fn readings(
        &self,
        geometry: &AreaGeometry,
        dep: &Deployment,
        field_seed: u64,
    ) -> Result<Readings> {
        let model = match self {
            PreparedSignal::Fixed(r) => return Ok(r.clone()),
            PreparedSignal::Generated(SignalSpec::RandomBumps {
                count,
                width_frac,
                amp_min,
                amp_max,
            }) => FieldModel::random_bumps(
                geometry,
                *count,
                width_frac * geometry.extent(),
                *amp_min,
                *amp_max,
                field_seed,
            )?,
            PreparedSignal::Generated(SignalSpec::Fourier {
                cutoff,
                amplitude,
                offset,
            }) => FieldModel::LowFreqFourier {
                cutoff: *cutoff,
                amplitude: *amplitude,
                offset: *offset,
                seed: field_seed,
            },
            PreparedSignal::Generated(SignalSpec::Field { model }) => model.clone(),
            PreparedSignal::Generated(SignalSpec::Trace { .. }) => {
                unreachable!("traces are loaded up front")
            }
        };
        sample_field(&model, dep)
    }
}

pub(crate) struct Reconstruction {
    pub coefficients: Vec<usize>,
    pub error: f64,
}

/// Everything shared by the cells of one (algorithm, cluster count, trial)
/// group: deployment, clean readings and clustering.
pub struct TrialContext<'a> {
    config: &'a ExperimentConfig,
    pub seeds: TrialSeeds,
    pub trial: usize,
    pub algorithm: Algorithm,
    pub n_c_index: usize,
    pub dep: Deployment,
    pub clean: Vec<f64>,
    pub clusters: ClusterSet,
}

impl<'a> TrialContext<'a> {
    pub(crate) fn new(
        config: &'a ExperimentConfig,
        signal: &PreparedSignal,
        algorithm: Algorithm,
        n_c_index: usize,
        trial: usize,
    ) -> Result<Self> {
        let seeds = TrialSeeds::new(config.master_seed, trial);
        let dep = deploy(config.geometry, config.n_nodes, config.bs_li, seeds.deploy)?;
        let clean: Vec<f64> = signal
            .readings(&config.geometry, &dep, seeds.field)?
            .into_iter()
            .map(|r| r.1)
            .collect();
        let n_c = config.n_clusters[n_c_index];
        let clusters = cluster(&dep, algorithm, n_c, seeds.cluster, config.kmeans_max_iters)?;
        Ok(TrialContext {
            config,
            seeds,
            trial,
            algorithm,
            n_c_index,
            dep,
            clean,
            clusters,
        })
    }

    /// Build the shared state for one trial at the `n_c`-th cluster count.
    pub fn prepare(
        config: &'a ExperimentConfig,
        algorithm: Algorithm,
        n_c: usize,
        trial: usize,
    ) -> Result<Self> {
        config.validate()?;
        let n_c_index = config
            .n_clusters
            .iter()
            .position(|&c| c == n_c)
            .ok_or_else(|| Error::Config(format!("cluster count {n_c} is not in the config")))?;
        let signal = PreparedSignal::new(config)?;
        TrialContext::new(config, &signal, algorithm, n_c_index, trial)
    }

    /// Per-cluster budgets and payloads; clusters with no budget send nothing.
    pub fn compress(
        &self,
        sigma: f64,
        k: usize,
    ) -> Result<(Vec<usize>, Vec<Option<CompressedPayload>>)> {
        let cfg = self.config;
        let coefficients = allocate_budget(&self.clusters.sizes(), k)?;
        let observed: Vec<f64> = match cfg.noise_point {
            NoisePoint::Readings => {
                let indexed: Readings = self.clean.iter().copied().enumerate().collect();
                add_noise(&indexed, &NoiseSpec::new(sigma, self.seeds.noise)?)
                    .into_iter()
                    .map(|r| r.1)
                    .collect()
            }
            NoisePoint::Coefficients => self.clean.clone(),
        };
        let mut payloads = Vec::with_capacity(coefficients.len());
        for (ci, (c, &ki)) in self.clusters.clusters.iter().zip(&coefficients).enumerate() {
            if ki == 0 {
                payloads.push(None);
                continue;
            }
            let readings: Readings = c.members.iter().map(|&id| (id, observed[id])).collect();
            let mut payload = compress_cluster(&readings, ki, cfg.sort_mode, cfg.selection_mode)?;
            if cfg.noise_point == NoisePoint::Coefficients && sigma > 0.0 {
                let mut rng = SimRng::child(self.seeds.noise, "channel", ci as u64);
                for kept in &mut payload.kept {
                    kept.1 += sigma * rng.standard_normal();
                }
            }
            payloads.push(Some(payload));
        }
        Ok((coefficients, payloads))
    }

    pub(crate) fn reconstruct(&self, sigma: f64, k: usize) -> Result<Reconstruction> {
        let (coefficients, payloads) = self.compress(sigma, k)?;
        let mut estimate = vec![0.0; self.clean.len()];
        for payload in payloads.iter().flatten() {
            for (id, v) in reconstruct_cluster(payload)? {
                estimate[id] = v;
            }
        }
        let error = normalized_error(&self.clean, &estimate)?;
        Ok(Reconstruction {
            coefficients,
            error,
        })
    }

    pub fn routing_tree(&self, route: &RouteSpec) -> Result<Option<RoutingTree>> {
        match route {
            RouteSpec::Direct => Ok(None),
            RouteSpec::Multihop { ranges, strategy } => {
                let heads: Vec<_> = self
                    .clusters
                    .heads()
                    .into_iter()
                    .map(|h| (h, self.dep.position(h)))
                    .collect();
                build_routing_tree(&heads, self.dep.bs, ranges[self.n_c_index], *strategy).map(Some)
            }
        }
    }

    pub(crate) fn evaluate(
        &self,
        sigma: f64,
        k: usize,
        route_index: usize,
        recon: &Reconstruction,
        tree: Option<&RoutingTree>,
    ) -> Result<TrialResult> {
        let cfg = self.config;
        let route_spec = &cfg.routes[route_index];
        let n_c = cfg.n_clusters[self.n_c_index];
        let scalars_per_coeff =
            if cfg.charge_indices && cfg.selection_mode == SelectionMode::TopKMagnitude {
                2
            } else {
                1
            };
        let payload_sizes: Vec<usize> = recon
            .coefficients
            .iter()
            .map(|k| k * scalars_per_coeff)
            .collect();
        let route = match tree {
            Some(t) => Route::Multihop(t),
            None => Route::Direct,
        };
        let policy = if cfg.fallback_direct {
            UnreachablePolicy::FallbackDirect
        } else {
            UnreachablePolicy::Fail
        };
        let (energy, partial) = match empirical_energy(
            &self.dep,
            &self.clusters,
            &payload_sizes,
            route,
            &cfg.energy,
            policy,
        ) {
            Ok(r) => (r, false),
            Err(Error::Unreachable { .. }) => (
                empirical_energy(
                    &self.dep,
                    &self.clusters,
                    &payload_sizes,
                    route,
                    &cfg.energy,
                    UnreachablePolicy::Exclude,
                )?,
                true,
            ),
            Err(e) => return Err(e),
        };
        let unreachable = tree.map_or(0, |t| {
            self.clusters
                .heads()
                .iter()
                .filter(|h| t.unreachable.binary_search(h).is_ok())
                .count()
        });
        let mean_hops = match tree {
            Some(t) => match hop_statistics(t) {
                Ok((h, _)) => Some(h),
                Err(Error::NoStatistics) => None,
                Err(e) => return Err(e),
            },
            None => None,
        };
        let range = match route_spec {
            RouteSpec::Multihop { ranges, .. } => Some(ranges[self.n_c_index]),
            RouteSpec::Direct => None,
        };
        let analytic = if cfg.energy.has_closed_forms() {
            Some(self.analytic(n_c, k * scalars_per_coeff, mean_hops, range)?)
        } else {
            None
        };
        Ok(TrialResult {
            cell: Cell {
                algorithm: self.algorithm,
                n_c,
                sigma,
                k,
                route: route_index,
                range,
            },
            route_label: route_spec.label(),
            trial: self.trial,
            seed: self.seeds.trial,
            realized_nc: self.clusters.len(),
            cluster_sizes: self.clusters.sizes(),
            coefficients: recon.coefficients.clone(),
            energy,
            analytic,
            mean_hops,
            error: recon.error,
            unreachable,
            partial,
        })
    }

    fn analytic(
        &self,
        n_c: usize,
        k: usize,
        mean_hops: Option<f64>,
        range: Option<f64>,
    ) -> Result<AnalyticEnergy> {
        let cfg = self.config;
        let model = &cfg.energy;
        let n = cfg.n_nodes;
        let intra = match cfg.geometry {
            AreaGeometry::Square { side } => model.intra_square(n, n_c, side)?,
            AreaGeometry::Disk { radius } => model.intra_disk(n, n_c, radius)?,
        };
        let to_bs = match range {
            Some(r) => match mean_hops {
                Some(h) => model.to_bs_multihop(h, r, k)?,
                None => f64::NAN,
            },
            None => {
                let d2 = match cfg.geometry {
                    AreaGeometry::Square { side } => e_d2_square(side, cfg.bs_li.unwrap_or(0.0))?,
                    AreaGeometry::Disk { radius } => e_d2_disk(radius)?,
                };
                k as f64 * d2
            }
        };
        Ok(AnalyticEnergy {
            intra,
            to_bs,
            total: intra + to_bs,
        })
    }
}

/// Run a single cell of the grid for one trial.
pub fn run_trial(config: &ExperimentConfig, cell: &Cell, trial: usize) -> Result<TrialResult> {
    config.validate()?;
    let n_c_index = config
        .n_clusters
        .iter()
        .position(|&c| c == cell.n_c)
        .ok_or_else(|| Error::Config(format!("cluster count {} is not in the config", cell.n_c)))?;
    if cell.route >= config.routes.len() {
        return Err(Error::Config(format!(
            "route index {} out of range",
            cell.route
        )));
    }
    if cell.k == 0 || cell.k > config.n_nodes {
        return Err(Error::Config(format!(
            "budget {} must lie in 1..={}",
            cell.k, config.n_nodes
        )));
    }
    let signal = PreparedSignal::new(config)?;
    let ctx = TrialContext::new(config, &signal, cell.algorithm, n_c_index, trial)?;
    let recon = ctx.reconstruct(cell.sigma, cell.k)?;
    let tree = ctx.routing_tree(&config.routes[cell.route])?;
    ctx.evaluate(cell.sigma, cell.k, cell.route, &recon, tree.as_ref())
}
