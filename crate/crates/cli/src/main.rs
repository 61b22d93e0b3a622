use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wsndct::energy::{e_d2_disk, e_d2_square, EnergyModel, MultihopCost};
use wsndct::harness::{self, ExperimentConfig, RouteSpec, RunOptions, TrialContext};
use wsndct::routing::{build_routing_tree, expected_hops_chandler, HopCdf, RoutingStrategy};
use wsndct::transform::write_payload_csv;
use wsndct::{Algorithm, Error};

const OUT_ENV: &str = "WSNDCT_OUT";

#[derive(Parser)]
#[command(
    name = "wsndct",
    version,
    about = "Clustered sensor-network DCT compression simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset scenario or a TOML config and write result tables.
    Run(RunArgs),
    /// Evaluate a closed-form energy formula and print CSV.
    Analytic(AnalyticArgs),
    /// Export one pipeline stage of a single trial as CSV.
    Inspect(InspectArgs),
    /// List the preset scenarios.
    List,
}

#[derive(Args)]
struct Target {
    /// Scenario name or path to a config/manifest file.
    target: String,
    /// Master seed (decimal or 0x-prefixed hex).
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
    /// Trials per cell
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    target: Target,
    /// Output directory [default: $WSNDCT_OUT/<scenario>, else results/<scenario>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread cap [default: available cores].
    #[arg(long)]
    threads: Option<usize>,
    /// Exit with status 4 if any trial had unreachable cluster heads.
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Formula {
    IntraSquare,
    IntraDisk,
    #[value(name = "e_d2_square")]
    ED2Square,
    #[value(name = "e_d2_disk")]
    ED2Disk,
    TotalDirectSquare,
    TotalDirectDisk,
    ToBsMultihop,
    TotalMultihop,
    Chandler,
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(long, value_enum)]
    formula: Formula,
    /// Number of sensors.
    #[arg(short = 'n')]
    n: Option<usize>,
    /// Number of clusters.
    #[arg(long = "nc")]
    nc: Option<usize>,
    /// Square side.
    #[arg(short = 'L')]
    side: Option<f64>,
    /// Distance from the square's near edge to the BS.
    #[arg(long = "Li")]
    li: Option<f64>,
    /// Disk radius.
    #[arg(long = "R0")]
    r0: Option<f64>,
    /// Coefficient budget.
    #[arg(short = 'K')]
    k: Option<usize>,
    /// Expected hop count.
    #[arg(long)]
    hops: Option<f64>,
    /// Transmission range.
    #[arg(short = 'R')]
    range: Option<f64>,
    /// Intra-cluster cost, instead of deriving it from the area.
    #[arg(long)]
    intra: Option<f64>,
    /// Comma-separated hop CDF P_1,...,P_max.
    #[arg(long, value_delimiter = ',')]
    cdf: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2)]
    alpha: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum Stage {
    Deploy,
    Cluster,
    Compress,
    Route,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(value_enum)]
    stage: Stage,
    #[command(flatten)]
    target: Target,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    trial: usize,
    /// Cluster count [default: first in the config].
    #[arg(long = "nc")]
    nc: Option<usize>,
    /// Clustering algorithm [default: first in the config].
    #[arg(long, value_parser = parse_algorithm)]
    algorithm: Option<Algorithm>,
    /// Coefficient budget [default: first in the config].
    #[arg(short = 'K')]
    k: Option<usize>,
    /// Noise level [default: first in the config].
    #[arg(long)]
    sigma: Option<f64>,
    /// Multi-hop range [default: the config's multi-hop range for this cluster count].
    #[arg(short = 'R')]
    range: Option<f64>,
}

enum Failure {
    Config(String),
    Runtime(String),
    Partial(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
            Failure::Partial(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Runtime(m) | Failure::Partial(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn config_failure(e: Error) -> Failure {
    Failure::Config(e.to_string())
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let t = s.trim();
    match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    }
    .map_err(|e| format!("bad seed {s:?}: {e}"))
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    match s.to_ascii_lowercase().as_str() {
        "kmeans" | "k-means" => Ok(Algorithm::KMeans),
        "leach" => Ok(Algorithm::Leach),
        _ => Err(format!("unknown algorithm {s:?} (kmeans, leach)")),
    }
}

fn load_target(t: &Target) -> Result<(ExperimentConfig, RunOptions), Failure> {
    let (mut cfg, run) = match harness::preset(&t.target) {
        Some(cfg) => (cfg, RunOptions::default()),
        None => {
            let path = Path::new(&t.target);
            if !path.is_file() {
                return Err(Failure::Config(format!(
                    "unknown scenario {:?}; available: {}",
                    t.target,
                    harness::SCENARIOS.join(", ")
                )));
            }
            harness::load_config(path).map_err(config_failure)?
        }
    };
    if let Some(seed) = t.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = t.trials {
        cfg.trials = trials;
    }
    cfg.validate().map_err(config_failure)?;
    Ok((cfg, run))
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let (cfg, mut run) = load_target(&args.target)?;
    if args.threads.is_some() {
        run.threads = args.threads;
    }
    if args.out.is_some() {
        run.out = args.out;
    }
    run.strict |= args.strict;
    if run.threads == Some(0) {
        return Err(Failure::Config("--threads must be at least 1".into()));
    }
    let out_dir = run
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(|d| PathBuf::from(d).join(&cfg.scenario)))
        .unwrap_or_else(|| Path::new("results").join(&cfg.scenario));

    let output = harness::run_sweep(&cfg, run.threads)?;
    let written = harness::write_results(&cfg, &run, &output, &out_dir)?;
    for p in &written {
        eprintln!("wrote {}", p.display());
    }
    let partial = output.results.iter().filter(|r| r.partial).count();
    if partial > 0 {
        let msg = format!(
            "{partial} of {} trial results had unreachable cluster heads; their relay cost is excluded",
            output.results.len()
        );
        if run.strict {
            return Err(Failure::Partial(msg));
        }
        eprintln!("warning: {msg}");
    }
    Ok(())
}

fn need<T>(v: Option<T>, flag: &str, formula: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Config(format!("formula {formula} needs {flag}")))
}

fn fmt_row(cells: &[(&str, String)]) -> String {
    let header: Vec<&str> = cells.iter().map(|c| c.0).collect();
    let values: Vec<&str> = cells.iter().map(|c| c.1.as_str()).collect();
    format!("{}\n{}\n", header.join(","), values.join(","))
}

fn show(v: impl Display) -> String {
    v.to_string()
}

fn cmd_analytic(a: AnalyticArgs) -> Result<String, Failure> {
    let name = a
        .formula
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string();
    let model = EnergyModel::new(a.alpha, MultihopCost::FixedRange).map_err(config_failure)?;
    let f = name.as_str();
    if !matches!(a.formula, Formula::Chandler) && !model.has_closed_forms() {
        return Err(config_failure(Error::UnsupportedModel(format!(
            "{f} has a closed form only for alpha = 2, got {}",
            a.alpha
        ))));
    }
    let mut cells: Vec<(&str, String)> = vec![("formula", name.clone())];
    let value = match a.formula {
        Formula::IntraSquare => {
            let (n, nc, l) = (
                need(a.n, "-n", f)?,
                need(a.nc, "--nc", f)?,
                need(a.side, "-L", f)?,
            );
            cells.extend([("n", show(n)), ("nc", show(nc)), ("L", show(l))]);
            model.intra_square(n, nc, l)
        }
        Formula::IntraDisk => {
            let (n, nc, r0) = (
                need(a.n, "-n", f)?,
                need(a.nc, "--nc", f)?,
                need(a.r0, "--R0", f)?,
            );
            cells.extend([("n", show(n)), ("nc", show(nc)), ("R0", show(r0))]);
            model.intra_disk(n, nc, r0)
        }
        Formula::ED2Square => {
            let (l, li) = (need(a.side, "-L", f)?, need(a.li, "--Li", f)?);
            cells.extend([("L", show(l)), ("Li", show(li))]);
            e_d2_square(l, li)
        }
        Formula::ED2Disk => {
            let r0 = need(a.r0, "--R0", f)?;
            cells.push(("R0", show(r0)));
            e_d2_disk(r0)
        }
        Formula::TotalDirectSquare => {
            let (n, nc, l, li, k) = (
                need(a.n, "-n", f)?,
                need(a.nc, "--nc", f)?,
                need(a.side, "-L", f)?,
                need(a.li, "--Li", f)?,
                need(a.k, "-K", f)?,
            );
            cells.extend([
                ("n", show(n)),
                ("nc", show(nc)),
                ("L", show(l)),
                ("Li", show(li)),
                ("K", show(k)),
            ]);
            model.total_direct_square(n, nc, l, li, k)
        }
        Formula::TotalDirectDisk => {
            let (n, nc, r0, k) = (
                need(a.n, "-n", f)?,
                need(a.nc, "--nc", f)?,
                need(a.r0, "--R0", f)?,
                need(a.k, "-K", f)?,
            );
            cells.extend([
                ("n", show(n)),
                ("nc", show(nc)),
                ("R0", show(r0)),
                ("K", show(k)),
            ]);
            model.total_direct_disk(n, nc, r0, k)
        }
        Formula::ToBsMultihop => {
            let (h, r, k) = (
                need(a.hops, "--hops", f)?,
                need(a.range, "-R", f)?,
                need(a.k, "-K", f)?,
            );
            cells.extend([("hops", show(h)), ("R", show(r)), ("K", show(k))]);
            model.to_bs_multihop(h, r, k)
        }
        Formula::TotalMultihop => {
            let (h, r, k) = (
                need(a.hops, "--hops", f)?,
                need(a.range, "-R", f)?,
                need(a.k, "-K", f)?,
            );
            let intra = match (a.intra, a.side, a.r0) {
                (Some(v), _, _) => v,
                (None, Some(l), _) => model
                    .intra_square(need(a.n, "-n", f)?, need(a.nc, "--nc", f)?, l)
                    .map_err(config_failure)?,
                (None, None, Some(r0)) => model
                    .intra_disk(need(a.n, "-n", f)?, need(a.nc, "--nc", f)?, r0)
                    .map_err(config_failure)?,
                _ => {
                    return Err(Failure::Config(format!(
                        "formula {f} needs --intra, -L or --R0"
                    )))
                }
            };
            cells.extend([
                ("intra", show(intra)),
                ("hops", show(h)),
                ("R", show(r)),
                ("K", show(k)),
            ]);
            model.total_multihop(intra, h, r, k)
        }
        Formula::Chandler => {
            let cdf = need(a.cdf, "--cdf", f)?;
            let joined: Vec<String> = cdf.iter().map(|p| p.to_string()).collect();
            cells.push(("cdf", format!("\"{}\"", joined.join(","))));
            HopCdf::new(cdf).and_then(|c| expected_hops_chandler(&c))
        }
    }
    .map_err(config_failure)?;
    cells.push(("value", show(value)));
    Ok(fmt_row(&cells))
}

fn cmd_inspect(a: InspectArgs) -> Result<(), Failure> {
    let (cfg, _) = load_target(&a.target)?;
    let n_c = a.nc.unwrap_or(cfg.n_clusters[0]);
    let algorithm = a.algorithm.unwrap_or(cfg.algorithms[0]);
    let mut cfg = cfg;
    let n_c_index = match cfg.n_clusters.iter().position(|&c| c == n_c) {
        Some(i) => i,
        None => {
            if n_c == 0 || n_c > cfg.n_nodes {
                return Err(Failure::Config(format!(
                    "--nc must lie in 1..={}",
                    cfg.n_nodes
                )));
            }
            cfg.n_clusters = vec![n_c];
            cfg.routes.retain(|r| matches!(r, RouteSpec::Direct));
            if cfg.routes.is_empty() {
                cfg.routes.push(RouteSpec::Direct);
            }
            0
        }
    };
    let ctx = TrialContext::prepare(&cfg, algorithm, n_c, a.trial)?;

    let mut buf = Vec::new();
    let io_fail = |e: io::Error| Failure::Runtime(e.to_string());
    match a.stage {
        Stage::Deploy => ctx.dep.write_csv(&mut buf).map_err(io_fail)?,
        Stage::Cluster => ctx
            .clusters
            .write_csv(ctx.dep.len(), &mut buf)
            .map_err(io_fail)?,
        Stage::Compress => {
            let k = a.k.unwrap_or(cfg.k_budget[0]);
            if k == 0 || k > cfg.n_nodes {
                return Err(Failure::Config(format!(
                    "-K must lie in 1..={}",
                    cfg.n_nodes
                )));
            }
            let sigma = a.sigma.unwrap_or(cfg.sigma[0]);
            let (_, payloads) = ctx.compress(sigma, k)?;
            let rows = payloads
                .iter()
                .enumerate()
                .filter_map(|(i, p)| p.as_ref().map(|p| (i, p)));
            write_payload_csv(rows, &mut buf).map_err(io_fail)?;
        }
        Stage::Route => {
            let (range, strategy) = match a.range {
                Some(r) => {
                    let strategy = cfg
                        .routes
                        .iter()
                        .find_map(|r| match r {
                            RouteSpec::Multihop { strategy, .. } => Some(*strategy),
                            RouteSpec::Direct => None,
                        })
                        .unwrap_or(RoutingStrategy::BfsMinHop);
                    (r, strategy)
                }
                None => cfg
                    .routes
                    .iter()
                    .find_map(|r| match r {
                        RouteSpec::Multihop { ranges, strategy } => {
                            Some((ranges[n_c_index], *strategy))
                        }
                        RouteSpec::Direct => None,
                    })
                    .ok_or_else(|| {
                        Failure::Config("config has no multi-hop route; pass -R".into())
                    })?,
            };
            let heads: Vec<_> = ctx
                .clusters
                .heads()
                .into_iter()
                .map(|h| (h, ctx.dep.position(h)))
                .collect();
            build_routing_tree(&heads, ctx.dep.bs, range, strategy)?
                .write_csv(&mut buf)
                .map_err(io_fail)?;
        }
    }
    match a.out {
        Some(path) => {
            fs::write(&path, &buf).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
        }
        None => io::stdout().write_all(&buf).map_err(io_fail),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Analytic(args) => cmd_analytic(args).map(|csv| print!("{csv}")),
        Command::Inspect(args) => cmd_inspect(args),
        Command::List => {
            for name in harness::SCENARIOS {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
