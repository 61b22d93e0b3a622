//! Experiment sweeps, presets and result files.

pub mod config;
pub mod output;
pub mod scenarios;
pub mod sweep;
pub mod trial;

pub use config::{ExperimentConfig, NoisePoint, RouteSpec, SignalSpec};
pub use output::{
    load_config, parse_config, write_results, Manifest, RunOptions, AGGREGATE_HEADER,
};
pub use scenarios::{preset, SCENARIOS};
pub use sweep::{aggregate, mean_sd, run_sweep, Aggregate, SpectrumRow, SweepOutput};
pub use trial::{run_trial, AnalyticEnergy, Cell, TrialContext, TrialResult, TrialSeeds};
