use crate::clustering::Algorithm;
use crate::deployment::AreaGeometry;
use crate::harness::config::{ExperimentConfig, RouteSpec};
use crate::routing::RoutingStrategy;
use crate::transform::SortMode;

const SWEEP: [usize; 5] = [10, 50, 100, 200, 300];
const BUDGETS: [usize; 5] = [50, 100, 200, 400, 800];

pub const SCENARIOS: &[&str] = &[
    "fig3",
    "fig4",
    "fig5",
    "fig6",
    "fig7",
    "fig8",
    "fig9",
    "fig10",
    "fig11",
    "fig12",
    "fig12_ascending",
    "fig12_unsorted",
    "fig13",
    "fig14",
];

fn square(name: &str) -> ExperimentConfig {
    ExperimentConfig {
        scenario: name.into(),
        geometry: AreaGeometry::Square { side: 100.0 },
        bs_li: Some(300.0),
        ..ExperimentConfig::default()
    }
}

fn disk(name: &str) -> ExperimentConfig {
    ExperimentConfig {
        scenario: name.into(),
        geometry: AreaGeometry::Disk { radius: 50.0 },
        bs_li: None,
        ..ExperimentConfig::default()
    }
}

/// Built-in experiment presets.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let both = vec![Algorithm::KMeans, Algorithm::Leach];
    let cfg = match name {
        "fig3" => ExperimentConfig {
            algorithms: both,
            n_clusters: vec![100],
            ..square(name)
        },
        "fig4" | "fig5" => ExperimentConfig {
            algorithms: both,
            n_clusters: SWEEP.to_vec(),
            ..square(name)
        },
        "fig6" => ExperimentConfig {
            algorithms: both,
            n_clusters: SWEEP.to_vec(),
            ..disk(name)
        },
        "fig7" => ExperimentConfig {
            algorithms: vec![Algorithm::Leach],
            n_clusters: SWEEP.to_vec(),
            routes: vec![
                RouteSpec::Direct,
                RouteSpec::Multihop {
                    ranges: vec![50.0, 30.0, 25.0, 22.0, 18.0],
                    strategy: RoutingStrategy::BfsMinHop,
                },
            ],
            ..disk(name)
        },
        "fig8" | "fig9" | "fig10" | "fig11" => ExperimentConfig {
            algorithms: vec![Algorithm::KMeans],
            n_clusters: vec![1],
            sort_mode: if matches!(name, "fig8" | "fig9") {
                SortMode::None
            } else {
                SortMode::Descending
            },
            spectrum: true,
            ..square(name)
        },
        "fig12" | "fig13" | "fig12_ascending" | "fig12_unsorted" => ExperimentConfig {
            algorithms: vec![Algorithm::Leach],
            n_clusters: SWEEP.to_vec(),
            k_budget: BUDGETS.to_vec(),
            sort_mode: match name {
                "fig12_ascending" => SortMode::Ascending,
                "fig12_unsorted" => SortMode::None,
                _ => SortMode::Descending,
            },
            ..square(name)
        },
        "fig14" => ExperimentConfig {
            algorithms: vec![Algorithm::Leach],
            n_clusters: vec![100],
            k_budget: BUDGETS.to_vec(),
            sigma: vec![0.0, 0.5, 2.0],
            ..square(name)
        },
        _ => return None,
    };
    Some(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_validate() {
        for name in SCENARIOS {
            let cfg = preset(name).unwrap();
            assert_eq!(cfg.scenario, *name);
            cfg.validate().unwrap();
        }
        assert!(preset("fig99").is_none());
    }
}
