//! Transmission cost, closed-form and measured.
//!
//! The cost unit is one scalar sent over one link of length `d`, which costs
//! `d^α`. Only the distance-dependent amplifier term is modelled; radio
//! electronics and reception are free. Absolute values are therefore in
//! distance^α units, not joules.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::clustering::ClusterSet;
use crate::deployment::{squared_distance, Deployment, NodeId};
use crate::error::{Error, Result};
use crate::routing::RoutingTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultihopCost {
    /// Every hop is charged at the full range `R`.
    FixedRange,
    /// Every hop is charged at its actual link length.
    ActualDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct EnergyModel {
    alpha: u32,
    pub multihop_cost: MultihopCost,
}

#[derive(Deserialize)]
struct RawModel {
    alpha: u32,
    multihop_cost: MultihopCost,
}

impl TryFrom<RawModel> for EnergyModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        EnergyModel::new(raw.alpha, raw.multihop_cost)
    }
}

impl Default for EnergyModel {
    fn default() -> Self {
        EnergyModel {
            alpha: 2,
            multihop_cost: MultihopCost::FixedRange,
        }
    }
}

/// `(d²)^(α/2)`
fn link_cost(d2: f64, alpha: u32) -> f64 {
    if alpha == 2 {
        d2
    } else {
        d2.powi(alpha as i32 / 2)
    }
}

fn check_counts(n: usize, n_c: usize) -> Result<()> {
    if n_c == 0 || n_c > n {
        return Err(Error::invalid_arg(format!(
            "need 1 <= n_c <= n, got n = {n}, n_c = {n_c}"
        )));
    }
    Ok(())
}

fn check_length(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::invalid_arg(format!(
            "{name} must be positive, got {v}"
        )));
    }
    Ok(())
}

impl EnergyModel {
    pub fn new(alpha: u32, multihop_cost: MultihopCost) -> Result<Self> {
        if alpha != 2 && alpha != 4 {
            return Err(Error::invalid_arg(format!(
                "path-loss exponent must be 2 or 4, got {alpha}"
            )));
        }
        Ok(EnergyModel {
            alpha,
            multihop_cost,
        })
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn has_closed_forms(&self) -> bool {
        self.alpha == 2
    }

    fn require_closed_form(&self) -> Result<()> {
        if self.alpha != 2 {
            return Err(Error::UnsupportedModel(format!(
                "closed-form costs assume alpha = 2, model has alpha = {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Intra-cluster cost in an `L × L` square, idealising each cluster as a
    /// disk of area `L²/n_c` with the head at its centre:
    /// `(n/n_c − 1)·L²/(2π)`.
    pub fn intra_square(&self, n: usize, n_c: usize, side: f64) -> Result<f64> {
        self.require_closed_form()?;
        check_counts(n, n_c)?;
        check_length("L", side)?;
        Ok((n as f64 / n_c as f64 - 1.0) * side * side / (2.0 * PI))
    }

    /// Intra-cluster cost in a disk of radius `R₀`: `(n/n_c − 1)·R₀²/2`.
    pub fn intra_disk(&self, n: usize, n_c: usize, radius: f64) -> Result<f64> {
        self.require_closed_form()?;
        check_counts(n, n_c)?;
        check_length("R0", radius)?;
        Ok((n as f64 / n_c as f64 - 1.0) * radius * radius / 2.0)
    }

    pub fn total_direct_square(
        &self,
        n: usize,
        n_c: usize,
        side: f64,
        li: f64,
        k: usize,
    ) -> Result<f64> {
        Ok(self.intra_square(n, n_c, side)? + k as f64 * e_d2_square(side, li)?)
    }

    pub fn total_direct_disk(&self, n: usize, n_c: usize, radius: f64, k: usize) -> Result<f64> {
        Ok(self.intra_disk(n, n_c, radius)? + k as f64 * e_d2_disk(radius)?)
    }

    /// Relay cost with every hop at full range: `E[hops]·R²·K`.
    pub fn to_bs_multihop(&self, expected_hops: f64, range: f64, k: usize) -> Result<f64> {
        self.require_closed_form()?;
        if !(expected_hops >= 1.0) {
            return Err(Error::invalid_arg(format!(
                "expected hops must be >= 1, got {expected_hops}"
            )));
        }
        check_length("R", range)?;
        Ok(expected_hops * range * range * k as f64)
    }

    pub fn total_multihop(
        &self,
        area_intra: f64,
        expected_hops: f64,
        range: f64,
        k: usize,
    ) -> Result<f64> {
        Ok(area_intra + self.to_bs_multihop(expected_hops, range, k)?)
    }
}

/// Expected squared distance from a uniform point in `[0,L]²` to the BS at
/// `(L_i, L/2)`. Cubes are signed, so this holds for `L_i` beyond the square.
pub fn e_d2_square(side: f64, li: f64) -> Result<f64> {
    check_length("L", side)?;
    if !li.is_finite() || li < 0.0 {
        return Err(Error::invalid_arg(format!(
            "L_i must be finite and non-negative, got {li}"
        )));
    }
    Ok(((side - li).powi(3) + li.powi(3)) / (3.0 * side) + side * side / 12.0)
}

/// Expected squared distance from a uniform point in a disk to its centre.
pub fn e_d2_disk(radius: f64) -> Result<f64> {
    check_length("R0", radius)?;
    Ok(radius * radius / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterEnergy {
    pub cluster_index: usize,
    pub intra: f64,
    pub to_bs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub intra: f64,
    pub to_bs: f64,
    pub total: f64,
    pub per_cluster: Vec<ClusterEnergy>,
    /// Heads charged a single direct hop because the tree could not reach them.
    pub fallback_heads: Vec<NodeId>,
    /// Heads whose relay cost was left out.
    pub excluded_heads: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy)]
pub enum Route<'a> {
    Direct,
    Multihop(&'a RoutingTree),
}

/// What to do with heads the routing tree cannot reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnreachablePolicy {
    Fail,
    /// Charge one direct hop to the BS.
    FallbackDirect,
    /// Leave their relay cost out and report them.
    Exclude,
}

/// Measured cost of one collection round.
///
/// Every non-head sends one reading to its head; the head's own reading is
/// free. Head `i` then sends `payload_sizes[i]` scalars toward the BS, either
/// in one hop or along the routing tree.
pub fn empirical_energy(
    dep: &Deployment,
    clusters: &ClusterSet,
    payload_sizes: &[usize],
    route: Route<'_>,
    model: &EnergyModel,
    policy: UnreachablePolicy,
) -> Result<EnergyReport> {
    if payload_sizes.len() != clusters.len() {
        return Err(Error::invalid_arg(format!(
            "{} payload sizes for {} clusters",
            payload_sizes.len(),
            clusters.len()
        )));
    }
    let alpha = model.alpha;
    if let (Route::Multihop(tree), UnreachablePolicy::Fail) = (route, policy) {
        let cut: Vec<NodeId> = clusters
            .heads()
            .into_iter()
            .filter(|h| tree.unreachable.binary_search(h).is_ok())
            .collect();
        if !cut.is_empty() {
            return Err(Error::Unreachable {
                count: cut.len(),
                ids: cut,
            });
        }
    }

    let mut report = EnergyReport {
        intra: 0.0,
        to_bs: 0.0,
        total: 0.0,
        per_cluster: Vec::with_capacity(clusters.len()),
        fallback_heads: Vec::new(),
        excluded_heads: Vec::new(),
    };
    for (ci, (c, &k)) in clusters.clusters.iter().zip(payload_sizes).enumerate() {
        let head = dep.position(c.head);
        let intra: f64 = c
            .members
            .iter()
            .filter(|&&m| m != c.head)
            .map(|&m| link_cost(squared_distance(dep.position(m), head), alpha))
            .sum();
        let direct = || link_cost(squared_distance(head, dep.bs), alpha);
        let per_scalar = match route {
            Route::Direct => direct(),
            Route::Multihop(tree) => match tree.path_edges(c.head) {
                Some(edges) => match model.multihop_cost {
                    MultihopCost::FixedRange => {
                        edges.len() as f64 * link_cost(tree.range * tree.range, alpha)
                    }
                    MultihopCost::ActualDistance => {
                        edges.iter().map(|e| link_cost(e * e, alpha)).sum()
                    }
                },
                None => match policy {
                    UnreachablePolicy::FallbackDirect => {
                        report.fallback_heads.push(c.head);
                        direct()
                    }
                    _ => {
                        report.excluded_heads.push(c.head);
                        0.0
                    }
                },
            },
        };
        let to_bs = k as f64 * per_scalar;
        report.intra += intra;
        report.to_bs += to_bs;
        report.per_cluster.push(ClusterEnergy {
            cluster_index: ci,
            intra,
            to_bs,
        });
    }
    report.total = report.intra + report.to_bs;
    Ok(report)
}
