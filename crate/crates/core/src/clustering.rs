//! Partitioning a deployment into clusters with designated heads.
//!
//! Two partitioners are provided: Lloyd's k-means on node positions, and a
//! single-round LEACH-style election where each node independently becomes
//! a head with probability `n_c / N` and every other node joins its nearest
//! head.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::deployment::{squared_distance, Deployment, NodeId, Position};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Redraws allowed when a LEACH election elects nobody.
pub const MAX_ELECTION_DRAWS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[serde(rename = "kmeans")]
    KMeans,
    Leach,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::KMeans => "kmeans",
            Algorithm::Leach => "leach",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub head: NodeId,
    /// Sorted ascending; includes the head.
    pub members: Vec<NodeId>,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    /// Ordered by ascending head id.
    pub clusters: Vec<Cluster>,
    pub algorithm: Algorithm,
    pub seed: u64,
}

impl ClusterSet {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Cluster::size).collect()
    }

    pub fn heads(&self) -> Vec<NodeId> {
        self.clusters.iter().map(|c| c.head).collect()
    }

    /// Cluster index of every node, indexed by node id.
    pub fn membership(&self, n: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; n];
        for (ci, c) in self.clusters.iter().enumerate() {
            for &m in &c.members {
                out[m] = ci;
            }
        }
        out
    }

    /// Checks that the clusters partition `0..n` and every head is a member.
    pub fn check_partition(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for c in &self.clusters {
            if c.members.is_empty() || c.members.binary_search(&c.head).is_err() {
                return Err(Error::invalid_data(format!(
                    "cluster headed by {} is malformed",
                    c.head
                )));
            }
            for &m in &c.members {
                if m >= n || std::mem::replace(&mut seen[m], true) {
                    return Err(Error::invalid_data(format!(
                        "node {m} out of range or assigned twice"
                    )));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::invalid_data(format!(
                "node {missing} belongs to no cluster"
            )));
        }
        Ok(())
    }

    /// Sum of squared member-to-head distances.
    pub fn intra_sq_cost(&self, dep: &Deployment) -> f64 {
        self.clusters
            .iter()
            .map(|c| {
                let h = dep.position(c.head);
                c.members
                    .iter()
                    .map(|&m| squared_distance(dep.position(m), h))
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn write_csv<W: Write>(&self, n: usize, mut out: W) -> std::io::Result<()> {
        let membership = self.membership(n);
        writeln!(out, "node_id,cluster_index,is_head")?;
        for (id, &ci) in membership.iter().enumerate() {
            let is_head = u8::from(self.clusters[ci].head == id);
            writeln!(out, "{id},{ci},{is_head}")?;
        }
        Ok(())
    }
}

fn check_count(dep: &Deployment, n_c: usize) -> Result<()> {
    if n_c == 0 || n_c > dep.len() {
        return Err(Error::invalid_arg(format!(
            "cluster count {n_c} must lie in 1..={}",
            dep.len()
        )));
    }
    Ok(())
}

/// Build clusters around the given heads: every other node joins the head at
/// the smallest squared distance, ties going to the lower head id.
pub fn assign_to_heads(
    dep: &Deployment,
    heads: &[NodeId],
    algorithm: Algorithm,
    seed: u64,
) -> Result<ClusterSet> {
    if heads.is_empty() {
        return Err(Error::invalid_arg("at least one cluster head is required"));
    }
    let mut heads = heads.to_vec();
    heads.sort_unstable();
    heads.dedup();
    if let Some(&bad) = heads.iter().find(|&&h| h >= dep.len()) {
        return Err(Error::invalid_arg(format!("head {bad} is not a node")));
    }
    let mut clusters: Vec<Cluster> = heads
        .iter()
        .map(|&h| Cluster {
            head: h,
            members: Vec::new(),
        })
        .collect();
    let mut slot_of_head = vec![usize::MAX; dep.len()];
    for (i, &h) in heads.iter().enumerate() {
        slot_of_head[h] = i;
    }
    for (id, &p) in dep.nodes.iter().enumerate() {
        let slot = if slot_of_head[id] != usize::MAX {
            slot_of_head[id]
        } else {
            nearest(p, heads.iter().map(|&h| dep.position(h)))
        };
        clusters[slot].members.push(id);
    }
    Ok(ClusterSet {
        clusters,
        algorithm,
        seed,
    })
}

/// Index of the nearest point, lowest index on ties.
fn nearest(p: Position, candidates: impl Iterator<Item = Position>) -> usize {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, c) in candidates.enumerate() {
        let d = squared_distance(p, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Single-round LEACH election.
///
/// Each node draws `u ~ U[0,1)` from the election stream and becomes a head
/// iff `u < n_c / N`. Because the draws do not depend on `n_c`, the head sets
/// for increasing `n_c` under one seed are nested. An empty election is
/// redrawn from a fresh child stream.
pub fn cluster_leach(dep: &Deployment, n_c: usize, seed: u64) -> Result<ClusterSet> {
    check_count(dep, n_c)?;
    let p = n_c as f64 / dep.len() as f64;
    for attempt in 0..MAX_ELECTION_DRAWS {
        let mut rng = SimRng::child(seed, "leach-election", attempt as u64);
        let heads: Vec<NodeId> = (0..dep.len()).filter(|_| rng.uniform() < p).collect();
        if !heads.is_empty() {
            return assign_to_heads(dep, &heads, Algorithm::Leach, seed);
        }
    }
    Err(Error::ElectionFailure {
        attempts: MAX_ELECTION_DRAWS,
    })
}

#[derive(Debug, Clone)]
pub struct LloydRun {
    pub centroids: Vec<Position>,
    /// Centroid index per node.
    pub assignment: Vec<usize>,
    /// Sum of squared point-to-centroid distances after each assignment step.
    pub costs: Vec<f64>,
    pub converged: bool,
}

/// Assign each point to its nearest centroid.
pub fn assign_nearest(points: &[Position], centroids: &[Position]) -> (Vec<usize>, f64) {
    let mut cost = 0.0;
    let assignment = points
        .iter()
        .map(|&p| {
            let c = nearest(p, centroids.iter().copied());
            cost += squared_distance(p, centroids[c]);
            c
        })
        .collect();
    (assignment, cost)
}

/// Lloyd iterations seeded with `k` distinct points drawn without replacement.
pub fn kmeans_lloyd(
    points: &[Position],
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<LloydRun> {
    if k == 0 || k > points.len() {
        return Err(Error::invalid_arg(format!(
            "k = {k} must lie in 1..={}",
            points.len()
        )));
    }
    let order = SimRng::child(seed, "kmeans-init", 0).permutation(points.len());
    let mut centroids: Vec<Position> = order[..k].iter().map(|&i| points[i]).collect();
    let mut assignment: Vec<usize> = Vec::new();
    let mut costs = Vec::new();
    let mut converged = false;

    for _ in 0..max_iters.max(1) {
        let (next, cost) = assign_nearest(points, &centroids);
        costs.push(cost);
        if next == assignment {
            converged = true;
            break;
        }
        assignment = next;
        centroids = update_centroids(points, &assignment, &centroids);
    }
    if !converged {
        // centroids moved after the last assignment; realign so the returned
        // pair is consistent
        let (last, cost) = assign_nearest(points, &centroids);
        converged = last == assignment;
        assignment = last;
        costs.push(cost);
    }
    Ok(LloydRun {
        centroids,
        assignment,
        costs,
        converged,
    })
}

fn update_centroids(points: &[Position], assignment: &[usize], old: &[Position]) -> Vec<Position> {
    let k = old.len();
    let mut sums = vec![(0.0, 0.0, 0usize); k];
    for (p, &c) in points.iter().zip(assignment) {
        sums[c].0 += p.x;
        sums[c].1 += p.y;
        sums[c].2 += 1;
    }
    let mut centroids: Vec<Position> = sums
        .iter()
        .zip(old)
        .map(|(&(sx, sy, n), &o)| {
            if n == 0 {
                o
            } else {
                Position::new(sx / n as f64, sy / n as f64)
            }
        })
        .collect();

    // Empty clusters take over the point farthest from its own centroid.
    let mut taken = vec![false; points.len()];
    for c in 0..k {
        if sums[c].2 != 0 {
            continue;
        }
        let mut best = (usize::MAX, -1.0);
        for (i, (&p, &a)) in points.iter().zip(assignment).enumerate() {
            if taken[i] {
                continue;
            }
            let d = squared_distance(p, centroids[a]);
            if d > best.1 {
                best = (i, d);
            }
        }
        if best.0 != usize::MAX {
            taken[best.0] = true;
            centroids[c] = points[best.0];
        }
    }
    centroids
}

/// K-means partition; each cluster's head is the member nearest its centroid.
pub fn cluster_kmeans(
    dep: &Deployment,
    n_c: usize,
    seed: u64,
    max_iters: usize,
) -> Result<ClusterSet> {
    check_count(dep, n_c)?;
    let run = kmeans_lloyd(&dep.nodes, n_c, seed, max_iters)?;
    let mut groups: Vec<Vec<NodeId>> = vec![Vec::new(); n_c];
    for (id, &c) in run.assignment.iter().enumerate() {
        groups[c].push(id);
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .zip(&run.centroids)
        .filter(|(members, _)| !members.is_empty())
        .map(|(members, &centroid)| {
            let local = nearest(centroid, members.iter().map(|&m| dep.position(m)));
            Cluster {
                head: members[local],
                members,
            }
        })
        .collect();
    clusters.sort_by_key(|c| c.head);
    Ok(ClusterSet {
        clusters,
        algorithm: Algorithm::KMeans,
        seed,
    })
}

pub fn cluster(
    dep: &Deployment,
    algorithm: Algorithm,
    n_c: usize,
    seed: u64,
    max_iters: usize,
) -> Result<ClusterSet> {
    match algorithm {
        Algorithm::KMeans => cluster_kmeans(dep, n_c, seed, max_iters),
        Algorithm::Leach => cluster_leach(dep, n_c, seed),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistogramBin {
    pub lo: usize,
    pub hi: usize,
    pub count: usize,
}

/// Tally cluster sizes into bins `[b·w, (b+1)·w − 1]`; empty bins are omitted.
pub fn cluster_size_histogram(sizes: &[usize], bin_width: usize) -> Result<Vec<HistogramBin>> {
    if bin_width == 0 {
        return Err(Error::invalid_arg("bin width must be at least 1"));
    }
    let mut counts = std::collections::BTreeMap::new();
    for &s in sizes {
        *counts.entry(s / bin_width).or_insert(0usize) += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(b, count)| HistogramBin {
            lo: b * bin_width,
            hi: (b + 1) * bin_width - 1,
            count,
        })
        .collect())
}
