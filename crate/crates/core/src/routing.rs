//! Multi-hop trees over cluster heads, rooted at the base station.
//!
//! Links exist between any two endpoints (heads or the BS) no farther apart
//! than the head transmission range. Hop counts feed both the empirical
//! relay cost and the expected-hop formula in [`expected_hops_chandler`].

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::deployment::{squared_distance, NodeId, Position};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoutingStrategy {
    /// Breadth-first shortest-hop tree from the BS.
    BfsMinHop,
    /// Heads join in order of BS distance, each picking the connected
    /// in-range node closest to the BS.
    GreedyTowardBs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parent {
    Bs,
    Head(NodeId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingTree {
    pub range: f64,
    pub strategy: RoutingStrategy,
    pub parent: BTreeMap<NodeId, Parent>,
    pub hops: BTreeMap<NodeId, usize>,
    /// Length of each head's uplink edge.
    pub edge_length: BTreeMap<NodeId, f64>,
    /// Heads with no in-range path to the BS, ascending.
    pub unreachable: Vec<NodeId>,
}

impl RoutingTree {
    pub fn is_fully_connected(&self) -> bool {
        self.unreachable.is_empty()
    }

    /// Uplink edge lengths from `head` to the BS, nearest-to-head first.
    /// `None` for unreachable heads.
    pub fn path_edges(&self, head: NodeId) -> Option<Vec<f64>> {
        let mut out = Vec::new();
        let mut cur = head;
        loop {
            out.push(*self.edge_length.get(&cur)?);
            match self.parent[&cur] {
                Parent::Bs => return Some(out),
                Parent::Head(p) => cur = p,
            }
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "ch_id,parent_id,hops,edge_length")?;
        let mut ids: Vec<NodeId> = self
            .parent
            .keys()
            .chain(&self.unreachable)
            .copied()
            .collect();
        ids.sort_unstable();
        for id in ids {
            match self.parent.get(&id) {
                Some(p) => {
                    let pid = match p {
                        Parent::Bs => -1,
                        Parent::Head(h) => *h as i64,
                    };
                    writeln!(
                        out,
                        "{id},{pid},{},{}",
                        self.hops[&id], self.edge_length[&id]
                    )?;
                }
                None => writeln!(out, "{id},,,")?,
            }
        }
        Ok(())
    }
}

/// Candidate parent ordering: closer to the BS first, BS before any head,
/// then lower head id.
fn better(a: (f64, Option<NodeId>), b: (f64, Option<NodeId>)) -> bool {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => a.1 < b.1,
    }
}

pub fn build_routing_tree(
    heads: &[(NodeId, Position)],
    bs: Position,
    range: f64,
    strategy: RoutingStrategy,
) -> Result<RoutingTree> {
    if !(range.is_finite() && range > 0.0) {
        return Err(Error::invalid_arg(format!(
            "transmission range must be positive, got {range}"
        )));
    }
    let mut heads = heads.to_vec();
    heads.sort_by_key(|h| h.0);
    let r2 = range * range;
    let bs_d2: Vec<f64> = heads.iter().map(|h| squared_distance(h.1, bs)).collect();
    let mut tree = RoutingTree {
        range,
        strategy,
        parent: BTreeMap::new(),
        hops: BTreeMap::new(),
        edge_length: BTreeMap::new(),
        unreachable: Vec::new(),
    };

    // slot: None = BS, Some(i) = heads[i]
    let attach = |tree: &mut RoutingTree, child: usize, parent: Option<usize>, hops: usize| {
        let (pid, ppos) = match parent {
            None => (Parent::Bs, bs),
            Some(j) => (Parent::Head(heads[j].0), heads[j].1),
        };
        let id = heads[child].0;
        tree.parent.insert(id, pid);
        tree.hops.insert(id, hops);
        tree.edge_length.insert(id, heads[child].1.distance(ppos));
    };
    let in_range = |i: usize, other: Option<usize>| -> bool {
        match other {
            None => bs_d2[i] <= r2,
            Some(j) => squared_distance(heads[i].1, heads[j].1) <= r2,
        }
    };
    let key = |slot: Option<usize>| -> (f64, Option<NodeId>) {
        match slot {
            None => (0.0, None),
            Some(j) => (bs_d2[j], Some(heads[j].0)),
        }
    };

    let mut connected = vec![false; heads.len()];
    match strategy {
        RoutingStrategy::BfsMinHop => {
            let mut frontier: Vec<Option<usize>> = vec![None];
            let mut level = 0;
            while !frontier.is_empty() {
                level += 1;
                let mut next = Vec::new();
                for i in 0..heads.len() {
                    if connected[i] {
                        continue;
                    }
                    let best = frontier
                        .iter()
                        .copied()
                        .filter(|&f| in_range(i, f))
                        .reduce(|a, b| if better(key(b), key(a)) { b } else { a });
                    if let Some(p) = best {
                        attach(&mut tree, i, p, level);
                        next.push(Some(i));
                    }
                }
                for s in &next {
                    connected[s.expect("heads only")] = true;
                }
                frontier = next;
            }
        }
        RoutingStrategy::GreedyTowardBs => {
            let mut order: Vec<usize> = (0..heads.len()).collect();
            order.sort_by(|&a, &b| {
                bs_d2[a]
                    .total_cmp(&bs_d2[b])
                    .then(heads[a].0.cmp(&heads[b].0))
            });
            let mut joined: Vec<Option<usize>> = vec![None];
            for i in order {
                let best = joined
                    .iter()
                    .copied()
                    .filter(|&f| in_range(i, f))
                    .reduce(|a, b| if better(key(b), key(a)) { b } else { a });
                if let Some(p) = best {
                    let hops = p.map_or(0, |j| tree.hops[&heads[j].0]) + 1;
                    attach(&mut tree, i, p, hops);
                    connected[i] = true;
                    joined.push(Some(i));
                }
            }
        }
    }
    tree.unreachable = heads
        .iter()
        .zip(&connected)
        .filter(|(_, &c)| !c)
        .map(|(h, _)| h.0)
        .collect();
    Ok(tree)
}

/// Cumulative hop distribution: `cdf[n-1]` is the probability of reaching
/// the BS in `n` hops or fewer.
#[derive(Debug, Clone, PartialEq)]
pub struct HopCdf {
    pub cdf: Vec<f64>,
}

impl HopCdf {
    pub fn new(cdf: Vec<f64>) -> Result<Self> {
        if cdf.is_empty() {
            return Err(Error::invalid_arg("hop CDF needs at least one entry"));
        }
        if cdf.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid_arg("hop CDF entries must lie in [0, 1]"));
        }
        if cdf.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid_arg("hop CDF must be non-decreasing"));
        }
        if *cdf.last().unwrap() <= 0.0 {
            return Err(Error::invalid_arg("hop CDF must end above zero"));
        }
        Ok(HopCdf { cdf })
    }

    /// Empirical CDF of observed hop counts, truncated at `cap` hops when
    /// given (otherwise at the observed maximum).
    pub fn from_hops(hops: &[usize], cap: Option<usize>) -> Result<Self> {
        if hops.is_empty() {
            return Err(Error::NoStatistics);
        }
        let max = cap.unwrap_or_else(|| *hops.iter().max().unwrap());
        if max == 0 {
            return Err(Error::invalid_arg("hop cap must be at least 1"));
        }
        let total = hops.len() as f64;
        let cdf = (1..=max)
            .map(|n| hops.iter().filter(|&&h| h <= n).count() as f64 / total)
            .collect();
        HopCdf::new(cdf)
    }

    pub fn max_hops(&self) -> usize {
        self.cdf.len()
    }
}

/// Mean hop count from a cumulative hop distribution:
/// `max − Σ_{n<max} P_n / P_max`.
pub fn expected_hops_chandler(cdf: &HopCdf) -> Result<f64> {
    let max = cdf.max_hops();
    let p_max = *cdf
        .cdf
        .last()
        .ok_or_else(|| Error::invalid_arg("empty hop CDF"))?;
    if p_max <= 0.0 {
        return Err(Error::invalid_arg("P_max must be positive"));
    }
    let partial: f64 = cdf.cdf[..max - 1].iter().sum();
    Ok(max as f64 - partial / p_max)
}

/// Mean hops over reachable heads and their empirical CDF.
pub fn hop_statistics(tree: &RoutingTree) -> Result<(f64, HopCdf)> {
    let hops: Vec<usize> = tree.hops.values().copied().collect();
    if hops.is_empty() {
        return Err(Error::NoStatistics);
    }
    let mean = hops.iter().sum::<usize>() as f64 / hops.len() as f64;
    Ok((mean, HopCdf::from_hops(&hops, None)?))
}
