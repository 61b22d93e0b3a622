//! Per-cluster DCT compression and zero-padded reconstruction.
//!
//! A cluster head orders its cluster's readings, multiplies them by the
//! orthonormal DCT-II matrix of matching size and forwards only `k` of the
//! resulting coefficients. The sink rebuilds the coefficient vector with
//! zeros in the dropped slots, applies the transpose and undoes the ordering.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::deployment::NodeId;
use crate::error::{Error, Result};

/// Largest dimension kept in the shared matrix cache.
const CACHE_MAX_N: usize = 128;

/// Orthonormal DCT-II matrix, row-major. Row `p` is the `p`-th cosine basis
/// vector: `Φ[0][q] = 1/√n` and `Φ[p][q] = √(2/n)·cos(π(2q+1)p / 2n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DctMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DctMatrix {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid_arg("DCT dimension must be at least 1"));
        }
        let nf = n as f64;
        let dc = 1.0 / nf.sqrt();
        let ac = (2.0 / nf).sqrt();
        let mut entries = Vec::with_capacity(n * n);
        entries.extend(std::iter::repeat_n(dc, n));
        for p in 1..n {
            for q in 0..n {
                let angle = PI * ((2 * q + 1) * p) as f64 / (2.0 * nf);
                entries.push(ac * angle.cos());
            }
        }
        Ok(DctMatrix { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, p: usize) -> &[f64] {
        &self.entries[p * self.n..(p + 1) * self.n]
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.entries[p * self.n + q]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    /// `Φ·x`
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "vector length must match the DCT size");
        (0..self.n)
            .map(|p| self.row(p).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Φᵀ·s` for a sparse `s` given as `(index, value)` pairs.
    pub fn inverse_sparse(&self, coeffs: &[(usize, f64)]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for &(p, v) in coeffs {
            for (xq, phi) in x.iter_mut().zip(self.row(p)) {
                *xq += phi * v;
            }
        }
        x
    }
}

fn cache() -> &'static RwLock<HashMap<usize, Arc<DctMatrix>>> {
    static CACHE: std::sync::OnceLock<RwLock<HashMap<usize, Arc<DctMatrix>>>> =
        std::sync::OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Shared DCT matrix of size `n`. Small sizes are memoised; the result is
/// always identical to [`DctMatrix::new`].
pub fn dct_matrix(n: usize) -> Result<Arc<DctMatrix>> {
    if n > CACHE_MAX_N {
        return DctMatrix::new(n).map(Arc::new);
    }
    if let Some(m) = cache().read().get(&n) {
        return Ok(Arc::clone(m));
    }
    let m = Arc::new(DctMatrix::new(n)?);
    Ok(Arc::clone(cache().write().entry(n).or_insert(m)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortMode {
    None,
    Descending,
    Ascending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// The first `k` coefficients in index order.
    FirstK,
    /// The `k` coefficients of largest magnitude, lower index on ties.
    TopKMagnitude,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedPayload {
    pub n: usize,
    /// Kept `(coefficient index, value)` pairs in ascending index order.
    pub kept: Vec<(usize, f64)>,
    /// Node id at each sorted position.
    pub permutation: Vec<NodeId>,
    pub sort_mode: SortMode,
    pub selection_mode: SelectionMode,
}

impl CompressedPayload {
    pub fn k(&self) -> usize {
        self.kept.len()
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.permutation.len() != self.n {
            return Err(Error::invalid_data(
                "payload permutation length does not match n",
            ));
        }
        if self.kept.is_empty() || self.kept.len() > self.n {
            return Err(Error::invalid_data(format!(
                "payload keeps {} coefficients of {}",
                self.kept.len(),
                self.n
            )));
        }
        let mut seen = vec![false; self.n];
        for &(i, v) in &self.kept {
            if i >= self.n || std::mem::replace(&mut seen[i], true) || !v.is_finite() {
                return Err(Error::invalid_data(format!(
                    "bad coefficient entry at index {i}"
                )));
            }
        }
        let mut ids = self.permutation.clone();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid_data("payload permutation repeats a node id"));
        }
        Ok(())
    }
}

/// Order readings per `mode`, ties broken by ascending node id. `None` keeps
/// the input order.
pub fn order_readings(readings: &[(NodeId, f64)], mode: SortMode) -> Vec<(NodeId, f64)> {
    let mut out = readings.to_vec();
    match mode {
        SortMode::None => {}
        SortMode::Descending => out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))),
        SortMode::Ascending => out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))),
    }
    out
}

/// Ordered readings and their full coefficient vector.
pub fn transform_cluster(
    readings: &[(NodeId, f64)],
    mode: SortMode,
) -> Result<(Vec<(NodeId, f64)>, Vec<f64>)> {
    if let Some(&(id, _)) = readings.iter().find(|r| !r.1.is_finite()) {
        return Err(Error::invalid_data(format!(
            "reading of node {id} is not finite"
        )));
    }
    let ordered = order_readings(readings, mode);
    let x: Vec<f64> = ordered.iter().map(|r| r.1).collect();
    let phi = dct_matrix(x.len())?;
    let s = phi.forward(&x);
    Ok((ordered, s))
}

/// Indices kept under `mode`, ascending.
pub fn select_indices(coeffs: &[f64], k: usize, mode: SelectionMode) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..coeffs.len()).collect();
    if mode == SelectionMode::TopKMagnitude {
        idx.sort_by(|&a, &b| coeffs[b].abs().total_cmp(&coeffs[a].abs()).then(a.cmp(&b)));
    }
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

pub fn compress_cluster(
    readings: &[(NodeId, f64)],
    k: usize,
    sort_mode: SortMode,
    selection_mode: SelectionMode,
) -> Result<CompressedPayload> {
    if k == 0 || k > readings.len() {
        return Err(Error::invalid_arg(format!(
            "k = {k} must lie in 1..={}",
            readings.len()
        )));
    }
    let (ordered, s) = transform_cluster(readings, sort_mode)?;
    let kept = select_indices(&s, k, selection_mode)
        .into_iter()
        .map(|i| (i, s[i]))
        .collect();
    Ok(CompressedPayload {
        n: readings.len(),
        kept,
        permutation: ordered.into_iter().map(|r| r.0).collect(),
        sort_mode,
        selection_mode,
    })
}

/// Estimates for every node in the payload, ordered by node id.
pub fn reconstruct_cluster(payload: &CompressedPayload) -> Result<Vec<(NodeId, f64)>> {
    payload.validate()?;
    let phi = dct_matrix(payload.n)?;
    let x_sorted = phi.inverse_sparse(&payload.kept);
    let mut out: Vec<(NodeId, f64)> = payload.permutation.iter().copied().zip(x_sorted).collect();
    out.sort_by_key(|r| r.0);
    Ok(out)
}

/// `‖x − x̂‖₂ / ‖x‖₂`
pub fn normalized_error(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x.len() != x_hat.len() {
        return Err(Error::invalid_arg(format!(
            "signal lengths differ: {} vs {}",
            x.len(),
            x_hat.len()
        )));
    }
    let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::UndefinedMetric);
    }
    let diff: f64 = x
        .iter()
        .zip(x_hat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / norm)
}

/// Split a global coefficient budget across clusters in proportion to their
/// sizes (largest-remainder rounding).
///
/// Every cluster gets at least one coefficient when `total ≥` the number of
/// clusters; otherwise the budget goes to the clusters with the largest
/// quotas and the rest get none. No cluster gets more than its size.
pub fn allocate_budget(sizes: &[usize], total: usize) -> Result<Vec<usize>> {
    let nodes: usize = sizes.iter().sum();
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::invalid_arg("cluster sizes must be positive"));
    }
    if total == 0 || total > nodes {
        return Err(Error::invalid_arg(format!(
            "coefficient budget {total} must lie in 1..={nodes}"
        )));
    }
    let quota: Vec<f64> = sizes
        .iter()
        .map(|&n| (total * n) as f64 / nodes as f64)
        .collect();
    let floor = usize::from(total >= sizes.len());
    let mut k: Vec<usize> = quota
        .iter()
        .zip(sizes)
        .map(|(&q, &n)| (q.floor() as usize).max(floor).min(n))
        .collect();
    let mut assigned: usize = k.iter().sum();

    let pick = |k: &[usize], key: &dyn Fn(usize) -> Option<f64>| -> usize {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..k.len() {
            if let Some(v) = key(i) {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
        }
        best.expect("budget within bounds always leaves a candidate")
            .0
    };
    while assigned < total {
        let i = pick(&k, &|i| (k[i] < sizes[i]).then(|| quota[i] - k[i] as f64));
        k[i] += 1;
        assigned += 1;
    }
    while assigned > total {
        let i = pick(&k, &|i| (k[i] > floor).then(|| k[i] as f64 - quota[i]));
        k[i] -= 1;
        assigned -= 1;
    }
    Ok(k)
}

/// Write payloads as `cluster_index,n,coeff_index,coeff_value`.
pub fn write_payload_csv<'a, W: Write>(
    payloads: impl IntoIterator<Item = (usize, &'a CompressedPayload)>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "cluster_index,n,coeff_index,coeff_value")?;
    for (ci, p) in payloads {
        for &(i, v) in &p.kept {
            writeln!(out, "{ci},{},{i},{v}", p.n)?;
        }
    }
    Ok(())
}

/// Write sort permutations as `cluster_index,sorted_pos,node_id`.
pub fn write_permutation_csv<'a, W: Write>(
    payloads: impl IntoIterator<Item = (usize, &'a CompressedPayload)>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "cluster_index,sorted_pos,node_id")?;
    for (ci, p) in payloads {
        for (pos, id) in p.permutation.iter().enumerate() {
            writeln!(out, "{ci},{pos},{id}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn readings(values: &[f64]) -> Vec<(NodeId, f64)> {
        values.iter().copied().enumerate().collect()
    }

    #[test]
    fn small_matrices() {
        assert_eq!(DctMatrix::new(1).unwrap().as_slice(), &[1.0]);
        let m = DctMatrix::new(2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (got, want) in m.as_slice().iter().zip([h, h, h, -h]) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
        assert!(matches!(DctMatrix::new(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn first_row_is_flat() {
        let m = DctMatrix::new(17).unwrap();
        assert!(m
            .row(0)
            .iter()
            .all(|&v| (v - 1.0 / 17f64.sqrt()).abs() < 1e-15));
    }

    #[test]
    fn cache_matches_fresh_build() {
        for n in [3, 64, 200] {
            assert_eq!(*dct_matrix(n).unwrap(), DctMatrix::new(n).unwrap());
            assert_eq!(*dct_matrix(n).unwrap(), DctMatrix::new(n).unwrap());
        }
    }

    #[test]
    fn constant_vector_keeps_only_dc() {
        for sort in [SortMode::None, SortMode::Descending, SortMode::Ascending] {
            for sel in [SelectionMode::FirstK, SelectionMode::TopKMagnitude] {
                let p = compress_cluster(&readings(&[5.0; 4]), 1, sort, sel).unwrap();
                assert_eq!(p.kept.len(), 1);
                assert_eq!(p.kept[0].0, 0);
                assert!((p.kept[0].1 - 10.0).abs() < 1e-12);
                let rec = reconstruct_cluster(&p).unwrap();
                assert!(rec.iter().all(|r| (r.1 - 5.0).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn full_budget_is_lossless_and_parseval() {
        let x = [3.0, -1.5, 8.25, 0.5, 2.0, 7.0];
        let p = compress_cluster(
            &readings(&x),
            6,
            SortMode::Descending,
            SelectionMode::TopKMagnitude,
        )
        .unwrap();
        let energy: f64 = p.kept.iter().map(|c| c.1 * c.1).sum();
        let want: f64 = x.iter().map(|v| v * v).sum();
        assert!((energy - want).abs() < 1e-10 * want);
        for (id, v) in reconstruct_cluster(&p).unwrap() {
            assert!((v - x[id]).abs() < 1e-10);
        }
    }

    #[test]
    fn zeroed_payload_gives_zero_estimates() {
        let mut p = compress_cluster(
            &readings(&[1.0, 2.0, 3.0]),
            2,
            SortMode::None,
            SelectionMode::FirstK,
        )
        .unwrap();
        for c in &mut p.kept {
            c.1 = 0.0;
        }
        assert!(reconstruct_cluster(&p).unwrap().iter().all(|r| r.1 == 0.0));
    }

    #[test]
    fn compress_rejects_bad_input() {
        let r = readings(&[1.0, 2.0]);
        assert!(matches!(
            compress_cluster(&r, 0, SortMode::None, SelectionMode::FirstK),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            compress_cluster(&r, 3, SortMode::None, SelectionMode::FirstK),
            Err(Error::InvalidArgument(_))
        ));
        let bad = readings(&[1.0, f64::NAN]);
        assert!(matches!(
            compress_cluster(&bad, 1, SortMode::None, SelectionMode::FirstK),
            Err(Error::InvalidData(_))
        ));
    }

    #[test]
    fn reconstruct_rejects_malformed_payload() {
        let good = compress_cluster(
            &readings(&[1.0, 2.0, 3.0]),
            2,
            SortMode::None,
            SelectionMode::FirstK,
        )
        .unwrap();
        let mut dup = good.clone();
        dup.kept = vec![(1, 1.0), (1, 2.0)];
        assert!(matches!(
            reconstruct_cluster(&dup),
            Err(Error::InvalidData(_))
        ));
        let mut oob = good.clone();
        oob.kept = vec![(3, 1.0)];
        assert!(reconstruct_cluster(&oob).is_err());
        let mut perm = good;
        perm.permutation = vec![0, 0, 1];
        assert!(reconstruct_cluster(&perm).is_err());
    }

    #[test]
    fn ties_sort_by_node_id() {
        let r = vec![(4, 1.0), (2, 1.0), (9, 3.0)];
        let d: Vec<_> = order_readings(&r, SortMode::Descending)
            .iter()
            .map(|r| r.0)
            .collect();
        assert_eq!(d, vec![9, 2, 4]);
        let a: Vec<_> = order_readings(&r, SortMode::Ascending)
            .iter()
            .map(|r| r.0)
            .collect();
        assert_eq!(a, vec![2, 4, 9]);
    }

    #[test]
    fn normalized_error_examples() {
        assert_eq!(normalized_error(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(normalized_error(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!((normalized_error(&[3.0, 4.0], &[0.0, 4.0]).unwrap() - 0.6).abs() < 1e-15);
        assert!(matches!(
            normalized_error(&[0.0], &[1.0]),
            Err(Error::UndefinedMetric)
        ));
        assert!(normalized_error(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn budget_allocation() {
        assert_eq!(
            allocate_budget(&[10, 10, 10, 10], 8).unwrap(),
            vec![2, 2, 2, 2]
        );
        assert_eq!(allocate_budget(&[5, 15], 4).unwrap(), vec![1, 3]);
        // every cluster keeps at least one coefficient when the budget allows
        let k = allocate_budget(&[1, 1, 1, 97], 4).unwrap();
        assert_eq!(k, vec![1, 1, 1, 1]);
        // budget below the cluster count: largest quotas win
        let k = allocate_budget(&[2, 9, 3, 8], 2).unwrap();
        assert_eq!(k, vec![0, 1, 0, 1]);
        // never more than the cluster size
        let k = allocate_budget(&[1, 3], 4).unwrap();
        assert_eq!(k, vec![1, 3]);
        assert!(allocate_budget(&[1, 3], 5).is_err());
        assert!(allocate_budget(&[1, 3], 0).is_err());
    }

    #[test]
    fn payload_csv_layout() {
        let p = compress_cluster(
            &[(7, 2.0), (3, 4.0)],
            1,
            SortMode::Descending,
            SelectionMode::FirstK,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_payload_csv([(5, &p)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("cluster_index,n,coeff_index,coeff_value\n5,2,0,"));
        let mut buf = Vec::new();
        write_permutation_csv([(5, &p)], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "cluster_index,sorted_pos,node_id\n5,0,3\n5,1,7\n"
        );
    }
}
