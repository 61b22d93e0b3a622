#![allow(dead_code)]

use std::f64::consts::PI;

/// Composite Simpson rule on [a, b] with `m` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    assert!(m % 2 == 0);
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Mean of `g` over the square [0, side]² by nested Simpson.
pub fn square_mean(g: impl Fn(f64, f64) -> f64, side: f64) -> f64 {
    let inner = |x: f64| simpson(|y| g(x, y), 0.0, side, 64);
    simpson(inner, 0.0, side, 64) / (side * side)
}

/// Mean of `g` over the disk of radius `r` at the origin. Both coordinates are
/// sine-substituted (x = r sin θ, y = h sin φ) so the integrand stays smooth
/// up to the rim.
pub fn disk_mean(g: impl Fn(f64, f64) -> f64, r: f64) -> f64 {
    let outer = |t: f64| {
        let x = r * t.sin();
        let h = r * t.cos();
        let inner = simpson(
            |p: f64| g(x, h * p.sin()) * h * p.cos(),
            -PI / 2.0,
            PI / 2.0,
            256,
        );
        inner * r * t.cos()
    };
    simpson(outer, -PI / 2.0, PI / 2.0, 256) / (PI * r * r)
}

/// Idealised intra-cluster cost: `n_c` circular clusters of area `area / n_c`,
/// head at the centre, `n / n_c − 1` members each.
pub fn intra_by_quadrature(n: usize, n_c: usize, area: f64) -> f64 {
    let rc = (area / (n_c as f64 * PI)).sqrt();
    let e_r2 = disk_mean(|x, y| x * x + y * y, rc);
    n_c as f64 * (n as f64 / n_c as f64 - 1.0) * e_r2
}

/// Mean squared distance from a uniform point in [0, L]² to (li, L/2).
pub fn e_d2_square_by_quadrature(side: f64, li: f64) -> f64 {
    square_mean(|x, y| (x - li).powi(2) + (y - side / 2.0).powi(2), side)
}

pub fn e_d2_disk_by_quadrature(r0: f64) -> f64 {
    disk_mean(|x, y| x * x + y * y, r0)
}

/// `Σ n·(P_n − P_{n−1}) / P_max`
pub fn hop_distribution_mean(cdf: &[f64]) -> f64 {
    let pmax = *cdf.last().unwrap();
    let mut prev = 0.0;
    let mut acc = 0.0;
    for (i, &p) in cdf.iter().enumerate() {
        acc += (i + 1) as f64 * (p - prev);
        prev = p;
    }
    acc / pmax
}

/// All-pairs hop counts in the unit-disk graph over `points` (BS at index 0)
/// by Floyd–Warshall. `None` means disconnected.
pub fn hop_counts_to_bs(points: &[(f64, f64)], range: f64) -> Vec<Option<usize>> {
    let n = points.len();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
            if i != j && (dx * dx + dy * dy).sqrt() <= range {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    (0..n).map(|i| (d[i][0] < inf).then_some(d[i][0])).collect()
}

/// Orthonormal DCT-II coefficients evaluated term by term.
pub fn naive_dct(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|p| {
            let scale = if p == 0 {
                (1.0 / n as f64).sqrt()
            } else {
                (2.0 / n as f64).sqrt()
            };
            scale
                * x.iter()
                    .enumerate()
                    .map(|(q, v)| v * (PI * (2 * q + 1) as f64 * p as f64 / (2 * n) as f64).cos())
                    .sum::<f64>()
        })
        .collect()
}

/// Minimum total within-cluster squared distance to cluster centroids over
/// every 2-partition of `pts` (both parts non-empty).
pub fn best_two_partition(pts: &[(f64, f64)]) -> (f64, Vec<usize>) {
    let n = pts.len();
    let cost = |idx: &[usize]| {
        let m = idx.len() as f64;
        let cx = idx.iter().map(|&i| pts[i].0).sum::<f64>() / m;
        let cy = idx.iter().map(|&i| pts[i].1).sum::<f64>() / m;
        idx.iter()
            .map(|&i| (pts[i].0 - cx).powi(2) + (pts[i].1 - cy).powi(2))
            .sum::<f64>()
    };
    let mut best = (f64::INFINITY, vec![]);
    for mask in 1..(1u32 << n) - 1 {
        let a: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let b: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
        let c = cost(&a) + cost(&b);
        if c < best.0 {
            best = (c, (0..n).map(|i| (mask >> i & 1) as usize).collect());
        }
    }
    best
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
