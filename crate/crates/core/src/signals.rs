//! Sensor readings: synthetic smooth fields, CSV traces, measurement noise.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::deployment::{squared_distance, AreaGeometry, Deployment, NodeId, Position};
use crate::error::{Error, Result};
use crate::rng::SimRng;

pub type Readings = Vec<(NodeId, f64)>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Position,
    pub amplitude: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldModel {
    /// `Σ A·exp(−‖p − c‖² / 2w²)`
    GaussianBumps { bumps: Vec<Bump> },
    /// `offset + Σ A/(a²+b²)·cos(π(a·u + b·v) + φ_ab)` over `0 ≤ a,b ≤ cutoff`,
    /// `(a,b) ≠ (0,0)`, with `(u,v)` the position scaled to the unit square
    /// spanning the area's bounding box. Phases come from `seed`.
    LowFreqFourier {
        cutoff: usize,
        amplitude: f64,
        offset: f64,
        seed: u64,
    },
}

impl FieldModel {
    /// `count` bumps with centres uniform over the area, a shared width and
    /// amplitudes uniform in `[amp_lo, amp_hi)`.
    pub fn random_bumps(
        geometry: &AreaGeometry,
        count: usize,
        width: f64,
        amp_lo: f64,
        amp_hi: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::invalid_arg("bump width must be positive"));
        }
        if !(amp_lo.is_finite() && amp_hi.is_finite() && amp_lo <= amp_hi) {
            return Err(Error::invalid_arg("bump amplitude range is empty"));
        }
        let mut rng = SimRng::child(seed, "field-bumps", 0);
        let bumps = (0..count)
            .map(|_| {
                let center = geometry.sample(&mut rng);
                let amplitude = rng.uniform_in(amp_lo, amp_hi);
                Bump {
                    center,
                    amplitude,
                    width,
                }
            })
            .collect();
        Ok(FieldModel::GaussianBumps { bumps })
    }

    fn validate(&self) -> Result<()> {
        match self {
            FieldModel::GaussianBumps { bumps } => {
                if bumps
                    .iter()
                    .any(|b| !(b.width > 0.0 && b.width.is_finite() && b.amplitude.is_finite()))
                {
                    return Err(Error::invalid_arg(
                        "bumps need finite amplitudes and positive widths",
                    ));
                }
            }
            FieldModel::LowFreqFourier {
                amplitude, offset, ..
            } => {
                if !(amplitude.is_finite() && offset.is_finite()) {
                    return Err(Error::invalid_arg(
                        "Fourier field parameters must be finite",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Field value at every node, ordered by node id.
pub fn sample_field(model: &FieldModel, dep: &Deployment) -> Result<Readings> {
    model.validate()?;
    let values: Vec<f64> = match model {
        FieldModel::GaussianBumps { bumps } => dep
            .nodes
            .iter()
            .map(|&p| {
                bumps
                    .iter()
                    .map(|b| {
                        b.amplitude
                            * (-squared_distance(p, b.center) / (2.0 * b.width * b.width)).exp()
                    })
                    .sum()
            })
            .collect(),
        FieldModel::LowFreqFourier {
            cutoff,
            amplitude,
            offset,
            seed,
        } => {
            let mut rng = SimRng::child(*seed, "fourier-phase", 0);
            let mut terms = Vec::new();
            for a in 0..=*cutoff {
                for b in 0..=*cutoff {
                    if a == 0 && b == 0 {
                        continue;
                    }
                    let weight = amplitude / (a * a + b * b) as f64;
                    terms.push((a as f64, b as f64, weight, 2.0 * PI * rng.uniform()));
                }
            }
            let origin = dep.geometry.origin();
            let span = dep.geometry.extent();
            dep.nodes
                .iter()
                .map(|p| {
                    let u = (p.x - origin.x) / span;
                    let v = (p.y - origin.y) / span;
                    offset
                        + terms
                            .iter()
                            .map(|&(a, b, w, phase)| w * (PI * (a * u + b * v) + phase).cos())
                            .sum::<f64>()
                })
                .collect()
        }
    };
    Ok(values.into_iter().enumerate().collect())
}

/// Readings for one epoch of a `node_id,epoch,value` trace, sorted by node id.
pub fn read_trace<R: Read>(input: R, epoch: u64) -> Result<Readings> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut seen = std::collections::HashSet::new();
    let mut out = BTreeMap::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| Error::invalid_data(format!("line {line}: {e}")))?;
        if record.len() != 3 {
            return Err(Error::invalid_data(format!(
                "line {line}: expected 3 columns, found {}",
                record.len()
            )));
        }
        let node: NodeId = record[0].parse().map_err(|_| {
            Error::invalid_data(format!(
                "line {line}: node_id {:?} is not an integer",
                &record[0]
            ))
        })?;
        let ep: u64 = record[1].parse().map_err(|_| {
            Error::invalid_data(format!(
                "line {line}: epoch {:?} is not an integer",
                &record[1]
            ))
        })?;
        let value: f64 = record[2]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| {
                Error::invalid_data(format!(
                    "line {line}: value {:?} is not a finite number",
                    &record[2]
                ))
            })?;
        if !seen.insert((node, ep)) {
            return Err(Error::invalid_data(format!(
                "line {line}: duplicate reading for node {node} at epoch {ep}"
            )));
        }
        if ep == epoch {
            out.insert(node, value);
        }
    }
    if out.is_empty() {
        return Err(Error::NotFound(format!(
            "epoch {epoch} not present in trace"
        )));
    }
    Ok(out.into_iter().collect())
}

pub fn load_trace_csv(path: &Path, epoch: u64) -> Result<Readings> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_trace(std::io::BufReader::new(file), epoch).map_err(|e| match e {
        Error::InvalidData(m) => Error::InvalidData(format!("{}: {m}", path.display())),
        Error::NotFound(m) => Error::NotFound(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Check that a trace covers exactly the nodes `0..n`.
pub fn check_trace_matches(readings: &Readings, n: usize) -> Result<()> {
    if readings.len() != n || readings.iter().enumerate().any(|(i, r)| r.0 != i) {
        return Err(Error::invalid_arg(format!(
            "trace has {} readings but the deployment has {n} nodes",
            readings.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::invalid_arg(format!(
                "noise sigma must be >= 0, got {sigma}"
            )));
        }
        Ok(NoiseSpec { sigma, seed })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Additive white Gaussian noise. The same seed yields the same standard
/// normal draws for any `sigma`, so sweeps over `sigma` scale one noise
/// realisation.
pub fn add_noise(readings: &[(NodeId, f64)], spec: &NoiseSpec) -> Readings {
    if spec.sigma == 0.0 {
        return readings.to_vec();
    }
    let mut rng = SimRng::new(spec.seed);
    readings
        .iter()
        .map(|&(id, v)| (id, v + spec.sigma * rng.standard_normal()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deployment::deploy;

    fn dep(nodes: Vec<Position>) -> Deployment {
        Deployment {
            geometry: AreaGeometry::Square { side: 100.0 },
            nodes,
            bs: Position::new(300.0, 50.0),
            seed: 0,
        }
    }

    #[test]
    fn bump_peak_and_empty_field() {
        let d = dep(vec![Position::new(20.0, 30.0), Position::new(80.0, 80.0)]);
        let m = FieldModel::GaussianBumps {
            bumps: vec![Bump {
                center: Position::new(20.0, 30.0),
                amplitude: 1.0,
                width: 10.0,
            }],
        };
        assert_eq!(sample_field(&m, &d).unwrap()[0], (0, 1.0));
        let empty = FieldModel::GaussianBumps { bumps: vec![] };
        assert!(sample_field(&empty, &d).unwrap().iter().all(|r| r.1 == 0.0));
    }

    #[test]
    fn nearby_nodes_read_nearly_equal() {
        let w = 25.0;
        let p = Position::new(40.0, 40.0);
        let q = Position::new(40.0 + 0.01 * w, 40.0);
        let near = FieldModel::GaussianBumps {
            bumps: vec![Bump {
                center: Position::new(40.0 + 0.05 * w, 41.0),
                amplitude: 20.0,
                width: w,
            }],
        };
        let r = sample_field(&near, &dep(vec![p, q])).unwrap();
        assert!((r[0].1 - r[1].1).abs() < 1e-3 * r[0].1.abs());

        // Positive bumps: |Δf|/f ≤ exp(max_b (|p−c_b|·δ + δ²/2)/w²) − 1.
        let m =
            FieldModel::random_bumps(&AreaGeometry::Square { side: 100.0 }, 5, w, 10.0, 30.0, 4)
                .unwrap();
        let FieldModel::GaussianBumps { bumps } = &m else {
            unreachable!()
        };
        let delta = 0.01 * w;
        let bound = bumps
            .iter()
            .map(|b| (p.distance(b.center) * delta + delta * delta / 2.0) / (w * w))
            .fold(0.0, f64::max)
            .exp_m1();
        let r = sample_field(&m, &dep(vec![p, q])).unwrap();
        assert!((r[0].1 - r[1].1).abs() <= bound * r[0].1.abs() * (1.0 + 1e-9));
    }

    #[test]
    fn fourier_field_is_deterministic_and_finite() {
        let d = deploy(AreaGeometry::Disk { radius: 50.0 }, 300, None, 1).unwrap();
        let m = FieldModel::LowFreqFourier {
            cutoff: 3,
            amplitude: 4.0,
            offset: 20.0,
            seed: 9,
        };
        let a = sample_field(&m, &d).unwrap();
        assert_eq!(a, sample_field(&m, &d).unwrap());
        assert!(a.iter().all(|r| r.1.is_finite()));
    }

    #[test]
    fn trace_parsing() {
        let text = "node_id,epoch,value\n0,0,7.5\n1,0,7.6\n0,1,8.0\n";
        assert_eq!(
            read_trace(text.as_bytes(), 0).unwrap(),
            vec![(0, 7.5), (1, 7.6)]
        );
        assert!(matches!(
            read_trace(text.as_bytes(), 5),
            Err(Error::NotFound(_))
        ));
        assert!(matches!(
            read_trace("".as_bytes(), 0),
            Err(Error::NotFound(_))
        ));
        let dup = "node_id,epoch,value\n0,0,1\n0,0,2\n";
        assert!(matches!(
            read_trace(dup.as_bytes(), 0),
            Err(Error::InvalidData(_))
        ));
        let bad = "node_id,epoch,value\n0,0,1\n1,0,warm\n";
        let err = read_trace(bad.as_bytes(), 0).unwrap_err();
        assert!(matches!(err, Error::InvalidData(_)));
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn trace_count_must_match() {
        let r = vec![(0, 1.0), (1, 2.0)];
        assert!(check_trace_matches(&r, 2).is_ok());
        assert!(matches!(
            check_trace_matches(&r, 3),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn zero_sigma_is_identity() {
        let r: Readings = (0..10).map(|i| (i, i as f64 * 0.1)).collect();
        let out = add_noise(&r, &NoiseSpec::new(0.0, 3).unwrap());
        assert!(out
            .iter()
            .zip(&r)
            .all(|(a, b)| a.0 == b.0 && a.1.to_bits() == b.1.to_bits()));
        assert!(NoiseSpec::new(-1.0, 0).is_err());
    }

    #[test]
    fn unit_noise_variance() {
        let r: Readings = (0..1_000_000).map(|i| (i, 0.0)).collect();
        let spec = NoiseSpec::new(1.0, 77).unwrap();
        let out = add_noise(&r, &spec);
        let n = out.len() as f64;
        let mean = out.iter().map(|r| r.1).sum::<f64>() / n;
        let var = out.iter().map(|r| (r.1 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 1.0).abs() < 0.01, "variance {var}");
        assert_eq!(out, add_noise(&r, &spec));
    }
}
