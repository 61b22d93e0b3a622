//! Random sensor fields and base-station placement.

use std::f64::consts::PI;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

pub type NodeId = usize;

/// Sensing area. Squares span `[0, side]²`; disks are centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AreaGeometry {
    Square { side: f64 },
    Disk { radius: f64 },
}

impl AreaGeometry {
    pub fn validate(&self) -> Result<()> {
        let dim = match *self {
            AreaGeometry::Square { side } => side,
            AreaGeometry::Disk { radius } => radius,
        };
        if !(dim.is_finite() && dim > 0.0) {
            return Err(Error::invalid_arg(format!(
                "area dimension must be positive and finite, got {dim}"
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: Position) -> bool {
        match *self {
            AreaGeometry::Square { side } => {
                (0.0..=side).contains(&p.x) && (0.0..=side).contains(&p.y)
            }
            AreaGeometry::Disk { radius } => p.x * p.x + p.y * p.y <= radius * radius,
        }
    }

    /// Characteristic length: the side of a square or the diameter of a disk.
    pub fn extent(&self) -> f64 {
        match *self {
            AreaGeometry::Square { side } => side,
            AreaGeometry::Disk { radius } => 2.0 * radius,
        }
    }

    /// Lower-left corner of the bounding box.
    pub fn origin(&self) -> Position {
        match *self {
            AreaGeometry::Square { .. } => Position::new(0.0, 0.0),
            AreaGeometry::Disk { radius } => Position::new(-radius, -radius),
        }
    }

    pub fn sample(&self, rng: &mut SimRng) -> Position {
        match *self {
            AreaGeometry::Square { side } => {
                let x = side * rng.uniform();
                let y = side * rng.uniform();
                Position::new(x, y)
            }
            AreaGeometry::Disk { radius } => {
                let r = radius * rng.uniform().sqrt();
                let theta = 2.0 * PI * rng.uniform();
                let p = Position::new(r * theta.cos(), r * theta.sin());
                // cos²+sin² can round above 1 for r within an ulp of the rim
                if p.x * p.x + p.y * p.y > radius * radius {
                    Position::new(p.x * (1.0 - f64::EPSILON), p.y * (1.0 - f64::EPSILON))
                } else {
                    p
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(self, other: Position) -> f64 {
        squared_distance(self, other).sqrt()
    }
}

pub fn squared_distance(a: Position, b: Position) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    dx * dx + dy * dy
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub geometry: AreaGeometry,
    /// Node positions, indexed by node id.
    pub nodes: Vec<Position>,
    pub bs: Position,
    pub seed: u64,
}

impl Deployment {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn position(&self, id: NodeId) -> Position {
        self.nodes[id]
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "node_id,x,y")?;
        for (id, p) in self.nodes.iter().enumerate() {
            writeln!(out, "{id},{},{}", p.x, p.y)?;
        }
        Ok(())
    }

    /// Rebuild a deployment from its node CSV plus the metadata kept in the
    /// run manifest. Rows must list ids `0..n` in order.
    pub fn read_csv<R: Read>(
        input: R,
        geometry: AreaGeometry,
        bs: Position,
        seed: u64,
    ) -> Result<Self> {
        geometry.validate()?;
        let mut reader = csv::Reader::from_reader(input);
        let mut nodes = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let line = row + 2;
            let record = record.map_err(|e| Error::invalid_data(format!("line {line}: {e}")))?;
            let field = |i: usize| -> Result<&str> {
                record
                    .get(i)
                    .ok_or_else(|| Error::invalid_data(format!("line {line}: missing column {i}")))
            };
            let id: NodeId = field(0)?
                .trim()
                .parse()
                .map_err(|_| Error::invalid_data(format!("line {line}: bad node_id")))?;
            if id != nodes.len() {
                return Err(Error::invalid_data(format!(
                    "line {line}: expected node_id {}, found {id}",
                    nodes.len()
                )));
            }
            let coord = |i: usize| -> Result<f64> {
                field(i)?
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::invalid_data(format!("line {line}: bad coordinate")))
            };
            let p = Position::new(coord(1)?, coord(2)?);
            if !geometry.contains(p) {
                return Err(Error::invalid_data(format!(
                    "line {line}: node outside area"
                )));
            }
            nodes.push(p);
        }
        if nodes.is_empty() {
            return Err(Error::invalid_data("deployment CSV has no nodes"));
        }
        Ok(Deployment {
            geometry,
            nodes,
            bs,
            seed,
        })
    }
}

/// Drop `n` nodes uniformly at random into `geometry`.
///
/// `bs_li` is the x coordinate of the base station for square areas (the BS
/// sits at `(L_i, L/2)` and may lie outside the square). Disks always put the
/// BS at their centre, so `bs_li` must be `None` there.
pub fn deploy(
    geometry: AreaGeometry,
    n: usize,
    bs_li: Option<f64>,
    seed: u64,
) -> Result<Deployment> {
    geometry.validate()?;
    if n == 0 {
        return Err(Error::invalid_arg("node count must be positive"));
    }
    let bs = match (geometry, bs_li) {
        (AreaGeometry::Square { side }, Some(li)) => {
            if !li.is_finite() {
                return Err(Error::invalid_arg("L_i must be finite"));
            }
            Position::new(li, side / 2.0)
        }
        (AreaGeometry::Square { .. }, None) => {
            return Err(Error::invalid_arg(
                "square areas need a base-station offset L_i",
            ))
        }
        (AreaGeometry::Disk { .. }, None) => Position::new(0.0, 0.0),
        (AreaGeometry::Disk { .. }, Some(_)) => {
            return Err(Error::invalid_arg(
                "disk areas place the base station at the centre; drop L_i",
            ))
        }
    };
    let mut rng = SimRng::new(seed);
    let nodes = (0..n).map(|_| geometry.sample(&mut rng)).collect();
    Ok(Deployment {
        geometry,
        nodes,
        bs,
        seed,
    })
}
