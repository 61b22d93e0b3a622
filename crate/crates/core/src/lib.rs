//! Simulation of DCT-compressed data gathering in clustered wireless sensor
//! networks: deployment, clustering, per-cluster compression, routing and
//! energy accounting.

pub mod clustering;
pub mod deployment;
pub mod energy;
pub mod error;
pub mod harness;
pub mod rng;
pub mod routing;
pub mod signals;
pub mod transform;

pub use clustering::{Algorithm, Cluster, ClusterSet};
pub use deployment::{deploy, AreaGeometry, Deployment, NodeId, Position};
pub use energy::{EnergyModel, EnergyReport, MultihopCost};
pub use error::{Error, Result};
pub use routing::{RoutingStrategy, RoutingTree};
pub use transform::{SelectionMode, SortMode};
