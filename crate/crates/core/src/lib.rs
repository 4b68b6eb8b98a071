//! Reeb graphs of the ε-grouping structure of 3D trajectories.
//!
//! Trajectories (for example tractography streamlines) are compared point by
//! point at each global step. Pairs closer than ε are connected; the connected
//! components of that relation are the maximal groups at a step. The Reeb
//! graph records where groups appear, merge, split and disappear, with a 3D
//! location for every such critical vertex.

pub mod cli;
pub mod dynconn;
pub mod error;
pub mod events;
pub mod geometry;
pub mod ingest;
pub mod metrics;
pub mod reeb;

pub use error::{Error, Result};
pub use geometry::{distance, eps_connected, Config, Point3, TrajId, Trajectory, TrajectorySet};
