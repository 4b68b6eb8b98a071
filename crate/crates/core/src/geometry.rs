//! Shared domain types: points, trajectories, trajectory sets and run configuration.

use std::collections::BTreeMap;
use std::ops::Sub;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Identifier of a trajectory within a [`TrajectorySet`].
pub type TrajId = u32;

/// A point in R^3, coordinates in millimeters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Linear interpolation `self + t * (other - self)`.
    pub fn lerp(&self, other: &Point3, t: f64) -> Point3 {
        Point3::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
            self.z + t * (other.z - self.z),
        )
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl Sub for Point3 {
    type Output = Point3;

    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

// Points travel as `[x, y, z]` in every text format.
impl Serialize for Point3 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point3 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        <[f64; 3]>::deserialize(d).map(Point3::from)
    }
}

/// Euclidean distance between two points.
pub fn distance(p: &Point3, q: &Point3) -> f64 {
    (*p - *q).norm()
}

/// Closed ε-ball test: `distance(p, q) <= epsilon`, compared exactly.
pub fn eps_connected(p: &Point3, q: &Point3, epsilon: f64) -> bool {
    distance(p, q) <= epsilon
}

/// An ordered sequence of at least two points, placed on the global step axis
/// starting at `start_step`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: TrajId,
    pub points: Vec<Point3>,
    pub start_step: usize,
}

impl Trajectory {
    pub fn new(id: TrajId, points: Vec<Point3>) -> Result<Self> {
        Self::with_start(id, points, 0)
    }

    pub fn with_start(id: TrajId, points: Vec<Point3>, start_step: usize) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::contract(format!(
                "trajectory {id} has {} points, need at least 2",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::contract(format!(
                "trajectory {id} has a non-finite coordinate at point {i}"
            )));
        }
        Ok(Self {
            id,
            points,
            start_step,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Global step of the last point.
    pub fn end_step(&self) -> usize {
        self.start_step + self.points.len() - 1
    }

    pub fn is_active(&self, step: usize) -> bool {
        step >= self.start_step && step <= self.end_step()
    }

    /// Point at global step `step`, if the trajectory is active there.
    pub fn point_at(&self, step: usize) -> Option<&Point3> {
        step.checked_sub(self.start_step)
            .and_then(|i| self.points.get(i))
    }

    pub fn first(&self) -> &Point3 {
        &self.points[0]
    }

    pub fn last(&self) -> &Point3 {
        &self.points[self.points.len() - 1]
    }

    /// Total polyline length.
    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| distance(&w[0], &w[1])).sum()
    }

    pub fn reversed(&self) -> Trajectory {
        let mut points = self.points.clone();
        points.reverse();
        Trajectory {
            id: self.id,
            points,
            start_step: self.start_step,
        }
    }
}

/// A set of trajectories with unique ids plus free-form metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectorySet {
    pub trajectories: Vec<Trajectory>,
    pub metadata: BTreeMap<String, String>,
}

impl TrajectorySet {
    pub fn new(trajectories: Vec<Trajectory>) -> Result<Self> {
        let mut ids: Vec<TrajId> = trajectories.iter().map(|t| t.id).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::contract(format!("duplicate trajectory id {}", w[0])));
        }
        Ok(Self {
            trajectories,
            metadata: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn total_points(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }

    pub fn get(&self, id: TrajId) -> Option<&Trajectory> {
        self.trajectories.iter().find(|t| t.id == id)
    }

    /// Inclusive global step range covered by the set.
    pub fn step_range(&self) -> Option<(usize, usize)> {
        let first = self.trajectories.iter().map(|t| t.start_step).min()?;
        let last = self.trajectories.iter().map(Trajectory::end_step).max()?;
        Some((first, last))
    }

    pub(crate) fn require_non_empty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::Empty("trajectory set has no trajectories".into()))
        } else {
            Ok(())
        }
    }
}

/// Run configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub epsilon: f64,
    pub resample_delta: Option<f64>,
    pub orient_align: bool,
}

impl Config {
    pub fn new(epsilon: f64) -> Result<Self> {
        let cfg = Self {
            epsilon,
            resample_delta: None,
            orient_align: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        validate_epsilon(self.epsilon)?;
        match self.resample_delta {
            Some(d) if !(d > 0.0 && d.is_finite()) => {
                Err(Error::Config("resample delta must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

pub(crate) fn validate_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::Config("epsilon must be positive".into()))
    }
}
