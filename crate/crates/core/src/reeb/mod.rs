//! Reeb graph of the ε-grouping structure.
//!
//! Vertices are the critical points where a maximal group is born, merges,
//! splits or ends; each carries the 3D location of its witness trajectory at
//! the vertex step. Edges are maximal groups that stay unchanged between two
//! vertices.
//!
//! Events of one step are applied in four phases (appear, connect,
//! disconnect, disappear). Each phase that changes the component partition
//! produces vertices of the matching kind, so several vertices can share a
//! step and be joined by zero-length edges.

mod build;
mod fsm;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use build::{build_reeb, build_reeb_with, groups_at_step_replay};
pub use fsm::{Fsm, FsmState};

use crate::error::{Error, Result};
use crate::events::EventKind;
use crate::geometry::{Point3, TrajId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Appear,
    Merge,
    Split,
    Disappear,
}

impl VertexKind {
    /// Position of the producing phase within a step.
    pub fn phase(self) -> u8 {
        match self {
            VertexKind::Appear => 0,
            VertexKind::Merge => 1,
            VertexKind::Split => 2,
            VertexKind::Disappear => 3,
        }
    }

    /// Vertex kind produced by the phase that handles events of `kind`.
    pub fn for_event(kind: EventKind) -> Self {
        match kind {
            EventKind::Appear => VertexKind::Appear,
            EventKind::Connect => VertexKind::Merge,
            EventKind::Disconnect => VertexKind::Split,
            EventKind::Disappear => VertexKind::Disappear,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VertexKind::Appear => "appear",
            VertexKind::Merge => "merge",
            VertexKind::Split => "split",
            VertexKind::Disappear => "disappear",
        }
    }
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReebVertex {
    pub id: VertexId,
    pub step: usize,
    pub kind: VertexKind,
    pub location: Point3,
    /// Trajectory whose point at `step` is `location`.
    pub witness: TrajId,
}

impl ReebVertex {
    /// Sort key of the vertex on the (step, phase) time axis.
    pub fn time(&self) -> (usize, u8) {
        (self.step, self.kind.phase())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReebEdge {
    /// Earlier endpoint.
    pub u: VertexId,
    /// Later endpoint.
    pub v: VertexId,
    /// Trajectory ids of the group, ascending.
    pub members: Vec<TrajId>,
    pub interval: [usize; 2],
}

impl ReebEdge {
    pub fn contains(&self, t: TrajId) -> bool {
        self.members.binary_search(&t).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReebGraph {
    pub epsilon: f64,
    pub vertices: Vec<ReebVertex>,
    pub edges: Vec<ReebEdge>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl ReebGraph {
    pub fn vertex(&self, id: VertexId) -> &ReebVertex {
        &self.vertices[id.0]
    }

    pub fn edge(&self, id: EdgeId) -> &ReebEdge {
        &self.edges[id.0]
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Inclusive step range spanned by the vertices.
    pub fn step_range(&self) -> Option<(usize, usize)> {
        let first = self.vertices.iter().map(|v| v.step).min()?;
        let last = self.vertices.iter().map(|v| v.step).max()?;
        Some((first, last))
    }

    fn open_time(&self, e: &ReebEdge) -> (usize, u8) {
        self.vertex(e.u).time()
    }

    fn close_time(&self, e: &ReebEdge) -> (usize, u8) {
        self.vertex(e.v).time()
    }

    /// Whether `e` is the live group for its members at step `k`, i.e. after
    /// the step's disconnects and before its disappears.
    pub fn edge_alive_at(&self, e: &ReebEdge, k: usize) -> bool {
        self.open_time(e) <= (k, VertexKind::Split.phase())
            && self.close_time(e) >= (k, VertexKind::Disappear.phase())
    }

    /// Maximal ε-connected groups at step `k`, each sorted, ordered by lowest id.
    pub fn groups_at_step(&self, k: usize) -> Result<Vec<Vec<TrajId>>> {
        let (first, last) = self
            .step_range()
            .ok_or_else(|| Error::Empty("Reeb graph has no vertices".into()))?;
        if k < first || k > last {
            return Err(Error::Range {
                step: k,
                first,
                last,
            });
        }
        let mut groups: Vec<Vec<TrajId>> = self
            .edges
            .iter()
            .filter(|e| self.edge_alive_at(e, k))
            .map(|e| e.members.clone())
            .collect();
        groups.sort_unstable_by_key(|g| g[0]);
        Ok(groups)
    }

    /// Edges containing `t`, in time order.
    pub fn trajectory_path(&self, t: TrajId) -> Vec<EdgeId> {
        let mut path: Vec<EdgeId> = (0..self.edges.len())
            .map(EdgeId)
            .filter(|&e| self.edge(e).contains(t))
            .collect();
        path.sort_by_key(|&e| (self.open_time(self.edge(e)), self.close_time(self.edge(e))));
        path
    }

    /// Structural checks: dense ids, known endpoints, consistent intervals,
    /// non-empty sorted members.
    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id.0 != i {
                return Err(Error::contract(format!(
                    "vertex at index {i} has id {}",
                    v.id.0
                )));
            }
            if !v.location.is_finite() {
                return Err(Error::contract(format!(
                    "vertex {i} has a non-finite location"
                )));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.members.is_empty() {
                return Err(Error::contract(format!("edge {i} has no members")));
            }
            if e.members.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::contract(format!(
                    "edge {i} members are not strictly ascending"
                )));
            }
            let (Some(u), Some(v)) = (self.vertices.get(e.u.0), self.vertices.get(e.v.0)) else {
                return Err(Error::contract(format!(
                    "edge {i} references an unknown vertex"
                )));
            };
            if u.time() >= v.time() {
                return Err(Error::contract(format!(
                    "edge {i} does not run forward in time"
                )));
            }
            if e.interval != [u.step, v.step] {
                return Err(Error::contract(format!(
                    "edge {i} interval disagrees with its endpoints"
                )));
            }
        }
        Ok(())
    }

    /// Canonical JSON: fixed key order, shortest round-trip float formatting.
    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let graph: ReebGraph = serde_json::from_str(text)?;
        graph.validate()?;
        Ok(graph)
    }
}
