//! Finite-state view of a Reeb graph: states are maximal groups (edges),
//! inputs are trajectory events, outputs are vertex locations.

use std::collections::HashMap;

use super::{EdgeId, ReebGraph, VertexId, VertexKind};
use crate::error::{Error, Result};
use crate::events::{Event, EventKind};
use crate::geometry::{Point3, TrajId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FsmState {
    /// Before the tracked trajectory appears.
    Start,
    /// Inside the maximal group carried by this edge.
    Group(EdgeId),
    /// After the tracked trajectory disappeared.
    Terminal,
}

/// Read-only transition function over a finished [`ReebGraph`].
#[derive(Debug)]
pub struct Fsm<'g> {
    graph: &'g ReebGraph,
    in_edges: Vec<Vec<EdgeId>>,
    out_edges: Vec<Vec<EdgeId>>,
    appear: HashMap<TrajId, VertexId>,
}

impl<'g> Fsm<'g> {
    pub fn new(graph: &'g ReebGraph) -> Self {
        let n = graph.vertices.len();
        let mut in_edges = vec![Vec::new(); n];
        let mut out_edges = vec![Vec::new(); n];
        for (i, e) in graph.edges.iter().enumerate() {
            out_edges[e.u.0].push(EdgeId(i));
            in_edges[e.v.0].push(EdgeId(i));
        }
        let appear = graph
            .vertices
            .iter()
            .filter(|v| v.kind == VertexKind::Appear)
            .map(|v| (v.witness, v.id))
            .collect();
        Fsm {
            graph,
            in_edges,
            out_edges,
            appear,
        }
    }

    pub fn graph(&self) -> &'g ReebGraph {
        self.graph
    }

    /// Trajectory ids of the group a state stands for.
    pub fn members(&self, state: FsmState) -> &'g [TrajId] {
        match state {
            FsmState::Group(e) => &self.graph.edge(e).members,
            _ => &[],
        }
    }

    /// The group holding `t` right after it appears.
    pub fn initial_state(&self, t: TrajId) -> Result<FsmState> {
        let v = self
            .appear
            .get(&t)
            .ok_or_else(|| Error::InvalidTransition(format!("trajectory {t} never appears")))?;
        Ok(self.successor(*v, t))
    }

    /// The group holding `t` at step `k`, after that step's disconnects.
    pub fn state_at(&self, t: TrajId, k: usize) -> Result<FsmState> {
        self.graph
            .trajectory_path(t)
            .into_iter()
            .find(|&e| self.graph.edge_alive_at(self.graph.edge(e), k))
            .map(FsmState::Group)
            .ok_or_else(|| {
                Error::InvalidTransition(format!("trajectory {t} is not active at step {k}"))
            })
    }

    fn successor(&self, v: VertexId, t: TrajId) -> FsmState {
        self.out_edges[v.0]
            .iter()
            .copied()
            .find(|&e| self.graph.edge(e).contains(t))
            .map_or(FsmState::Terminal, FsmState::Group)
    }

    /// Transition following the event's lowest subject inside the current
    /// group (or the group's lowest member when no subject belongs to it).
    pub fn next(&self, state: FsmState, event: &Event) -> Result<(FsmState, Point3)> {
        let focus = match state {
            FsmState::Group(e) => {
                let members = &self.graph.edge(e).members;
                event
                    .subjects
                    .ids()
                    .into_iter()
                    .find(|t| members.binary_search(t).is_ok())
                    .unwrap_or(members[0])
            }
            _ => event.subjects.lead(),
        };
        self.next_for(state, event, focus)
    }

    /// Transition of trajectory `focus` on `event`; returns the next state and
    /// the location of the vertex where it happens.
    pub fn next_for(
        &self,
        state: FsmState,
        event: &Event,
        focus: TrajId,
    ) -> Result<(FsmState, Point3)> {
        let invalid = |why: &str| {
            Err(Error::InvalidTransition(format!(
                "{} at step {} from {state:?}: {why}",
                event.kind, event.step
            )))
        };
        match state {
            FsmState::Terminal => invalid("terminal state has no transitions"),
            FsmState::Start => {
                if event.kind != EventKind::Appear || !event.subjects.contains(focus) {
                    return invalid("only the tracked trajectory's appear leaves the start state");
                }
                let Some(&v) = self.appear.get(&focus) else {
                    return invalid("trajectory never appears");
                };
                let vertex = self.graph.vertex(v);
                if vertex.step != event.step {
                    return invalid("appear step does not match");
                }
                Ok((self.successor(v, focus), vertex.location))
            }
            FsmState::Group(e) => {
                let edge = self.graph.edge(e);
                if !edge.contains(focus) {
                    return invalid("focus trajectory is not in the current group");
                }
                let v = edge.v;
                let vertex = self.graph.vertex(v);
                if vertex.step != event.step || vertex.kind != VertexKind::for_event(event.kind) {
                    return invalid("event is not incident to the closing vertex");
                }
                let incident = self.in_edges[v.0].iter().any(|&i| {
                    let members = &self.graph.edge(i).members;
                    event
                        .subjects
                        .ids()
                        .iter()
                        .any(|t| members.binary_search(t).is_ok())
                });
                if !incident {
                    return invalid("event subjects do not take part in the closing vertex");
                }
                Ok((self.successor(v, focus), vertex.location))
            }
        }
    }
}
