use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::{ReebEdge, ReebGraph, ReebVertex, VertexId, VertexKind};
use crate::dynconn::{Connectivity, HdtConnectivity, StepGraph};
use crate::error::{Error, Result};
use crate::events::{detect_all_events, Event, EventKind, EventSchedule, Subjects};
use crate::geometry::{validate_epsilon, TrajId, TrajectorySet};

/// Build the Reeb graph of `set` at `epsilon` with the default connectivity engine.
pub fn build_reeb(set: &TrajectorySet, epsilon: f64) -> Result<ReebGraph> {
    build_reeb_with::<HdtConnectivity>(set, epsilon)
}

/// Build the Reeb graph with a chosen connectivity backend.
pub fn build_reeb_with<C: Connectivity>(set: &TrajectorySet, epsilon: f64) -> Result<ReebGraph> {
    set.require_non_empty()?;
    validate_epsilon(epsilon)?;
    let schedule = detect_all_events(set, epsilon)?;
    let mut builder = Builder::<C>::new(set);
    for (step, events) in schedule.by_step() {
        builder.apply_step(step, events)?;
    }
    if let Some(t) = builder.open.iter().position(Option::is_some) {
        return Err(Error::contract(format!(
            "trajectory {} still open after its last step",
            set.trajectories[t].id
        )));
    }
    let mut metadata = set.metadata.clone();
    metadata.insert("n_trajectories".into(), set.len().to_string());
    metadata.insert("n_points".into(), set.total_points().to_string());
    Ok(ReebGraph {
        epsilon,
        vertices: builder.vertices,
        edges: builder.edges,
        metadata,
    })
}

/// An open maximal group: its members (trajectory indices, ascending by id)
/// and the vertex where it started.
struct Group {
    origin: VertexId,
    members: Vec<usize>,
}

struct Builder<'a, C: Connectivity> {
    set: &'a TrajectorySet,
    index: HashMap<TrajId, usize>,
    graph: StepGraph<C>,
    /// Open group of each trajectory (the component → vertex mapping).
    open: Vec<Option<usize>>,
    groups: Vec<Option<Group>>,
    vertices: Vec<ReebVertex>,
    edges: Vec<ReebEdge>,
}

impl<'a, C: Connectivity> Builder<'a, C> {
    fn new(set: &'a TrajectorySet) -> Self {
        let n = set.len();
        Builder {
            set,
            index: set
                .trajectories
                .iter()
                .enumerate()
                .map(|(i, t)| (t.id, i))
                .collect(),
            graph: StepGraph::with_capacity(n),
            open: vec![None; n],
            groups: Vec::new(),
            vertices: Vec::new(),
            edges: Vec::new(),
        }
    }

    fn id(&self, idx: usize) -> TrajId {
        self.set.trajectories[idx].id
    }

    fn idx(&self, id: TrajId) -> Result<usize> {
        self.index
            .get(&id)
            .copied()
            .ok_or_else(|| Error::contract(format!("event names unknown trajectory {id}")))
    }

    fn pair(&self, s: &Subjects) -> Result<(usize, usize)> {
        match *s {
            Subjects::Pair(a, b) => Ok((self.idx(a)?, self.idx(b)?)),
            Subjects::One(a) => Err(Error::contract(format!("pair event with one subject {a}"))),
        }
    }

    fn group_of(&self, idx: usize) -> Result<usize> {
        self.open[idx].ok_or_else(|| {
            Error::contract(format!("trajectory {} has no open group", self.id(idx)))
        })
    }

    fn min_member(&self, g: usize) -> TrajId {
        let members = &self.groups[g].as_ref().expect("open group").members;
        self.id(members[0])
    }

    fn add_vertex(&mut self, kind: VertexKind, step: usize, witness: usize) -> VertexId {
        let t = &self.set.trajectories[witness];
        let id = VertexId(self.vertices.len());
        self.vertices.push(ReebVertex {
            id,
            step,
            kind,
            location: *t
                .point_at(step)
                .expect("witness is active at the vertex step"),
            witness: t.id,
        });
        id
    }

    fn open_group(&mut self, origin: VertexId, members: Vec<usize>) {
        let g = self.groups.len();
        for &m in &members {
            self.open[m] = Some(g);
        }
        self.groups.push(Some(Group { origin, members }));
    }

    /// Close group `g` at vertex `v`, emitting its edge; returns its members.
    fn close_group(&mut self, g: usize, v: VertexId) -> Vec<usize> {
        let group = self.groups[g].take().expect("group closed twice");
        let members: Vec<TrajId> = group.members.iter().map(|&m| self.id(m)).collect();
        self.edges.push(ReebEdge {
            u: group.origin,
            v,
            members,
            interval: [self.vertices[group.origin.0].step, self.vertices[v.0].step],
        });
        group.members
    }

    /// Split `members` by current component, parts and their members ordered by id.
    fn partition(&mut self, members: &[usize]) -> Result<Vec<Vec<usize>>> {
        let mut parts: HashMap<usize, Vec<usize>> = HashMap::new();
        for &m in members {
            parts
                .entry(self.graph.component_key(m)?)
                .or_default()
                .push(m);
        }
        let mut parts: Vec<Vec<usize>> = parts.into_values().collect();
        parts.sort_unstable_by_key(|p| self.id(p[0]));
        Ok(parts)
    }

    fn sort_by_id(&self, members: &mut [usize]) {
        members.sort_unstable_by_key(|&m| self.set.trajectories[m].id);
    }

    fn apply_step(&mut self, step: usize, events: &[Event]) -> Result<()> {
        for phase in [
            EventKind::Appear,
            EventKind::Connect,
            EventKind::Disconnect,
            EventKind::Disappear,
        ] {
            let batch: Vec<&Event> = events.iter().filter(|e| e.kind == phase).collect();
            if batch.is_empty() {
                continue;
            }
            match phase {
                EventKind::Appear => self.appear(step, &batch)?,
                EventKind::Connect => self.connect(step, &batch)?,
                EventKind::Disconnect => self.disconnect(step, &batch)?,
                EventKind::Disappear => self.disappear(step, &batch)?,
            }
        }
        Ok(())
    }

    fn appear(&mut self, step: usize, batch: &[&Event]) -> Result<()> {
        for e in batch {
            let t = self.idx(e.subjects.lead())?;
            self.graph.insert_node(t)?;
            let v = self.add_vertex(VertexKind::Appear, step, t);
            self.open_group(v, vec![t]);
        }
        Ok(())
    }

    fn connect(&mut self, step: usize, batch: &[&Event]) -> Result<()> {
        let mut touched = BTreeSet::new();
        for e in batch {
            let (a, b) = self.pair(&e.subjects)?;
            if !self.graph.connected(a, b)? {
                touched.insert(self.group_of(a)?);
                touched.insert(self.group_of(b)?);
            }
            self.graph.insert_edge(a, b)?;
        }
        // Touched groups sharing a component after the phase merge at one vertex.
        let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for g in touched {
            let first = self.groups[g].as_ref().expect("open group").members[0];
            clusters
                .entry(self.graph.component_key(first)?)
                .or_default()
                .push(g);
        }
        let mut clusters: Vec<Vec<usize>> = clusters.into_values().collect();
        for c in &mut clusters {
            c.sort_unstable_by_key(|&g| self.min_member(g));
        }
        clusters.sort_unstable_by_key(|c| self.min_member(c[0]));
        for cluster in clusters {
            let witness = self.groups[cluster[0]]
                .as_ref()
                .expect("open group")
                .members[0];
            let v = self.add_vertex(VertexKind::Merge, step, witness);
            let mut members = Vec::new();
            for g in cluster {
                members.extend(self.close_group(g, v));
            }
            self.sort_by_id(&mut members);
            self.open_group(v, members);
        }
        Ok(())
    }

    fn disconnect(&mut self, step: usize, batch: &[&Event]) -> Result<()> {
        let mut touched = BTreeSet::new();
        for e in batch {
            let (a, b) = self.pair(&e.subjects)?;
            self.graph.delete_edge(a, b)?;
            if !self.graph.connected(a, b)? {
                touched.insert(self.group_of(a)?);
            }
        }
        self.regroup(VertexKind::Split, step, touched, &HashSet::new())
    }

    fn disappear(&mut self, step: usize, batch: &[&Event]) -> Result<()> {
        let mut touched = BTreeSet::new();
        let mut gone = HashSet::with_capacity(batch.len());
        for e in batch {
            let t = self.idx(e.subjects.lead())?;
            touched.insert(self.group_of(t)?);
            self.graph.delete_node(t)?;
            self.open[t] = None;
            gone.insert(t);
        }
        self.regroup(VertexKind::Disappear, step, touched, &gone)
    }

    /// Close every touched group at a new vertex and reopen its surviving
    /// members by component.
    fn regroup(
        &mut self,
        kind: VertexKind,
        step: usize,
        touched: BTreeSet<usize>,
        gone: &HashSet<usize>,
    ) -> Result<()> {
        let mut touched: Vec<usize> = touched.into_iter().collect();
        touched.sort_unstable_by_key(|&g| self.min_member(g));
        for g in touched {
            let witness = self.groups[g].as_ref().expect("open group").members[0];
            let v = self.add_vertex(kind, step, witness);
            let members = self.close_group(g, v);
            let survivors: Vec<usize> = members.into_iter().filter(|m| !gone.contains(m)).collect();
            for part in self.partition(&survivors)? {
                self.open_group(v, part);
            }
        }
        Ok(())
    }
}

/// Maximal groups at step `k` obtained by replaying the event schedule through
/// a [`StepGraph`] up to the end of the step's disconnect phase.
pub fn groups_at_step_replay(
    set: &TrajectorySet,
    epsilon: f64,
    k: usize,
) -> Result<Vec<Vec<TrajId>>> {
    set.require_non_empty()?;
    let (first, last) = set.step_range().expect("non-empty");
    if k < first || k > last {
        return Err(Error::Range {
            step: k,
            first,
            last,
        });
    }
    let schedule: EventSchedule = detect_all_events(set, epsilon)?;
    let index: HashMap<TrajId, usize> = set
        .trajectories
        .iter()
        .enumerate()
        .map(|(i, t)| (t.id, i))
        .collect();
    let mut graph = StepGraph::<HdtConnectivity>::with_capacity(set.len());
    for e in schedule.events() {
        if e.step > k || (e.step == k && e.kind == EventKind::Disappear) {
            break;
        }
        match (e.kind, e.subjects) {
            (EventKind::Appear, Subjects::One(t)) => graph.insert_node(index[&t])?,
            (EventKind::Disappear, Subjects::One(t)) => graph.delete_node(index[&t])?,
            (EventKind::Connect, Subjects::Pair(a, b)) => {
                graph.insert_edge(index[&a], index[&b])?
            }
            (EventKind::Disconnect, Subjects::Pair(a, b)) => {
                graph.delete_edge(index[&a], index[&b])?
            }
            _ => return Err(Error::contract("malformed event subjects")),
        }
    }
    let mut groups: Vec<Vec<TrajId>> = graph
        .components()
        .into_iter()
        .map(|c| {
            let mut ids: Vec<TrajId> = c.into_iter().map(|i| set.trajectories[i].id).collect();
            ids.sort_unstable();
            ids
        })
        .collect();
    groups.sort_unstable_by_key(|g| g[0]);
    Ok(groups)
}
