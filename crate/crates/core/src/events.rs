//! Appear / disappear / connect / disconnect event detection.
//!
//! Connections are tested only between points at the same global step. A pair
//! connects at the first step where its points are ε-connected and either the
//! pair had no common step before or was ε-disconnected one step earlier; it
//! disconnects at the first later step where the points separate again.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{eps_connected, validate_epsilon, Point3, TrajId, Trajectory, TrajectorySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    // Declaration order is the intra-step processing order.
    Appear,
    Connect,
    Disconnect,
    Disappear,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EventKind::Appear => "appear",
            EventKind::Connect => "connect",
            EventKind::Disconnect => "disconnect",
            EventKind::Disappear => "disappear",
        };
        f.write_str(s)
    }
}

/// One trajectory (appear/disappear) or an unordered pair stored as `(low, high)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subjects {
    One(TrajId),
    Pair(TrajId, TrajId),
}

impl Subjects {
    pub fn pair(a: TrajId, b: TrajId) -> Self {
        if a < b {
            Subjects::Pair(a, b)
        } else {
            Subjects::Pair(b, a)
        }
    }

    pub fn ids(&self) -> Vec<TrajId> {
        match *self {
            Subjects::One(a) => vec![a],
            Subjects::Pair(a, b) => vec![a, b],
        }
    }

    pub fn contains(&self, id: TrajId) -> bool {
        match *self {
            Subjects::One(a) => a == id,
            Subjects::Pair(a, b) => a == id || b == id,
        }
    }

    /// Lowest id among the subjects.
    pub fn lead(&self) -> TrajId {
        match *self {
            Subjects::One(a) | Subjects::Pair(a, _) => a,
        }
    }
}

impl Serialize for Subjects {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.ids().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subjects {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let ids = Vec::<TrajId>::deserialize(d)?;
        match ids.as_slice() {
            [a] => Ok(Subjects::One(*a)),
            [a, b] if a != b => Ok(Subjects::pair(*a, *b)),
            _ => Err(serde::de::Error::custom(
                "subjects must be one id or two distinct ids",
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub step: usize,
    pub subjects: Subjects,
    pub location: Point3,
}

impl Event {
    fn order_key(&self) -> (usize, EventKind, Subjects) {
        (self.step, self.kind, self.subjects)
    }

    /// Total order used by [`EventSchedule`]: step, then kind, then subject ids.
    pub fn schedule_cmp(&self, other: &Event) -> Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

/// All events of a set, sorted by step, then kind, then subject ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventSchedule {
    events: Vec<Event>,
}

impl EventSchedule {
    pub fn from_events(mut events: Vec<Event>) -> Self {
        events.sort_by(Event::schedule_cmp);
        Self { events }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events grouped by step, in ascending step order.
    pub fn by_step(&self) -> impl Iterator<Item = (usize, &[Event])> {
        self.events
            .chunk_by(|a, b| a.step == b.step)
            .map(|chunk| (chunk[0].step, chunk))
    }

    /// One JSON object per line: `{kind, step, subjects, location}`.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events always serialize"));
            out.push('\n');
        }
        out
    }
}

fn appear_disappear(t: &Trajectory) -> [Event; 2] {
    [
        Event {
            kind: EventKind::Appear,
            step: t.start_step,
            subjects: Subjects::One(t.id),
            location: *t.first(),
        },
        Event {
            kind: EventKind::Disappear,
            step: t.end_step(),
            subjects: Subjects::One(t.id),
            location: *t.last(),
        },
    ]
}

fn pair_event(kind: EventKind, step: usize, a: &Trajectory, b: &Trajectory) -> Event {
    let lead = if a.id < b.id { a } else { b };
    Event {
        kind,
        step,
        subjects: Subjects::pair(a.id, b.id),
        location: *lead
            .point_at(step)
            .expect("pair events lie in the common range"),
    }
}

/// Connect/disconnect events of one pair, by a direct scan of the common step range.
pub fn pairwise_events(t1: &Trajectory, t2: &Trajectory, epsilon: f64) -> Vec<Event> {
    let first = t1.start_step.max(t2.start_step);
    let last = t1.end_step().min(t2.end_step());
    let mut out = Vec::new();
    let mut connected = false;
    for k in first..=last {
        let now = eps_connected(
            t1.point_at(k).expect("in range"),
            t2.point_at(k).expect("in range"),
            epsilon,
        );
        if now != connected {
            let kind = if now {
                EventKind::Connect
            } else {
                EventKind::Disconnect
            };
            out.push(pair_event(kind, k, t1, t2));
            connected = now;
        }
    }
    out
}

/// Reference path: all pairs scanned directly, O(n² · steps).
pub fn detect_all_events_brute_force(set: &TrajectorySet, epsilon: f64) -> Result<EventSchedule> {
    set.require_non_empty()?;
    validate_epsilon(epsilon)?;
    let ts = &set.trajectories;
    let mut events: Vec<Event> = ts.iter().flat_map(appear_disappear).collect();
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            events.extend(pairwise_events(&ts[i], &ts[j], epsilon));
        }
    }
    Ok(EventSchedule::from_events(events))
}

/// Uniform grid over the points of one step, with cells slightly wider than ε
/// so that rounding in the cell index never hides a pair at distance exactly ε.
struct StepGrid {
    cell: f64,
    cells: HashMap<(i64, i64, i64), Vec<u32>>,
}

impl StepGrid {
    fn key(&self, p: &Point3) -> (i64, i64, i64) {
        (
            (p.x / self.cell).floor() as i64,
            (p.y / self.cell).floor() as i64,
            (p.z / self.cell).floor() as i64,
        )
    }

    /// Sorted list of index pairs `(i, j)`, `i < j`, ε-connected at this step.
    fn connected_pairs(points: &[(u32, Point3)], epsilon: f64) -> Vec<(u32, u32)> {
        let mut grid = StepGrid {
            cell: epsilon * (1.0 + 1e-9),
            cells: HashMap::with_capacity(points.len()),
        };
        let mut location = HashMap::with_capacity(points.len());
        for &(i, p) in points {
            let key = grid.key(&p);
            grid.cells.entry(key).or_default().push(i);
            location.insert(i, p);
        }
        let mut pairs = Vec::new();
        for &(i, p) in points {
            let (cx, cy, cz) = grid.key(&p);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let Some(bucket) = grid.cells.get(&(cx + dx, cy + dy, cz + dz)) else {
                            continue;
                        };
                        for &j in bucket {
                            if j > i && eps_connected(&p, &location[&j], epsilon) {
                                pairs.push((i, j));
                            }
                        }
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs
    }
}

/// Full event schedule for a set at `epsilon`.
///
/// Candidate pairs come from a per-step uniform grid; the result is identical
/// to [`detect_all_events_brute_force`]. Steps are evaluated in parallel and
/// merged in step order.
pub fn detect_all_events(set: &TrajectorySet, epsilon: f64) -> Result<EventSchedule> {
    set.require_non_empty()?;
    validate_epsilon(epsilon)?;
    let ts = &set.trajectories;
    let (first, last) = set.step_range().expect("non-empty");

    // Trajectories active at each step, by index into `ts`.
    let span = last - first + 1;
    let mut active: Vec<Vec<u32>> = vec![Vec::new(); span];
    for (i, t) in ts.iter().enumerate() {
        for k in t.start_step..=t.end_step() {
            active[k - first].push(i as u32);
        }
    }

    let pairs: Vec<Vec<(u32, u32)>> = (0..span)
        .into_par_iter()
        .map(|s| {
            let k = first + s;
            let pts: Vec<(u32, Point3)> = active[s]
                .iter()
                .map(|&i| (i, *ts[i as usize].point_at(k).expect("active")))
                .collect();
            StepGrid::connected_pairs(&pts, epsilon)
        })
        .collect();

    let mut events: Vec<Event> = ts.iter().flat_map(appear_disappear).collect();
    let empty = Vec::new();
    for s in 0..span {
        let k = first + s;
        let prev = if s == 0 { &empty } else { &pairs[s - 1] };
        let cur = &pairs[s];
        let (mut a, mut b) = (0, 0);
        while a < prev.len() || b < cur.len() {
            let ord = match (prev.get(a), cur.get(b)) {
                (Some(p), Some(c)) => p.cmp(c),
                (Some(_), None) => Ordering::Less,
                (None, _) => Ordering::Greater,
            };
            match ord {
                Ordering::Equal => {
                    a += 1;
                    b += 1;
                }
                Ordering::Less => {
                    // Connected at k-1 only: a disconnect if both are still active.
                    let (i, j) = prev[a];
                    let (ti, tj) = (&ts[i as usize], &ts[j as usize]);
                    if ti.is_active(k) && tj.is_active(k) {
                        events.push(pair_event(EventKind::Disconnect, k, ti, tj));
                    }
                    a += 1;
                }
                Ordering::Greater => {
                    let (i, j) = cur[b];
                    events.push(pair_event(
                        EventKind::Connect,
                        k,
                        &ts[i as usize],
                        &ts[j as usize],
                    ));
                    b += 1;
                }
            }
        }
    }
    Ok(EventSchedule::from_events(events))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(id: TrajId, start: usize, pts: &[[f64; 3]]) -> Trajectory {
        Trajectory::with_start(id, pts.iter().copied().map(Point3::from).collect(), start).unwrap()
    }

    fn pair_instance() -> TrajectorySet {
        TrajectorySet::new(vec![
            traj(
                0,
                0,
                &[
                    [0., 0., 0.],
                    [1., 0., 0.],
                    [2., 0., 0.],
                    [3., 0., 0.],
                    [4., 0., 0.],
                    [5., 0., 0.],
                ],
            ),
            traj(
                1,
                0,
                &[
                    [0., 3., 0.],
                    [1., 2., 0.],
                    [2., 1., 0.],
                    [3., 1., 0.],
                    [4., 3., 0.],
                    [5., 3., 0.],
                ],
            ),
        ])
        .unwrap()
    }

    fn summary(s: &EventSchedule) -> Vec<(EventKind, usize, Vec<TrajId>)> {
        s.events()
            .iter()
            .map(|e| (e.kind, e.step, e.subjects.ids()))
            .collect()
    }

    #[test]
    fn pair_instance_events() {
        let set = pair_instance();
        let ev = pairwise_events(&set.trajectories[0], &set.trajectories[1], 1.5);
        let kinds: Vec<_> = ev.iter().map(|e| (e.kind, e.step)).collect();
        assert_eq!(
            kinds,
            vec![(EventKind::Connect, 2), (EventKind::Disconnect, 4)]
        );
        assert_eq!(ev[0].location, Point3::new(2., 0., 0.));

        use EventKind::*;
        let expected = vec![
            (Appear, 0, vec![0]),
            (Appear, 0, vec![1]),
            (Connect, 2, vec![0, 1]),
            (Disconnect, 4, vec![0, 1]),
            (Disappear, 5, vec![0]),
            (Disappear, 5, vec![1]),
        ];
        assert_eq!(summary(&detect_all_events(&set, 1.5).unwrap()), expected);
        assert_eq!(
            summary(&detect_all_events_brute_force(&set, 1.5).unwrap()),
            expected
        );
    }

    #[test]
    fn identical_trajectories_connect_once() {
        let pts = [[0., 0., 0.], [1., 1., 1.], [2., 0., 3.]];
        let a = traj(0, 4, &pts);
        let b = traj(1, 4, &pts);
        let ev = pairwise_events(&a, &b, 0.5);
        assert_eq!(ev.len(), 1);
        assert_eq!((ev[0].kind, ev[0].step), (EventKind::Connect, 4));
    }

    #[test]
    fn disjoint_step_ranges_have_no_pair_events() {
        let pts = [[0., 0., 0.]; 5];
        let a = traj(0, 0, &pts);
        let b = traj(1, 10, &pts);
        assert!(pairwise_events(&a, &b, 1.0).is_empty());
    }

    #[test]
    fn single_trajectory_schedule() {
        let set = TrajectorySet::new(vec![traj(
            7,
            0,
            &[[0., 0., 0.], [1., 0., 0.], [2., 0., 0.]],
        )])
        .unwrap();
        let s = detect_all_events(&set, 1.0).unwrap();
        assert_eq!(
            summary(&s),
            vec![
                (EventKind::Appear, 0, vec![7]),
                (EventKind::Disappear, 2, vec![7])
            ]
        );
    }

    #[test]
    fn no_disconnect_when_a_partner_ends() {
        let a = traj(0, 0, &[[0., 0., 0.], [0., 0., 0.]]);
        let b = traj(1, 0, &[[0., 0., 0.], [0., 0., 0.], [9., 9., 9.]]);
        let set = TrajectorySet::new(vec![a, b]).unwrap();
        let s = detect_all_events(&set, 1.0).unwrap();
        assert_eq!(s, detect_all_events_brute_force(&set, 1.0).unwrap());
        assert!(s.events().iter().all(|e| e.kind != EventKind::Disconnect));
    }

    #[test]
    fn boundary_distance_on_cell_edges() {
        // Exactly ε apart, straddling grid cell boundaries.
        let eps = 0.5;
        let a = traj(0, 0, &[[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        let b = traj(1, 0, &[[1.5, 0.0, 0.0], [2.5, 0.0, 0.5]]);
        let set = TrajectorySet::new(vec![a, b]).unwrap();
        let s = detect_all_events(&set, eps).unwrap();
        assert_eq!(s, detect_all_events_brute_force(&set, eps).unwrap());
        let kinds: Vec<_> = s.events().iter().map(|e| (e.kind, e.step)).collect();
        assert!(kinds.contains(&(EventKind::Connect, 0)));
        assert!(kinds.contains(&(EventKind::Disconnect, 1)));
    }

    #[test]
    fn json_lines_dump() {
        let s = detect_all_events(&pair_instance(), 1.5).unwrap();
        let dump = s.to_json_lines();
        let first: serde_json::Value = serde_json::from_str(dump.lines().next().unwrap()).unwrap();
        assert_eq!(first["kind"], "appear");
        assert_eq!(first["subjects"], serde_json::json!([0]));
        assert_eq!(first["location"], serde_json::json!([0.0, 0.0, 0.0]));
        let back: Vec<Event> = dump
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(back, s.events());
    }

    #[test]
    fn invalid_inputs() {
        assert!(detect_all_events(&TrajectorySet::default(), 1.0).is_err());
        assert!(detect_all_events(&pair_instance(), 0.0).is_err());
    }
}
