//! Test-only oracles and fixtures shared by the integration suites.
//!
//! The Reeb oracle never looks at the event schedule or the connectivity
//! engine: it recomputes every intermediate partition of every step from raw
//! pairwise distances with a breadth-first search and diffs consecutive
//! partitions.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tractreeb::metrics::{mann_whitney_u, welch_t, SimpleGraph};
use tractreeb::reeb::{ReebGraph, VertexKind};
use tractreeb::{distance, Point3, TrajId, Trajectory, TrajectorySet};

pub fn traj(id: TrajId, start: usize, pts: &[[f64; 3]]) -> Trajectory {
    Trajectory::with_start(id, pts.iter().copied().map(Point3::from).collect(), start).unwrap()
}

/// Two six-point trajectories whose step distances are 3, 2, 1, 1, 3, 3.
pub fn pair_instance() -> TrajectorySet {
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

/// BFS components over `nodes` (trajectory indices) with an explicit edge predicate.
pub fn bfs_partition(nodes: &[usize], adjacent: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut seen: HashMap<usize, bool> = nodes.iter().map(|&n| (n, false)).collect();
    let mut parts = Vec::new();
    for &start in nodes {
        if seen[&start] {
            continue;
        }
        seen.insert(start, true);
        let mut part = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in nodes {
                if !seen[&y] && adjacent(x, y) {
                    seen.insert(y, true);
                    part.push(y);
                    queue.push_back(y);
                }
            }
        }
        part.sort_unstable();
        parts.push(part);
    }
    parts.sort();
    parts
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleVertex {
    pub step: usize,
    pub kind: VertexKind,
    pub witness: TrajId,
    pub location: Point3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEdge {
    pub u: usize,
    pub v: usize,
    pub members: Vec<TrajId>,
    pub interval: [usize; 2],
}

#[derive(Debug, Clone, Default)]
pub struct OracleGraph {
    pub vertices: Vec<OracleVertex>,
    pub edges: Vec<OracleEdge>,
}

/// Brute-force per-step component tracker.
pub fn oracle_reeb(set: &TrajectorySet, eps: f64) -> OracleGraph {
    let ts = &set.trajectories;
    let first = ts.iter().map(|t| t.start_step).min().unwrap();
    let last = ts.iter().map(|t| t.end_step()).max().unwrap();
    let conn = |i: usize, j: usize, k: usize| -> bool {
        match (ts[i].point_at(k), ts[j].point_at(k)) {
            (Some(p), Some(q)) => distance(p, q) <= eps,
            _ => false,
        }
    };
    let mut out = OracleGraph::default();
    // Current partition (trajectory indices) and the vertex each part opened at.
    let mut parts: Vec<(Vec<usize>, usize)> = Vec::new();

    for k in first..=last {
        let active: Vec<usize> = (0..ts.len()).filter(|&i| ts[i].is_active(k)).collect();
        let carried: Vec<bool> = (0..ts.len())
            .map(|i| ts[i].is_active(k) && ts[i].start_step < k)
            .collect();
        let ending: Vec<bool> = (0..ts.len()).map(|i| ts[i].end_step() == k).collect();
        let before = |i: usize, j: usize| carried[i] && carried[j] && conn(i, j, k - 1);
        let now = |i: usize, j: usize| conn(i, j, k);
        let surviving: Vec<usize> = active.iter().copied().filter(|&i| !ending[i]).collect();

        let phases: [(VertexKind, Vec<Vec<usize>>); 4] = [
            (VertexKind::Appear, bfs_partition(&active, before)),
            (
                VertexKind::Merge,
                bfs_partition(&active, |i, j| before(i, j) || now(i, j)),
            ),
            (VertexKind::Split, bfs_partition(&active, now)),
            (VertexKind::Disappear, bfs_partition(&surviving, now)),
        ];
        for (kind, next) in phases {
            parts = diff(set, &mut out, k, kind, parts, next);
        }
    }
    assert!(parts.is_empty(), "oracle left open parts");
    out
}

fn diff(
    set: &TrajectorySet,
    out: &mut OracleGraph,
    k: usize,
    kind: VertexKind,
    prev: Vec<(Vec<usize>, usize)>,
    next: Vec<Vec<usize>>,
) -> Vec<(Vec<usize>, usize)> {
    let ts = &set.trajectories;
    let np = prev.len();
    // Union-find over prev parts (0..np) and next parts (np..).
    let mut parent: Vec<usize> = (0..np + next.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let intersects = |a: &[usize], b: &[usize]| a.iter().any(|x| b.contains(x));
    for (i, (pm, _)) in prev.iter().enumerate() {
        for (j, nm) in next.iter().enumerate() {
            if intersects(pm, nm) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, np + j));
                parent[a] = b;
            }
        }
    }
    let mut clusters: HashMap<usize, (Vec<usize>, Vec<usize>)> = HashMap::new();
    for i in 0..np {
        let r = find(&mut parent, i);
        clusters.entry(r).or_default().0.push(i);
    }
    for j in 0..next.len() {
        let r = find(&mut parent, np + j);
        clusters.entry(r).or_default().1.push(j);
    }
    let mut result = Vec::new();
    for (_, (ps, ns)) in clusters {
        if ps.len() == 1 && ns.len() == 1 && prev[ps[0]].0 == next[ns[0]] {
            result.push(prev[ps[0]].clone());
            continue;
        }
        let mut all: BTreeSet<TrajId> = BTreeSet::new();
        for &i in &ps {
            all.extend(prev[i].0.iter().map(|&m| ts[m].id));
        }
        for &j in &ns {
            all.extend(next[j].iter().map(|&m| ts[m].id));
        }
        let witness = *all.iter().next().unwrap();
        let wt = set.get(witness).unwrap();
        let v = out.vertices.len();
        out.vertices.push(OracleVertex {
            step: k,
            kind,
            witness,
            location: *wt.point_at(k).unwrap(),
        });
        for &i in &ps {
            let (members, origin) = &prev[i];
            let mut ids: Vec<TrajId> = members.iter().map(|&m| ts[m].id).collect();
            ids.sort_unstable();
            out.edges.push(OracleEdge {
                u: *origin,
                v,
                members: ids,
                interval: [out.vertices[*origin].step, k],
            });
        }
        for &j in &ns {
            result.push((next[j].clone(), v));
        }
    }
    result
}

/// Canonical vertex: step, kind, witness, location bits and the sorted
/// (members, interval) lists of its earlier- and later-side edges.
pub type CanonEdge = (Vec<TrajId>, [usize; 2]);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CanonVertex {
    pub step: usize,
    pub phase: u8,
    pub witness: TrajId,
    pub location: [u64; 3],
    pub incoming: Vec<CanonEdge>,
    pub outgoing: Vec<CanonEdge>,
}

fn canon(
    vertices: Vec<(usize, VertexKind, TrajId, Point3)>,
    edges: Vec<(usize, usize, Vec<TrajId>, [usize; 2])>,
) -> Vec<CanonVertex> {
    let mut out: Vec<CanonVertex> = vertices
        .into_iter()
        .map(|(step, kind, witness, p)| CanonVertex {
            step,
            phase: kind.phase(),
            witness,
            location: [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()],
            incoming: Vec::new(),
            outgoing: Vec::new(),
        })
        .collect();
    for (u, v, members, interval) in edges {
        out[u].outgoing.push((members.clone(), interval));
        out[v].incoming.push((members, interval));
    }
    for v in &mut out {
        v.incoming.sort();
        v.outgoing.sort();
    }
    out.sort();
    out
}

pub fn canonical_of_graph(g: &ReebGraph) -> Vec<CanonVertex> {
    canon(
        g.vertices
            .iter()
            .map(|v| (v.step, v.kind, v.witness, v.location))
            .collect(),
        g.edges
            .iter()
            .map(|e| (e.u.0, e.v.0, e.members.clone(), e.interval))
            .collect(),
    )
}

pub fn canonical_of_oracle(g: &OracleGraph) -> Vec<CanonVertex> {
    canon(
        g.vertices
            .iter()
            .map(|v| (v.step, v.kind, v.witness, v.location))
            .collect(),
        g.edges
            .iter()
            .map(|e| (e.u, e.v, e.members.clone(), e.interval))
            .collect(),
    )
}

/// Brute-force maximal groups at step `k` (after disconnects, before disappears).
pub fn oracle_groups(set: &TrajectorySet, eps: f64, k: usize) -> Vec<Vec<TrajId>> {
    let ts = &set.trajectories;
    let active: Vec<usize> = (0..ts.len()).filter(|&i| ts[i].is_active(k)).collect();
    let mut groups: Vec<Vec<TrajId>> = bfs_partition(&active, |i, j| {
        distance(ts[i].point_at(k).unwrap(), ts[j].point_at(k).unwrap()) <= eps
    })
    .into_iter()
    .map(|p| {
        let mut ids: Vec<TrajId> = p.into_iter().map(|i| ts[i].id).collect();
        ids.sort_unstable();
        ids
    })
    .collect();
    groups.sort();
    groups
}

/// Per-trajectory path property: the edges holding `t` chain vertex to vertex
/// and tile `[start_step, end_step]` from its appear vertex to a vertex at its
/// last step.
pub fn check_paths(set: &TrajectorySet, g: &ReebGraph) -> Result<(), String> {
    for t in &set.trajectories {
        let path = g.trajectory_path(t.id);
        if path.is_empty() {
            return Err(format!("trajectory {} has no edges", t.id));
        }
        let first = g.edge(path[0]);
        let start = g.vertex(first.u);
        if start.kind != VertexKind::Appear || start.witness != t.id || start.step != t.start_step {
            return Err(format!(
                "trajectory {} path does not start at its appear vertex",
                t.id
            ));
        }
        for w in path.windows(2) {
            let (a, b) = (g.edge(w[0]), g.edge(w[1]));
            if a.v != b.u || a.interval[1] != b.interval[0] {
                return Err(format!("trajectory {} path has a gap or overlap", t.id));
            }
        }
        let last = g.edge(*path.last().unwrap());
        let end = g.vertex(last.v);
        if end.kind != VertexKind::Disappear
            || end.step != t.end_step()
            || last.interval[1] != t.end_step()
        {
            return Err(format!(
                "trajectory {} path does not end at its last step",
                t.id
            ));
        }
    }
    Ok(())
}

/// Every vertex sits at its witness trajectory's point at the vertex step.
pub fn check_locations(set: &TrajectorySet, g: &ReebGraph) -> Result<(), String> {
    for v in &g.vertices {
        let t = set
            .get(v.witness)
            .ok_or(format!("vertex {} witness unknown", v.id.0))?;
        if t.point_at(v.step) != Some(&v.location) {
            return Err(format!(
                "vertex {} location differs from its witness point",
                v.id.0
            ));
        }
    }
    Ok(())
}

/// Members entering a merge equal members leaving it; symmetrically for splits.
pub fn check_conservation(g: &ReebGraph) -> Result<(), String> {
    let mut incoming: Vec<BTreeSet<TrajId>> = vec![BTreeSet::new(); g.vertices.len()];
    let mut outgoing: Vec<BTreeSet<TrajId>> = vec![BTreeSet::new(); g.vertices.len()];
    for e in &g.edges {
        outgoing[e.u.0].extend(&e.members);
        incoming[e.v.0].extend(&e.members);
    }
    for v in &g.vertices {
        if matches!(v.kind, VertexKind::Merge | VertexKind::Split)
            && incoming[v.id.0] != outgoing[v.id.0]
        {
            return Err(format!("vertex {} does not conserve members", v.id.0));
        }
    }
    Ok(())
}

/// Random walks in a small box so that groups form and dissolve often.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    len: (usize, usize),
    offsets: bool,
) -> TrajectorySet {
    let step = Normal::new(0.0, 0.6).unwrap();
    let trajectories = (0..n)
        .map(|id| {
            let m = rng.random_range(len.0..=len.1);
            let start = if offsets { rng.random_range(0..8) } else { 0 };
            let mut p = [
                rng.random_range(0.0..8.0),
                rng.random_range(0.0..8.0),
                rng.random_range(0.0..8.0),
            ];
            let pts: Vec<Point3> = (0..m)
                .map(|_| {
                    let here = Point3::from(p);
                    for c in &mut p {
                        *c = (*c + step.sample(rng)).clamp(0.0, 8.0);
                    }
                    here
                })
                .collect();
            Trajectory::with_start(id as TrajId, pts, start).unwrap()
        })
        .collect();
    TrajectorySet::new(trajectories).unwrap()
}

/// Bundle-like synthetic tractogram: roughly parallel fibres along z with
/// smooth lateral wobble. The cross-section grows with `n` so that fibre
/// density (and so events per point) stays fixed.
pub fn bundle(n: usize, len: usize, seed: u64) -> TrajectorySet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = 15.0 * (n as f64 / 1000.0).sqrt();
    let trajectories = (0..n)
        .map(|id| {
            let (r, theta) = (
                radius * rng.random::<f64>().sqrt(),
                rng.random_range(0.0..std::f64::consts::TAU),
            );
            let (cx, cy) = (r * theta.cos(), r * theta.sin());
            let (ax, ay) = (rng.random_range(0.3..1.5), rng.random_range(0.3..1.5));
            let (fx, fy) = (rng.random_range(0.02..0.12), rng.random_range(0.02..0.12));
            let (px, py) = (rng.random_range(0.0..6.3), rng.random_range(0.0..6.3));
            let start = rng.random_range(0..10);
            let pts: Vec<Point3> = (0..len)
                .map(|i| {
                    let k = (start + i) as f64;
                    Point3::new(
                        cx + ax * (fx * k + px).sin(),
                        cy + ay * (fy * k + py).sin(),
                        k,
                    )
                })
                .collect();
            Trajectory::with_start(id as TrajId, pts, start).unwrap()
        })
        .collect();
    TrajectorySet::new(trajectories).unwrap()
}

/// Every set partition of 0..n as restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn grow(labels: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<Vec<usize>>>) {
        if labels.len() == n {
            let k = labels.iter().max().map_or(0, |m| m + 1);
            let mut parts = vec![Vec::new(); k];
            for (v, &l) in labels.iter().enumerate() {
                parts[l].push(v);
            }
            out.push(parts);
            return;
        }
        let next = labels.iter().max().map_or(0, |m| m + 1);
        for l in 0..=next {
            labels.push(l);
            grow(labels, n, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

/// Modularity straight from the definition: sum over vertex pairs of
/// (A_ij − k_i k_j / 2m) δ(c_i, c_j) / 2m.
pub fn modularity_by_definition(g: &SimpleGraph, parts: &[Vec<usize>]) -> f64 {
    let n = g.node_count();
    let m2 = 2.0 * g.edge_count() as f64;
    let mut label = vec![0; n];
    for (i, p) in parts.iter().enumerate() {
        for &v in p {
            label[v] = i;
        }
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if label[i] == label[j] {
                let a = g.has_edge(i, j) as u8 as f64;
                q += a - (g.degree(i) * g.degree(j)) as f64 / m2;
            }
        }
    }
    q / m2
}

/// False-positive rates of both tests at α = 0.05 over same-distribution cohorts.
pub fn false_positive_rates(sims: usize, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Normal::new(0.4, 0.1).unwrap();
    let (mut mw, mut w) = (0, 0);
    for _ in 0..sims {
        let a: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        mw += (mann_whitney_u(&a, &b).p_value < 0.05) as usize;
        w += (welch_t(&a, &b).p_value < 0.05) as usize;
    }
    (mw as f64 / sims as f64, w as f64 / sims as f64)
}
