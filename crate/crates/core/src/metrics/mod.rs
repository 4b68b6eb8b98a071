//! Graph features of a Reeb graph and two-cohort comparison.

mod modularity;
mod stats;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use modularity::{greedy_partition, modularity};
pub use stats::{
    compare_cohorts, mann_whitney_u, welch_t, CohortComparison, MetricComparison, TestResult,
};

use crate::error::{Error, Result};
use crate::geometry::{validate_epsilon, TrajectorySet};
use crate::reeb::{build_reeb, ReebGraph};

/// Undirected simple graph as sorted adjacency sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: Vec<BTreeSet<usize>>,
}

impl SimpleGraph {
    /// Collapses duplicate edges and drops self-loops.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![BTreeSet::new(); n];
        for (a, b) in edges {
            if a != b {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        SimpleGraph { adj }
    }

    pub fn from_reeb(r: &ReebGraph) -> Self {
        Self::from_edges(r.vertices.len(), r.edges.iter().map(|e| (e.u.0, e.v.0)))
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    /// Local clustering coefficient; 0 for degree below 2.
    pub fn local_clustering(&self, v: usize) -> f64 {
        let k = self.degree(v);
        if k < 2 {
            return 0.0;
        }
        let nb: Vec<usize> = self.neighbors(v).collect();
        let mut links = 0usize;
        for (i, &a) in nb.iter().enumerate() {
            links += nb[i + 1..].iter().filter(|&&b| self.has_edge(a, b)).count();
        }
        2.0 * links as f64 / (k * (k - 1)) as f64
    }

    pub fn average_clustering(&self) -> f64 {
        let n = self.node_count();
        if n == 0 {
            return 0.0;
        }
        (0..n).map(|v| self.local_clustering(v)).sum::<f64>() / n as f64
    }

    /// Normalised betweenness of every vertex (Brandes, unweighted).
    pub fn betweenness(&self) -> Vec<f64> {
        let n = self.node_count();
        let per_source: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|s| self.dependencies(s))
            .collect();
        let mut cb = vec![0.0; n];
        for deps in per_source {
            for (c, d) in cb.iter_mut().zip(deps) {
                *c += d;
            }
        }
        // Every pair is counted from both ends.
        let scale = if n > 2 {
            1.0 / ((n - 1) * (n - 2)) as f64
        } else {
            0.0
        };
        cb.iter_mut().for_each(|c| *c *= scale);
        cb
    }

    fn dependencies(&self, s: usize) -> Vec<f64> {
        let n = self.node_count();
        let mut order = Vec::with_capacity(n);
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![usize::MAX; n];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for w in self.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0; n];
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
        }
        delta[s] = 0.0;
        delta
    }

    pub fn average_betweenness(&self) -> f64 {
        let n = self.node_count();
        if n == 0 {
            return 0.0;
        }
        self.betweenness().iter().sum::<f64>() / n as f64
    }

    /// Mean of 1/d(u, v) over ordered vertex pairs; unreachable pairs add 0.
    pub fn global_efficiency(&self) -> f64 {
        let n = self.node_count();
        if n < 2 {
            return 0.0;
        }
        let total: f64 = (0..n)
            .into_par_iter()
            .map(|s| {
                let mut dist = vec![usize::MAX; n];
                dist[s] = 0;
                let mut queue = VecDeque::from([s]);
                let mut sum = 0.0;
                while let Some(v) = queue.pop_front() {
                    for w in self.neighbors(v) {
                        if dist[w] == usize::MAX {
                            dist[w] = dist[v] + 1;
                            sum += 1.0 / dist[w] as f64;
                            queue.push_back(w);
                        }
                    }
                }
                sum
            })
            .sum();
        total / (n * (n - 1)) as f64
    }
}

/// Feature vector of one Reeb graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub epsilon: f64,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub avg_clustering: f64,
    pub avg_betweenness: f64,
    pub modularity: f64,
    pub global_efficiency: f64,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

/// The CSV columns, in order.
pub const CSV_COLUMNS: [&str; 7] = [
    "epsilon",
    "n_vertices",
    "n_edges",
    "avg_clustering",
    "avg_betweenness",
    "modularity",
    "global_efficiency",
];

#[derive(Serialize, Deserialize)]
struct CsvRow {
    epsilon: f64,
    n_vertices: usize,
    n_edges: usize,
    avg_clustering: f64,
    avg_betweenness: f64,
    modularity: f64,
    global_efficiency: f64,
}

impl MetricsReport {
    /// Features computed from a bare simple graph; `n_edges` is its edge count.
    pub fn from_simple(epsilon: f64, g: &SimpleGraph) -> Self {
        let partition = greedy_partition(g);
        let mut metadata = BTreeMap::new();
        metadata.insert("centrality".into(), "betweenness".into());
        metadata.insert("modularity_partition".into(), "greedy".into());
        MetricsReport {
            epsilon,
            n_vertices: g.node_count(),
            n_edges: g.edge_count(),
            avg_clustering: g.average_clustering(),
            avg_betweenness: g.average_betweenness(),
            modularity: modularity(g, &partition),
            global_efficiency: g.global_efficiency(),
            metadata,
        }
    }

    /// Value of a named numeric column.
    pub fn value(&self, column: &str) -> Option<f64> {
        Some(match column {
            "epsilon" => self.epsilon,
            "n_vertices" => self.n_vertices as f64,
            "n_edges" => self.n_edges as f64,
            "avg_clustering" => self.avg_clustering,
            "avg_betweenness" => self.avg_betweenness,
            "modularity" => self.modularity,
            "global_efficiency" => self.global_efficiency,
            _ => return None,
        })
    }
}

/// Features of `r`; parallel edges count once for the graph measures but
/// `n_edges` is the Reeb edge count.
pub fn compute_metrics(r: &ReebGraph) -> Result<MetricsReport> {
    if r.is_empty() {
        return Err(Error::Empty("Reeb graph has no vertices".into()));
    }
    let g = SimpleGraph::from_reeb(r);
    let mut report = MetricsReport::from_simple(r.epsilon, &g);
    report.n_edges = r.edges.len();
    Ok(report)
}

/// One report per ε, each from an independent build.
pub fn sweep(set: &TrajectorySet, epsilons: &[f64]) -> Result<Vec<MetricsReport>> {
    for &e in epsilons {
        validate_epsilon(e)?;
    }
    if epsilons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "epsilon values must be strictly increasing".into(),
        ));
    }
    epsilons
        .par_iter()
        .map(|&e| compute_metrics(&build_reeb(set, e)?))
        .collect()
}

pub fn write_reports_csv<W: Write>(w: W, reports: &[MetricsReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in reports {
        out.serialize(CsvRow {
            epsilon: r.epsilon,
            n_vertices: r.n_vertices,
            n_edges: r.n_edges,
            avg_clustering: r.avg_clustering,
            avg_betweenness: r.avg_betweenness,
            modularity: r.modularity,
            global_efficiency: r.global_efficiency,
        })?;
    }
    if reports.is_empty() {
        out.write_record(CSV_COLUMNS)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_reports_csv<R: Read>(r: R) -> Result<Vec<MetricsReport>> {
    let mut rdr = csv::Reader::from_reader(r);
    if rdr.headers()?.iter().ne(CSV_COLUMNS) {
        return Err(Error::format(
            "header",
            format!("expected {}", CSV_COLUMNS.join(",")),
        ));
    }
    rdr.deserialize::<CsvRow>()
        .map(|row| {
            let row = row.map_err(|e| Error::format("row", e.to_string()))?;
            Ok(MetricsReport {
                epsilon: row.epsilon,
                n_vertices: row.n_vertices,
                n_edges: row.n_edges,
                avg_clustering: row.avg_clustering,
                avg_betweenness: row.avg_betweenness,
                modularity: row.modularity,
                global_efficiency: row.global_efficiency,
                metadata: BTreeMap::new(),
            })
        })
        .collect()
}
